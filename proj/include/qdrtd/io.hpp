#ifndef QDRTD_IO_HPP
#define QDRTD_IO_HPP

#include "qdrtd/dynamics.hpp"
#include "qdrtd/electrostatics.hpp"
#include "qdrtd/quantum.hpp"
#include "qdrtd/transport.hpp"

#include <string>
#include <vector>

namespace qdrtd::io {

/// Shortest round-trip decimal form; the one number format of every artifact,
/// so identical runs give byte-identical files.
std::string format_number(double v);

std::string csv_profile(const PotentialProfile& profile);
std::string csv_spectrum(const TransmissionSpectrum& spectrum);
std::string csv_band_diagram(const BandDiagram& diagram);
std::string csv_iv(const IVCurve& curve);
std::string csv_peaks(const PeakSet& peaks);
std::string csv_materials(double temperature_K);
std::string report_multiplication(const MultiplicationReport& report);

void write_file(const std::string& path, const std::string& content);  // throws io_error
std::string read_file(const std::string& path);

/// Minimal line plot of the columns already exported as CSV.
std::string svg_plot(const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title);

} // namespace qdrtd::io

#endif
