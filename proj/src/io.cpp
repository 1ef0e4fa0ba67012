#include "qdrtd/io.hpp"
#include "qdrtd/errors.hpp"
#include "qdrtd/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qdrtd::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw io_error("number formatting failed");
    return std::string(buf, p);
}

namespace {
const char* nl = "\n";
}

std::string csv_profile(const PotentialProfile& profile) {
    std::ostringstream out;
    out << "position_nm,potential_eV,m_eff" << nl;
    for (std::size_t i = 0; i < profile.positions_nm.size(); ++i)
        out << format_number(profile.positions_nm[i]) << ","
            << format_number(profile.potential_eV[i]) << ","
            << format_number(profile.m_eff_per_node[i]) << nl;
    return out.str();
}

std::string csv_spectrum(const TransmissionSpectrum& spectrum) {
    std::ostringstream out;
    for (const auto& r : spectrum.resonances)
        out << "# resonance center_eV=" << format_number(r.center_eV)
            << " fwhm_eV=" << format_number(r.fwhm_eV)
            << " peak_T=" << format_number(r.peak_T) << nl;
    out << "energy_eV,T" << nl;
    for (std::size_t i = 0; i < spectrum.energies_eV.size(); ++i)
        out << format_number(spectrum.energies_eV[i]) << ","
            << format_number(spectrum.transmission[i]) << nl;
    return out.str();
}

std::string csv_band_diagram(const BandDiagram& diagram) {
    std::ostringstream out;
    out << "# fermi_top_eV=" << format_number(diagram.fermi_top_eV)
        << " fermi_bottom_eV=" << format_number(diagram.fermi_bottom_eV)
        << " residual_eV=" << format_number(diagram.residual_eV)
        << " iterations=" << diagram.iterations << nl;
    out << "position_nm,Ec_eV,electron_density_cm3" << nl;
    for (std::size_t i = 0; i < diagram.profile.positions_nm.size(); ++i)
        out << format_number(diagram.profile.positions_nm[i]) << ","
            << format_number(diagram.profile.potential_eV[i]) << ","
            << format_number(diagram.electron_cm3[i]) << nl;
    return out.str();
}

std::string csv_iv(const IVCurve& curve) {
    std::ostringstream out;
    const auto& m = curve.sweep_meta;
    out << "# direction=" << m.direction << nl
        << "# former_bias_V=" << format_number(m.former_bias_V) << nl
        << "# hold_duration_s=" << format_number(m.hold_duration_s) << nl
        << "# photon_rate_per_s_um2=" << format_number(m.photon_rate_per_s_um2) << nl
        << "# temperature_K=" << format_number(m.temperature_K) << nl
        << "# seed=" << m.seed << nl;
    out << "bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A" << nl;
    for (const auto& p : curve.points)
        out << format_number(p.bias_V) << "," << format_number(p.current_A) << ","
            << format_number(p.qd_occupancy) << "," << format_number(p.path_rtd_A) << ","
            << format_number(p.path_qd_A) << nl;
    return out.str();
}

std::string csv_peaks(const PeakSet& peaks) {
    std::ostringstream out;
    out << "label,bias_V,current_A" << nl;
    for (const auto& p : peaks.peaks)
        out << p.label << "," << format_number(p.bias_V) << "," << format_number(p.current_A)
            << nl;
    return out.str();
}

std::string csv_materials(double temperature_K) {
    std::ostringstream out;
    out << "name,T,cb_offset_eV,m_eff,eps_rel,band_gap_eV" << nl;
    for (const char* name : {"GaAs", "AlAs", "InAs"}) {
        const MaterialParams m = get_material(name, temperature_K);
        out << m.name << "," << format_number(temperature_K) << ","
            << format_number(m.cb_offset_eV) << "," << format_number(m.m_eff) << ","
            << format_number(m.eps_rel) << "," << format_number(m.band_gap_eV) << nl;
    }
    return out.str();
}

std::string report_multiplication(const MultiplicationReport& report) {
    std::ostringstream out;
    out << "photocurrent_A " << format_number(report.photocurrent_A) << nl
        << "photon_rate_per_s " << format_number(report.photon_rate_per_s) << nl
        << "efficiency " << format_number(report.efficiency) << nl
        << "M_external " << format_number(report.m_external) << nl
        << "M_internal " << format_number(report.m_internal) << nl
        << "# The source experiment quotes a multiplication of order 1e7 for" << nl
        << "# 10 nA at 115 photons/s; I/(qR) from the same numbers is 5.4e8." << nl
        << "# Both definitions are reported here; no convention is guessed." << nl;
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open '" + path + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw io_error("short write to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

std::string svg_plot(const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title) {
    if (x.size() != y.size() || x.empty()) throw io_error("svg_plot: empty or mismatched data");
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    double x0 = *xmin_it, x1 = *xmax_it, y0 = *ymin_it, y1 = *ymax_it;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">" << nl
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>" << nl
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>" << nl
      << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>" << nl
      << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << y_label << "</text>" << nl
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>" << nl;
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        s << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" font-size=\"11\">" << format_number(xv) << "</text>" << nl
          << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(yv) << "</text>" << nl;
    }
    s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
        s << format_number(px(x[i])) << "," << format_number(py(y[i])) << " ";
    s << "\"/>" << nl << "</svg>" << nl;
    return s.str();
}

} // namespace qdrtd::io
