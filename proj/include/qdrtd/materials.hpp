#ifndef QDRTD_MATERIALS_HPP
#define QDRTD_MATERIALS_HPP

#include <string>

namespace qdrtd {

/// III-V binary parameters at a query temperature. Conduction-band offsets are
/// referenced to bulk GaAs (GaAs == 0). Values from the Vurgaftman/Meyer/Ram-Mohan
/// III-V compilation (J. Appl. Phys. 89, 5815 (2001)); the AlAs offset is the
/// Gamma-valley barrier, the InAs offset is an effective (strain-shifted) well
/// depth for the equivalent-well approximation.
struct MaterialParams {
    std::string name;
    double cb_offset_eV = 0.0;  // conduction band edge relative to GaAs [eV]
    double m_eff        = 0.0;  // electron effective mass [m0]
    double eps_rel      = 0.0;  // static dielectric constant
    double band_gap_eV  = 0.0;  // fundamental gap at the query temperature [eV]
};

/// Pure lookup + Varshni gap formula. Supported: GaAs, AlAs, InAs; 0 < T <= 400 K.
/// Throws config_error for unknown materials or out-of-range temperature.
MaterialParams get_material(const std::string& name, double temperature_K);

/// Zinc-blende lattice constant [nm] at 300 K. Throws config_error if unknown.
double lattice_constant_nm(const std::string& name);

} // namespace qdrtd

#endif
