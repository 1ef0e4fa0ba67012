#include "qdrtd/materials.hpp"
#include "qdrtd/errors.hpp"

#include <cmath>

namespace qdrtd {

namespace {

struct Entry {
    const char* name;
    double cb_offset_eV;
    double m_eff;
    double eps_rel;
    double eg0_eV;          // gap at 0 K
    double varshni_alpha;   // [eV/K]
    double varshni_beta;    // [K]
    double lattice_nm;      // 300 K lattice constant
};

// Vurgaftman, Meyer, Ram-Mohan, J. Appl. Phys. 89, 5815 (2001), Gamma valley.
// AlAs/GaAs offset: 1.05 eV Gamma barrier. InAs: effective strained well
// depth -0.4 eV (bulk unstrained offset would be deeper; strain shifts it up).
constexpr Entry kTable[] = {
    {"GaAs",  0.00, 0.067, 12.90, 1.519, 5.405e-4, 204.0, 0.56533},
    {"AlAs", +1.05, 0.150, 10.06, 3.099, 8.850e-4, 530.0, 0.56611},
    {"InAs", -0.40, 0.023, 15.15, 0.417, 2.760e-4,  93.0, 0.60583},
};

const Entry& find_entry(const std::string& name) {
    for (const auto& e : kTable)
        if (name == e.name) return e;
    throw config_error("unsupported material '" + name + "' (supported: GaAs, AlAs, InAs)");
}

} // namespace

MaterialParams get_material(const std::string& name, double temperature_K) {
    if (!(temperature_K > 0.0) || temperature_K > 400.0)
        throw config_error("temperature " + std::to_string(temperature_K) +
                           " K out of supported range (0, 400]");
    const Entry& e = find_entry(name);
    MaterialParams p;
    p.name = e.name;
    p.cb_offset_eV = e.cb_offset_eV;
    p.m_eff = e.m_eff;
    p.eps_rel = e.eps_rel;
    p.band_gap_eV = e.eg0_eV - e.varshni_alpha * temperature_K * temperature_K /
                               (temperature_K + e.varshni_beta);
    return p;
}

double lattice_constant_nm(const std::string& name) {
    return find_entry(name).lattice_nm;
}

} // namespace qdrtd
