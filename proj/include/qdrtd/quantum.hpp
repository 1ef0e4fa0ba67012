#ifndef QDRTD_QUANTUM_HPP
#define QDRTD_QUANTUM_HPP

#include <cstddef>
#include <vector>

namespace qdrtd {

/// Conduction-band-edge energy and effective mass on a 1-D grid. The potential
/// includes band offsets plus any electrostatic contribution. The transfer-matrix
/// solver treats values as piecewise constant per interval, each interval taking
/// the value stored at its LEFT node (the grid convention: a node describes the
/// interval to its right); the last node's value is only used as a lead fallback.
struct PotentialProfile {
    std::vector<double> positions_nm;
    std::vector<double> potential_eV;
    std::vector<double> m_eff_per_node;

    void validate() const;  // throws config_error on malformed profiles
    PotentialProfile mirrored() const;
};

struct EigenSolution {
    std::vector<double> energies_eV;                 // ascending, below cutoff
    std::vector<std::vector<double>> wavefunctions;  // normalized: integral |psi|^2 dz = 1
};

struct Resonance {
    double center_eV = 0.0;
    double fwhm_eV = 0.0;
    double peak_T = 0.0;
};

struct TransmissionSpectrum {
    std::vector<double> energies_eV;  // ascending
    std::vector<double> transmission;
    std::vector<Resonance> resonances;
};

/// Controls adaptive energy-grid refinement in transmission().
struct RefinePolicy {
    bool enabled = true;
    double delta_t_threshold = 0.05;  // refine where |dT| between neighbors exceeds this
    int max_depth = 20;
    int min_points_per_fwhm = 8;
    double resonance_floor = 1e-6;    // ignore peaks with T below this
};

/// Lowest bound states of the position-dependent-mass Hamiltonian with zero
/// boundary conditions, BenDaniel-Duke symmetrized discretization. States at or
/// above max(edge potentials) are treated as continuum and dropped.
EigenSolution solve_bound_states(const PotentialProfile& profile, int n_states);

/// Flux-normalized transmission at a single energy via piecewise-constant
/// transfer matrices. Log-scaled products: deeply evanescent profiles underflow
/// to T = 0, never NaN. Returns 0 below either lead band edge.
double transmission_at(const PotentialProfile& profile, double energy_eV);

/// T(E) on the requested grid; with refinement enabled the grid is subdivided
/// where |dT| jumps and every resonance is hunted down (golden-section on the
/// local maximum) and resolved by >= min_points_per_fwhm points across its FWHM.
TransmissionSpectrum transmission(const PotentialProfile& profile,
                                  const std::vector<double>& energy_grid_eV,
                                  const RefinePolicy& refine = {});

/// Local maxima of T above the floor, with FWHM from linear interpolation.
std::vector<Resonance> find_resonances(const TransmissionSpectrum& spectrum,
                                       double floor = 1e-6);

} // namespace qdrtd

#endif
