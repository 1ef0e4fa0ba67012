#ifndef QDRTD_ELECTROSTATICS_HPP
#define QDRTD_ELECTROSTATICS_HPP

#include "qdrtd/quantum.hpp"
#include "qdrtd/structure.hpp"

#include <utility>
#include <vector>

namespace qdrtd {

/// Net fixed charge for the Poisson solve. Node values are signed number
/// densities (cm^-3 equivalents, positive = donors); the sheet value is a
/// signed areal number density (cm^-2, negative for stored electrons) placed
/// at grid.qd_node_index.
struct ChargeDensity {
    std::vector<double> node_charge_cm3;
    double sheet_charge_cm2 = 0.0;
};

struct BandDiagram {
    PotentialProfile profile;          // converged conduction band edge
    std::vector<double> potential_V;   // electrostatic potential per node
    std::vector<double> electron_cm3;  // free-electron density per node
    double fermi_top_eV = 0.0;         // contact quasi-Fermi levels
    double fermi_bottom_eV = 0.0;
    double fermi_split_nm = 0.0;       // where the quasi-Fermi level switches sides
    double residual_eV = 0.0;
    int iterations = 0;
    long qd_node_index = -1;
};

struct ScfOptions {
    double tolerance_eV = 1e-6;
    double mixing = 0.1;          // under-relaxation on the potential update
    bool adaptive_mixing = true;  // grow the factor on monotone residual decrease
    int max_iterations = 500;
    double grid_spacing_nm = 0.25;
    double max_step_V = 0.2;      // per-node cap on one potential update
};

/// Fermi-Dirac integral of order 1/2, normalized so F(eta) -> exp(eta) in the
/// nondegenerate limit. Cubic interpolation on a quadrature-built table with
/// asymptotic branches outside it.
double fermi_half(double eta);
double fermi_half_deriv(double eta);
double inverse_fermi_half(double value);

/// Effective conduction-band density of states [cm^-3].
double conduction_band_dos_cm3(double m_eff, double temperature_K);

/// Ec - EF [eV] from bulk charge neutrality at the given donor density.
/// Undoped material pins the Fermi level at midgap.
double neutral_ec_minus_ef(const MaterialParams& mat, double doping_cm3, double temperature_K);

/// 3-D free-electron density per node from the local band edge [cm^-3].
std::vector<double> electron_density(const PotentialProfile& profile, double fermi_level_eV,
                                     double temperature_K);

/// 1-D variable-coefficient Poisson on the grid, Dirichlet boundaries [V].
/// Sheet charge enters as a flux jump at its node. Fixed charge only; no
/// self-consistency here.
std::vector<double> solve_poisson(const Grid& grid, const ChargeDensity& charge,
                                  std::pair<double, double> boundary_V);

/// Self-consistent band diagram at the applied bias (top contact relative to
/// bottom). QD occupancy enters as a fixed negative sheet charge. Damped-Newton
/// iteration of {density from potential -> linearized Poisson -> under-relaxed
/// update}; throws convergence_error (with residual history) at the cap.
BandDiagram self_consistent_band_diagram(const DeviceStack& stack, double bias_V,
                                         double qd_occupancy, const ScfOptions& options = {});

/// Same solve on an explicit grid (used for per-path profiles and synthetic
/// test structures). fermi_split_nm divides the contacts' quasi-Fermi levels.
BandDiagram self_consistent_on_grid(const Grid& grid, double bias_V, double sheet_charge_cm2,
                                    double fermi_split_nm, const ScfOptions& options = {});

} // namespace qdrtd

#endif
