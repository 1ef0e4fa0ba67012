#ifndef QDRTD_DYNAMICS_HPP
#define QDRTD_DYNAMICS_HPP

#include "qdrtd/structure.hpp"

#include <cstdint>
#include <vector>

namespace qdrtd {

/// Mean charge stored in the dot sheet. Carries its own sheet context so the
/// occupancy <-> sheet-charge relation can never drift.
struct QDChargeState {
    double occupancy = 0.0;              // mean electrons per dot, [0, n_max]
    double areal_density_cm2 = 0.0;
    double electrons_per_dot_max = 6.0;

    /// signed sheet charge [C/cm^2]; negative for stored electrons
    double sheet_charge_Ccm2() const;
    /// signed areal number density [cm^-2] as the Poisson solver wants it
    double sheet_number_cm2() const { return -occupancy * areal_density_cm2; }

    static QDChargeState make(const QDSheet& sheet, double occupancy);
};

struct PhotonStream {
    double rate_per_s_um2 = 0.0;
    double wavelength_nm = 532.0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> arrivals_s;  // sorted, in [0, duration]
};

struct SweepProtocol {
    double former_bias_V = 0.0;   // held before the sweep to set the dot charge
    double hold_duration_s = 2.0;
    double sweep_start_V = 0.0;
    double sweep_end_V = -4.0;
    double step_V = -0.05;        // sign must match start -> end direction
    double dwell_s_per_step = 0.1;
    double photon_rate_per_s_um2 = 0.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws config_error
    std::vector<double> bias_points() const;
};

struct RateParams {
    double tau_tunnel_s = 1e-9;        // resonant escape time through the double barrier
    double tau_recomb_s = 1e-6;        // electron-hole recombination time in a dot
    double capture_efficiency = 1.0;   // absorbed photon's hole captured by a dot
    double absorption_efficiency = 0.02;  // photons absorbed usefully in the absorber
    double charge_rate_per_V_s = 0.02; // electron charging rate under forward bias
    double background_discharge_s = 0.0;  // 0 or negative = no background decay

    /// warns (stderr) if the tunneling/recombination timescale ordering is broken
    void validate() const;
};

/// Dot occupancy after holding former_bias_V for hold_duration_s: saturating
/// in bias x hold, zero for reverse bias (charging is one-way).
QDChargeState equilibrium_charge(double former_bias_V, double hold_duration_s,
                                 const RateParams& params, const QDSheet& sheet);

/// Mean-field discharge over dt: dn/dt = recharge (1 - n/n_max) - capture [n>0]
/// - n/tau_background, integrated in closed form and clamped to [0, n_max].
QDChargeState evolve_charge(const QDChargeState& state, double dt_s,
                            double hole_capture_rate_per_s, const RateParams& params,
                            double recharge_rate_per_s = 0.0);

/// Homogeneous Poisson process at rate_per_s_um2 * area_um2, reproducible by seed.
PhotonStream photon_arrivals(double rate_per_s_um2, double area_um2, double duration_s,
                             std::uint64_t seed);

struct MultiplicationReport {
    double photocurrent_A = 0.0;
    double photon_rate_per_s = 0.0;
    double efficiency = 1.0;
    double m_external = 0.0;  // I / (q R)
    double m_internal = 0.0;  // I / (q R eta)
};

/// Transported electrons per incident (external) and per captured (internal)
/// photon. Throws config_error for zero photon rate or efficiency outside (0, 1].
MultiplicationReport multiplication_factor(double photocurrent_A, double photon_rate_per_s,
                                           double efficiency);

} // namespace qdrtd

#endif
