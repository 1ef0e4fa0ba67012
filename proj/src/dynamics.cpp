#include "qdrtd/dynamics.hpp"
#include "qdrtd/constants.hpp"
#include "qdrtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

namespace qdrtd {

double QDChargeState::sheet_charge_Ccm2() const {
    return -consts::q_C * areal_density_cm2 * occupancy;
}

QDChargeState QDChargeState::make(const QDSheet& sheet, double occ) {
    QDChargeState s;
    s.areal_density_cm2 = sheet.areal_density_cm2;
    s.electrons_per_dot_max = sheet.electrons_per_dot_max;
    s.occupancy = std::clamp(occ, 0.0, sheet.electrons_per_dot_max);
    return s;
}

void SweepProtocol::validate() const {
    if (hold_duration_s < 0.0) throw config_error("hold duration must be >= 0");
    if (!(dwell_s_per_step > 0.0)) throw config_error("dwell per step must be > 0");
    if (step_V == 0.0) throw config_error("sweep step must be nonzero");
    if ((sweep_end_V - sweep_start_V) * step_V < 0.0)
        throw config_error("sweep step sign must match the start -> end direction");
    if (photon_rate_per_s_um2 < 0.0) throw config_error("photon rate must be >= 0");
}

std::vector<double> SweepProtocol::bias_points() const {
    validate();
    std::vector<double> pts;
    const int n = static_cast<int>(std::floor((sweep_end_V - sweep_start_V) / step_V + 1e-9));
    for (int i = 0; i <= n; ++i) pts.push_back(sweep_start_V + i * step_V);
    return pts;
}

void RateParams::validate() const {
    if (tau_tunnel_s > 1e-3 * tau_recomb_s)
        std::cerr << "warning: tau_tunnel (" << tau_tunnel_s << " s) is not 3 orders below "
                  << "tau_recomb (" << tau_recomb_s << " s); gain will be degraded\n";
}

QDChargeState equilibrium_charge(double former_bias_V, double hold_duration_s,
                                 const RateParams& params, const QDSheet& sheet) {
    if (hold_duration_s < 0.0) throw config_error("hold duration must be >= 0");
    const double x = std::max(0.0, former_bias_V) * params.charge_rate_per_V_s * hold_duration_s;
    return QDChargeState::make(sheet, sheet.electrons_per_dot_max * x / (1.0 + x));
}

QDChargeState evolve_charge(const QDChargeState& state, double dt_s,
                            double hole_capture_rate_per_s, const RateParams& params,
                            double recharge_rate_per_s) {
    if (!(dt_s > 0.0)) throw config_error("dt must be > 0");
    if (hole_capture_rate_per_s < 0.0 || recharge_rate_per_s < 0.0)
        throw config_error("rates must be >= 0");

    const double n_max = state.electrons_per_dot_max;
    const double g = recharge_rate_per_s;
    const double bg = params.background_discharge_s > 0.0 ? 1.0 / params.background_discharge_s : 0.0;
    double n = std::clamp(state.occupancy, 0.0, n_max);
    double t_left = dt_s;

    // piecewise-exact integration of dn/dt = a - b n with the capture term
    // switching off at n = 0 (at most two phases)
    for (int phase = 0; phase < 3 && t_left > 0.0; ++phase) {
        const bool capture_on = n > 0.0;
        const double r = capture_on ? hole_capture_rate_per_s : 0.0;
        const double a = g - r;
        const double b = g / n_max + bg;
        double n_end;
        if (b > 0.0) {
            const double n_inf = a / b;
            n_end = n_inf + (n - n_inf) * std::exp(-b * t_left);
        } else {
            n_end = n + a * t_left;
        }
        if (n_end >= 0.0 || !capture_on) {
            n = std::clamp(n_end, 0.0, n_max);
            break;
        }
        // hits empty dots before dt elapses: find the crossing, switch capture off
        double t_cross;
        if (b > 0.0) {
            const double n_inf = a / b;
            t_cross = -std::log(n_inf / (n_inf - n)) / b;  // n_inf < 0 here
        } else {
            t_cross = -n / a;
        }
        t_cross = std::clamp(t_cross, 0.0, t_left);
        t_left -= t_cross;
        n = 0.0;
        if (g <= hole_capture_rate_per_s) break;  // pinned at empty
    }

    QDChargeState out = state;
    out.occupancy = std::clamp(n, 0.0, n_max);
    return out;
}

PhotonStream photon_arrivals(double rate_per_s_um2, double area_um2, double duration_s,
                             std::uint64_t seed) {
    if (rate_per_s_um2 < 0.0 || area_um2 < 0.0 || duration_s < 0.0)
        throw config_error("photon stream parameters must be >= 0");
    PhotonStream s;
    s.rate_per_s_um2 = rate_per_s_um2;
    s.duration_s = duration_s;
    s.seed = seed;
    const double lambda = rate_per_s_um2 * area_um2;
    if (lambda > 0.0 && duration_s > 0.0) {
        std::mt19937_64 rng(seed);
        // explicit inverse-CDF exponential gaps for bit-stable replay
        double t = 0.0;
        for (;;) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            t += -std::log1p(-u) / lambda;
            if (t > duration_s) break;
            s.arrivals_s.push_back(t);
        }
    }
    return s;
}

MultiplicationReport multiplication_factor(double photocurrent_A, double photon_rate_per_s,
                                           double efficiency) {
    if (!(photon_rate_per_s > 0.0))
        throw config_error("multiplication factor undefined for zero photon rate");
    if (!(efficiency > 0.0) || efficiency > 1.0)
        throw config_error("efficiency must be in (0, 1]");
    MultiplicationReport r;
    r.photocurrent_A = photocurrent_A;
    r.photon_rate_per_s = photon_rate_per_s;
    r.efficiency = efficiency;
    r.m_external = std::abs(photocurrent_A) / (consts::q_C * photon_rate_per_s);
    r.m_internal = r.m_external / efficiency;
    return r;
}

} // namespace qdrtd
