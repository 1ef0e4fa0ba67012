#ifndef QDRTD_TRANSPORT_HPP
#define QDRTD_TRANSPORT_HPP

#include "qdrtd/dynamics.hpp"
#include "qdrtd/electrostatics.hpp"
#include "qdrtd/quantum.hpp"
#include "qdrtd/structure.hpp"

#include <string>
#include <vector>

namespace qdrtd {

struct IVPoint {
    double bias_V = 0.0;
    double current_A = 0.0;
    double qd_occupancy = 0.0;
    double path_rtd_A = 0.0;
    double path_qd_A = 0.0;
};

struct SweepMeta {
    std::string direction;        // "forward" or "reverse"
    double former_bias_V = 0.0;
    double hold_duration_s = 0.0;
    double photon_rate_per_s_um2 = 0.0;
    double temperature_K = 0.0;
    std::uint64_t seed = 0;
};

struct IVCurve {
    std::vector<IVPoint> points;  // bias strictly monotone in sweep direction
    SweepMeta sweep_meta;
};

struct Peak {
    double bias_V = 0.0;
    double current_A = 0.0;
    char label = '-';  // 'A', 'B', 'C' or '-' for unlabeled
};

struct PeakSet {
    std::vector<Peak> peaks;
};

/// Where the equivalent InAs well sits in the Path_QD-RTD profile.
enum class QDWellPlacement {
    at_sheet,          // literal InAs slab at the dot layer plane
    in_barrier_well,   // double-barrier well lowered by the slab depth spread
                       // over the whole well layer (barriers stay symmetric)
};

struct TransportOptions {
    ScfOptions scf;
    RefinePolicy refine;
    RateParams rates;
    double energy_step_eV = 1e-3;        // coarse Tsu-Esaki grid before refinement
    double supply_cutoff = 1e-12;        // spectrum must cover down to this supply fraction
    double current_floor_A = 1e-18;      // clamp numerically-silent currents to zero
    double inas_well_depth_eV = -0.3;    // effective equivalent-well depth vs GaAs
    double qd_barrier_delta_eV = -0.15;  // emitter-barrier lowering on the dot path
                                         // (In intermixing near the dot layer)
    QDWellPlacement qd_well_placement = QDWellPlacement::in_barrier_well;
    bool per_path_scf = false;           // insert applied to the converged diagram;
                                         // true = own electrostatics for the QD path
    bool supply_blocking = true;         // (1 - n/n_max) on the QD path; false = push-up only
    bool fast_potential = false;         // linear-drop fallback instead of per-bias SCF
};

/// Tsu-Esaki integral of T(E) against the contact supply-function difference on
/// the spectrum's (adaptive) grid. Current sign follows the bias sign. Throws
/// coverage_error if the spectrum does not span the supply support.
double tsu_esaki_current(const BandDiagram& diagram, const TransmissionSpectrum& spectrum,
                         double bias_V, double area_um2, double temperature_K,
                         double supply_cutoff = 1e-12);

struct TwoPathResult {
    double total_A = 0.0;
    double path_rtd_A = 0.0;  // already weighted by (1-f) of the area
    double path_qd_A = 0.0;   // weighted by f and the occupancy blocking factor
};

/// Current through the dot-free and through-dot channels at one bias point.
TwoPathResult two_path_current(const DeviceStack& stack, double bias_V,
                               const QDChargeState& qd_state,
                               const TransportOptions& options = {});

/// Full protocol: charge the dots at the former bias, then step through the
/// sweep evolving the dot charge (dark or illuminated) at every point.
IVCurve iv_sweep(const DeviceStack& stack, const SweepProtocol& protocol,
                 const TransportOptions& options = {});

/// Local maxima of |current| with relative prominence above the floor.
/// Reverse-branch labels A (smallest |V|), then B; main forward peak gets C.
PeakSet detect_peaks(const IVCurve& curve, double prominence_floor_rel = 1e-3);

/// One sweep per photon rate, identical former bias, per-rate seeds derived
/// deterministically from the protocol seed. Ordered like the input rates.
std::vector<IVCurve> photoresponse_sweep(const DeviceStack& stack,
                                         const SweepProtocol& base_protocol,
                                         const std::vector<double>& photon_rates_per_s_um2,
                                         const TransportOptions& options = {});

} // namespace qdrtd

#endif
