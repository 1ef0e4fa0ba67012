#include "qdrtd/transport.hpp"
#include "qdrtd/constants.hpp"
#include "qdrtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qdrtd {

using namespace consts;

namespace {

inline double ln1pexp(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(std::max(x, -700.0)));
}

// Fermi supply-function difference of the two contacts [dimensionless]
inline double supply(double E_eV, double ef_em, double ef_col, double kT) {
    return ln1pexp((ef_em - E_eV) / kT) - ln1pexp((ef_col - E_eV) / kT);
}

double fermi_split_nm(const DeviceStack& stack) {
    for (int i = 0; i < static_cast<int>(stack.layers.size()); ++i)
        if (stack.layers[static_cast<std::size_t>(i)].role_tag == "well")
            return stack.layer_start_nm(i) +
                   0.5 * stack.layers[static_cast<std::size_t>(i)].thickness_nm;
    const auto [w0, w1] = default_window(stack);
    return 0.5 * (w0 + w1);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

double tsu_esaki_current(const BandDiagram& diagram, const TransmissionSpectrum& spectrum,
                         double bias_V, double area_um2, double temperature_K,
                         double supply_cutoff) {
    if (spectrum.energies_eV.empty())
        throw config_error("tsu_esaki_current: empty spectrum");
    if (bias_V == 0.0) return 0.0;  // supply difference vanishes identically

    const double kT = kB_eVK * temperature_K;
    const bool top_is_emitter = diagram.fermi_top_eV > diagram.fermi_bottom_eV;
    const double ef_em = top_is_emitter ? diagram.fermi_top_eV : diagram.fermi_bottom_eV;
    const double ef_col = top_is_emitter ? diagram.fermi_bottom_eV : diagram.fermi_top_eV;
    const double m_em = top_is_emitter ? diagram.profile.m_eff_per_node.front()
                                       : diagram.profile.m_eff_per_node.back();

    // supply support: from the higher lead edge to where the supply factor has
    // fallen below supply_cutoff of its maximum
    const double e_lo =
        std::max(diagram.profile.potential_eV.front(), diagram.profile.potential_eV.back());
    const double n_max = supply(e_lo, ef_em, ef_col, kT);
    double hi = e_lo + 1.0;
    while (supply(hi, ef_em, ef_col, kT) > supply_cutoff * n_max && hi < e_lo + 50.0) hi += 1.0;
    double lo = e_lo;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (supply(mid, ef_em, ef_col, kT) > supply_cutoff * n_max ? lo : hi) = mid;
    }
    const double e_hi = hi;

    if (spectrum.energies_eV.front() > e_lo + 1e-9 || spectrum.energies_eV.back() < e_hi - 1e-9)
        throw coverage_error("transmission spectrum does not cover the supply support [" +
                                 std::to_string(e_lo) + ", " + std::to_string(e_hi) + "] eV",
                             e_lo, e_hi);

    double integral = 0.0;  // [eV]
    for (std::size_t i = 0; i + 1 < spectrum.energies_eV.size(); ++i) {
        const double e1 = spectrum.energies_eV[i], e2 = spectrum.energies_eV[i + 1];
        const double f1 = spectrum.transmission[i] * supply(e1, ef_em, ef_col, kT);
        const double f2 = spectrum.transmission[i + 1] * supply(e2, ef_em, ef_col, kT);
        integral += 0.5 * (f1 + f2) * (e2 - e1);
    }

    const double kT_J = kB_JK * temperature_K;
    const double prefactor =
        q_C * m_em * m0_kg * kT_J / (2.0 * std::numbers::pi * std::numbers::pi *
                                     hbar_Js * hbar_Js * hbar_Js);  // [A/m^2 per J]
    const double current = area_um2 * 1e-12 * prefactor * integral * q_C;
    return (bias_V < 0.0 ? -1.0 : 1.0) * current;
}

namespace {

// solves both conduction paths at a sequence of biases, reusing grids (and the
// zero-bias diagrams when the linear-drop fast path is on)
class TwoPathEngine {
public:
    TwoPathEngine(const DeviceStack& stack, const TransportOptions& opt)
        : stack_(stack), opt_(opt), split_(fermi_split_nm(stack)) {
        grid_rtd_ = discretize(stack, opt.scf.grid_spacing_nm);
        grid_qd_ = grid_rtd_;
        apply_insert_materials(grid_qd_);
        if (opt_.fast_potential) {
            base_rtd_ = solve(grid_rtd_, 0.0, 0.0);
            base_qd_ = opt_.per_path_scf ? solve(grid_qd_, 0.0, 0.0) : base_rtd_;
        }
    }

    TwoPathResult at(double bias_V, const QDChargeState& state) {
        const double sheet = state.sheet_number_cm2();
        const double f = stack_.qd_sheet.area_fraction;

        BandDiagram d_rtd = diagram(grid_rtd_, base_rtd_, bias_V, sheet);
        BandDiagram d_qd = opt_.per_path_scf
                               ? diagram(grid_qd_, base_qd_, bias_V, sheet)
                               : d_rtd;
        if (!opt_.per_path_scf) apply_insert_profile(d_qd.profile);

        TwoPathResult r;
        r.path_rtd_A = path_current(d_rtd, bias_V, (1.0 - f) * stack_.area_um2);
        r.path_qd_A = path_current(d_qd, bias_V, f * stack_.area_um2);
        if (opt_.supply_blocking)
            r.path_qd_A *= std::max(0.0, 1.0 - state.occupancy / state.electrons_per_dot_max);
        auto clamp0 = [&](double i) { return std::abs(i) < opt_.current_floor_A ? 0.0 : i; };
        r.path_rtd_A = clamp0(r.path_rtd_A);
        r.path_qd_A = clamp0(r.path_qd_A);
        r.total_A = clamp0(r.path_rtd_A + r.path_qd_A);
        return r;
    }

private:
    // the through-dot path's equivalent well: either a literal InAs slab at the
    // sheet plane, or the double-barrier well lowered by the slab's depth spread
    // over the whole well layer (keeps the barriers symmetric, so the lowered
    // resonance keeps its near-unity peak transmission)
    struct Insert {
        double z0_nm = 0.0, z1_nm = 0.0;
        double depth_eV = 0.0;
        bool inas_mass = false;
    };

    Insert insert_spec() const {
        if (opt_.qd_well_placement == QDWellPlacement::at_sheet) {
            const double z0 = stack_.qd_position_nm();
            return {z0, z0 + stack_.qd_sheet.well_thickness_nm, opt_.inas_well_depth_eV, true};
        }
        for (int i = 0; i < static_cast<int>(stack_.layers.size()); ++i)
            if (stack_.layers[static_cast<std::size_t>(i)].role_tag == "well") {
                const double z0 = stack_.layer_start_nm(i);
                const double t = stack_.layers[static_cast<std::size_t>(i)].thickness_nm;
                const double scale = std::min(1.0, stack_.qd_sheet.well_thickness_nm / t);
                return {z0, z0 + t, opt_.inas_well_depth_eV * scale, false};
            }
        throw config_error("stack has no layer tagged 'well' for the equivalent-well insert");
    }

    // dots locally intermix with the emitter-side barrier: the dot path sees it
    // lowered by qd_barrier_delta_eV, which keeps its resonance coupled to the
    // emitter (returns {0,0} when the stack has no barrier layers)
    std::pair<double, double> emitter_barrier_range() const {
        for (int i = 0; i < static_cast<int>(stack_.layers.size()); ++i)
            if (stack_.layers[static_cast<std::size_t>(i)].role_tag == "barrier") {
                const double b0 = stack_.layer_start_nm(i);
                return {b0, b0 + stack_.layers[static_cast<std::size_t>(i)].thickness_nm};
            }
        return {0.0, 0.0};
    }

    void apply_insert_materials(Grid& g) const {
        const Insert ins = insert_spec();
        const auto [b0, b1] = emitter_barrier_range();
        const MaterialParams inas = get_material("InAs", stack_.temperature_K);
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            const double zi = g.node_positions_nm[i];
            if (zi > ins.z0_nm - 1e-9 && zi < ins.z1_nm - 1e-9) {
                MaterialParams m = ins.inas_mass ? inas : g.node_material[i];
                m.cb_offset_eV = g.node_material[i].cb_offset_eV + ins.depth_eV;
                g.node_material[i] = m;
            }
            if (zi > b0 - 1e-9 && zi < b1 - 1e-9)
                g.node_material[i].cb_offset_eV += opt_.qd_barrier_delta_eV;
        }
    }

    void apply_insert_profile(PotentialProfile& p) const {
        const Insert ins = insert_spec();
        const auto [b0, b1] = emitter_barrier_range();
        const MaterialParams inas = get_material("InAs", stack_.temperature_K);
        for (std::size_t i = 0; i + 1 < p.positions_nm.size(); ++i) {
            const double zi = p.positions_nm[i];
            if (zi > ins.z0_nm - 1e-9 && zi < ins.z1_nm - 1e-9) {
                p.potential_eV[i] += ins.depth_eV;
                if (ins.inas_mass) p.m_eff_per_node[i] = inas.m_eff;
            }
            if (zi > b0 - 1e-9 && zi < b1 - 1e-9)
                p.potential_eV[i] += opt_.qd_barrier_delta_eV;
        }
    }

    BandDiagram solve(const Grid& g, double bias, double sheet) const {
        return self_consistent_on_grid(g, bias, sheet, split_, opt_.scf);
    }

    BandDiagram diagram(const Grid& g, const BandDiagram& base, double bias, double sheet) const {
        if (!opt_.fast_potential) return solve(g, bias, sheet);
        // linear-drop fallback: ramp the zero-bias solution between the contacts
        BandDiagram d = base;
        const auto [za, zb] = ramp_range();
        for (std::size_t i = 0; i < d.profile.positions_nm.size(); ++i) {
            const double z = d.profile.positions_nm[i];
            const double w = z <= za ? 1.0 : (z >= zb ? 0.0 : (zb - z) / (zb - za));
            d.potential_V[i] += bias * w;
            d.profile.potential_eV[i] -= bias * w;
        }
        d.fermi_top_eV = -bias;
        d.fermi_bottom_eV = 0.0;
        return d;
    }

    std::pair<double, double> ramp_range() const {
        // inner edges of the two contacts
        double za = 0.0, zb = stack_.total_thickness_nm();
        for (int i = 0; i < static_cast<int>(stack_.layers.size()); ++i) {
            if (stack_.layers[static_cast<std::size_t>(i)].role_tag != "contact") continue;
            const double s = stack_.layer_start_nm(i);
            const double e = s + stack_.layers[static_cast<std::size_t>(i)].thickness_nm;
            if (s == 0.0)
                za = e;
            else {
                zb = s;
                break;
            }
        }
        return {za, zb};
    }

    // Coherent-transport region: only the neighborhood of the double barrier is
    // treated as one tunneling problem; the thick absorber/contact regions act
    // as incoherent reservoirs that carry the contact quasi-Fermi levels. The
    // emitter reservoir (accumulation layer) extends right up to the barrier
    // face, so the window starts at the emitter-side barrier and runs through
    // the end of the spacer layer on the collector side.
    std::pair<double, double> coherent_window(bool top_is_emitter) const {
        int first_b = -1, last_b = -1;
        const int n = static_cast<int>(stack_.layers.size());
        for (int i = 0; i < n; ++i)
            if (stack_.layers[static_cast<std::size_t>(i)].role_tag == "barrier") {
                if (first_b < 0) first_b = i;
                last_b = i;
            }
        if (first_b < 0)
            return {-1e300, 1e300};  // no barriers: keep the full profile
        double left, right;
        if (top_is_emitter) {
            left = stack_.layer_start_nm(first_b);
            const int ri = last_b + 1 < n ? last_b + 1 : last_b;
            right = stack_.layer_start_nm(ri) +
                    stack_.layers[static_cast<std::size_t>(ri)].thickness_nm;
        } else {
            const int li = first_b > 0 ? first_b - 1 : first_b;
            left = stack_.layer_start_nm(li);
            right = stack_.layer_start_nm(last_b) +
                    stack_.layers[static_cast<std::size_t>(last_b)].thickness_nm;
        }
        return {left, right};
    }

    // The reservoirs are the contacts: the window is flanked by flat leads at
    // the contact band edges, so resonance alignment is measured against the
    // (charge-insensitive) contact edge while reflections inside the window —
    // including the short spacer hump next to the barriers — stay coherent.
    BandDiagram sliced(const BandDiagram& d) const {
        const auto [wl, wr] = coherent_window(d.fermi_top_eV >= d.fermi_bottom_eV);
        const auto& z = d.profile.positions_nm;
        if (wl <= z.front() && wr >= z.back()) return d;
        std::size_t i0 = 0, i1 = z.size() - 1;
        while (i0 + 1 < z.size() && z[i0 + 1] <= wl + 1e-9) ++i0;
        while (i1 > 0 && z[i1 - 1] >= wr - 1e-9) --i1;
        BandDiagram s = d;
        auto cut = [&](std::vector<double>& v, double front, double back) {
            std::vector<double> out;
            out.reserve(i1 - i0 + 3);
            out.push_back(front);
            out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(i0),
                       v.begin() + static_cast<std::ptrdiff_t>(i1 + 1));
            out.push_back(back);
            v = std::move(out);
        };
        const double lead_nm = 5.0;
        cut(s.profile.positions_nm, z[i0] - lead_nm, z[i1] + lead_nm);
        cut(s.profile.potential_eV, d.profile.potential_eV.front(),
            d.profile.potential_eV.back());
        cut(s.profile.m_eff_per_node, d.profile.m_eff_per_node.front(),
            d.profile.m_eff_per_node.back());
        cut(s.potential_V, d.potential_V.front(), d.potential_V.back());
        cut(s.electron_cm3, d.electron_cm3.front(), d.electron_cm3.back());
        return s;
    }

    double path_current(const BandDiagram& full, double bias, double area_um2) {
        const BandDiagram d = sliced(full);
        const double kT = kB_eVK * stack_.temperature_K;
        const double ef_em = std::max(d.fermi_top_eV, d.fermi_bottom_eV);
        const double ef_col = std::min(d.fermi_top_eV, d.fermi_bottom_eV);
        const double e_lo =
            std::max(d.profile.potential_eV.front(), d.profile.potential_eV.back());
        // same relative supply cutoff as tsu_esaki_current, plus a tail margin
        double e_hi =
            std::max(ef_em, e_lo) + kT * std::log(1.0 / opt_.supply_cutoff) + 10.0 * kT;
        e_hi = std::max(e_hi, e_lo + 0.05);

        std::vector<double> grid;
        const int n = std::max(2, static_cast<int>(std::ceil((e_hi - e_lo) / opt_.energy_step_eV)));
        grid.reserve(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) grid.push_back(e_lo + (e_hi - e_lo) * i / n);

        TransmissionSpectrum spec = transmission(d.profile, grid, opt_.refine);
        if (bias == 0.0) return 0.0;
        return tsu_esaki_current(d, spec, bias, area_um2, stack_.temperature_K,
                                 opt_.supply_cutoff);
    }

    DeviceStack stack_;
    TransportOptions opt_;
    double split_;
    Grid grid_rtd_, grid_qd_;
    BandDiagram base_rtd_, base_qd_;  // only populated in fast mode
};

} // namespace

TwoPathResult two_path_current(const DeviceStack& stack, double bias_V,
                               const QDChargeState& qd_state, const TransportOptions& options) {
    TwoPathEngine engine(stack, options);
    return engine.at(bias_V, qd_state);
}

IVCurve iv_sweep(const DeviceStack& stack, const SweepProtocol& protocol,
                 const TransportOptions& options) {
    protocol.validate();
    options.rates.validate();

    IVCurve curve;
    curve.sweep_meta.direction = protocol.sweep_end_V < protocol.sweep_start_V ? "reverse"
                                                                               : "forward";
    curve.sweep_meta.former_bias_V = protocol.former_bias_V;
    curve.sweep_meta.hold_duration_s = protocol.hold_duration_s;
    curve.sweep_meta.photon_rate_per_s_um2 = protocol.photon_rate_per_s_um2;
    curve.sweep_meta.temperature_K = stack.temperature_K;
    curve.sweep_meta.seed = protocol.seed;

    QDChargeState state = equilibrium_charge(protocol.former_bias_V, protocol.hold_duration_s,
                                             options.rates, stack.qd_sheet);

    // per-dot hole capture rate under illumination (mean-field)
    const double n_dots = stack.qd_sheet.areal_density_cm2 * stack.area_um2 * 1e-8;
    const double device_capture_rate = protocol.photon_rate_per_s_um2 * stack.area_um2 *
                                       options.rates.absorption_efficiency *
                                       options.rates.capture_efficiency;
    const double per_dot_rate = n_dots > 0.0 ? device_capture_rate / n_dots : 0.0;

    TwoPathEngine engine(stack, options);
    for (double bias : protocol.bias_points()) {
        const double recharge = std::max(0.0, bias) * options.rates.charge_rate_per_V_s;
        state = evolve_charge(state, protocol.dwell_s_per_step, per_dot_rate, options.rates,
                              recharge);
        TwoPathResult r;
        try {
            r = engine.at(bias, state);
        } catch (const convergence_error& e) {
            throw convergence_error("sweep aborted at bias " + std::to_string(bias) + " V (" +
                                        std::to_string(curve.points.size()) +
                                        " points completed): " + e.what(),
                                    e.residual_history);
        }
        curve.points.push_back({bias, r.total_A, state.occupancy, r.path_rtd_A, r.path_qd_A});
    }
    return curve;
}

PeakSet detect_peaks(const IVCurve& curve, double prominence_floor_rel) {
    PeakSet set;
    const auto& pts = curve.points;
    if (pts.size() < 3) return set;

    double imax = 0.0;
    for (const auto& p : pts) imax = std::max(imax, std::abs(p.current_A));
    if (imax == 0.0) return set;
    const double floor_abs = prominence_floor_rel * imax;

    auto mag = [&](std::size_t i) { return std::abs(pts[i].current_A); };
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (!(mag(i) > mag(i - 1) && mag(i) > mag(i + 1))) continue;
        // topographic prominence: drop to the higher of the two key saddles
        double lmin = mag(i), rmin = mag(i);
        for (std::size_t j = i; j-- > 0;) {
            lmin = std::min(lmin, mag(j));
            if (mag(j) > mag(i)) break;
        }
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            rmin = std::min(rmin, mag(j));
            if (mag(j) > mag(i)) break;
        }
        if (mag(i) - std::max(lmin, rmin) < floor_abs) continue;
        set.peaks.push_back({pts[i].bias_V, pts[i].current_A, '-'});
    }

    // labels: A, B by ascending |V| on the reverse branch; C = main forward peak
    std::vector<Peak*> reverse_peaks, forward_peaks;
    for (auto& p : set.peaks)
        (p.bias_V < 0.0 ? reverse_peaks : forward_peaks).push_back(&p);
    std::sort(reverse_peaks.begin(), reverse_peaks.end(),
              [](const Peak* a, const Peak* b) { return std::abs(a->bias_V) < std::abs(b->bias_V); });
    if (!reverse_peaks.empty()) reverse_peaks[0]->label = 'A';
    if (reverse_peaks.size() > 1) reverse_peaks[1]->label = 'B';
    if (!forward_peaks.empty()) {
        Peak* main = forward_peaks[0];
        for (Peak* p : forward_peaks)
            if (std::abs(p->current_A) > std::abs(main->current_A)) main = p;
        main->label = 'C';
    }
    return set;
}

std::vector<IVCurve> photoresponse_sweep(const DeviceStack& stack,
                                         const SweepProtocol& base_protocol,
                                         const std::vector<double>& photon_rates_per_s_um2,
                                         const TransportOptions& options) {
    std::vector<IVCurve> family;
    family.reserve(photon_rates_per_s_um2.size());
    for (std::size_t i = 0; i < photon_rates_per_s_um2.size(); ++i) {
        SweepProtocol p = base_protocol;
        p.photon_rate_per_s_um2 = photon_rates_per_s_um2[i];
        p.seed = splitmix64(base_protocol.seed + i);
        family.push_back(iv_sweep(stack, p, options));
    }
    return family;
}

} // namespace qdrtd
