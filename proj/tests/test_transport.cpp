#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qdrtd/constants.hpp"
#include "qdrtd/electrostatics.hpp"
#include "qdrtd/errors.hpp"
#include "qdrtd/transport.hpp"

#include <cmath>
#include <numbers>

using namespace qdrtd;

namespace {

// flat-band two-lead diagram for exercising the current integral in isolation
BandDiagram flat_diagram(double ef_top, double ef_bottom, double m_eff = 0.067) {
    BandDiagram d;
    d.profile.positions_nm = {0.0, 10.0};
    d.profile.potential_eV = {0.0, 0.0};
    d.profile.m_eff_per_node = {m_eff, m_eff};
    d.fermi_top_eV = ef_top;
    d.fermi_bottom_eV = ef_bottom;
    return d;
}

double lorentzian_T(double e) {
    const double x = (e - 0.08) / 0.02;
    return 0.3 / (1.0 + x * x) + 0.05;
}

// independent Tsu-Esaki oracle: SI units throughout, hard-coded CODATA values,
// Simpson rule on the closed-form transmission
double tsu_esaki_oracle(double ef_em_eV, double ef_col_eV, double m_rel, double area_um2,
                        double T_K, double e_max_eV) {
    const double q = 1.602176634e-19, m0 = 9.1093837015e-31;
    const double kB = 1.380649e-23, hbar = 1.054571817e-34;
    const double kT = kB * T_K;
    auto supply = [&](double E_J) {
        return std::log1p(std::exp((ef_em_eV * q - E_J) / kT)) -
               std::log1p(std::exp((ef_col_eV * q - E_J) / kT));
    };
    const int n = 60000;
    const double h = e_max_eV * q / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double E = i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * lorentzian_T(E / q) * supply(E);
    }
    const double integral = s * h / 3.0;
    const double pref = q * m_rel * m0 * kT /
                        (2.0 * std::numbers::pi * std::numbers::pi * hbar * hbar * hbar);
    return area_um2 * 1e-12 * pref * integral;
}

TransmissionSpectrum lorentzian_spectrum(double e_max, std::size_t n_points) {
    TransmissionSpectrum s;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double e = e_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
        s.energies_eV.push_back(e);
        s.transmission.push_back(lorentzian_T(e));
    }
    return s;
}

// compact symmetric double-barrier device for device-level tests: 2 nm AlAs
// barriers around a 5 nm GaAs well, degenerate 1e18 contacts
DeviceStack small_stack(double area_fraction, double dot_density_cm2 = 1e11) {
    DeviceStack s;
    s.layers = {
        {"GaAs", 20.0, 1e18, 1e18, "contact"},
        {"GaAs", 5.0, 0.0, 0.0, "spacer"},
        {"AlAs", 2.0, 0.0, 0.0, "barrier"},
        {"GaAs", 5.0, 0.0, 0.0, "well"},
        {"AlAs", 2.0, 0.0, 0.0, "barrier"},
        {"GaAs", 5.0, 0.0, 0.0, "spacer"},
        {"GaAs", 20.0, 1e18, 1e18, "contact"},
    };
    s.qd_sheet.areal_density_cm2 = dot_density_cm2;
    s.qd_sheet.position_layer_index = 1;  // sheet at the top spacer interface
    s.qd_sheet.electrons_per_dot_max = 6.0;
    s.qd_sheet.well_thickness_nm = 5.0;
    s.qd_sheet.area_fraction = area_fraction;
    s.area_um2 = 5.0;
    s.temperature_K = 77.0;
    return s;
}

} // namespace

TEST_CASE("current integral: zero bias, sign, and area linearity") {
    const BandDiagram d = flat_diagram(-0.06, 0.04);
    const auto spec = lorentzian_spectrum(0.6, 6001);
    CHECK(tsu_esaki_current(d, spec, 0.0, 5.0, 77.0) == 0.0);
    const double i1 = tsu_esaki_current(d, spec, 0.1, 5.0, 77.0);
    const double i2 = tsu_esaki_current(d, spec, 0.1, 10.0, 77.0);
    const double im = tsu_esaki_current(d, spec, -0.1, 5.0, 77.0);
    CHECK(i1 > 0.0);
    CHECK(i2 == doctest::Approx(2.0 * i1).epsilon(1e-12));
    CHECK(im == doctest::Approx(-i1).epsilon(1e-12));
}

TEST_CASE("current integral matches an independent SI-unit quadrature") {
    const BandDiagram d = flat_diagram(-0.06, 0.04);
    const auto spec = lorentzian_spectrum(0.6, 24001);
    const double got = tsu_esaki_current(d, spec, 0.1, 5.0, 77.0);
    const double ref = tsu_esaki_oracle(0.04, -0.06, 0.067, 5.0, 77.0, 0.6);
    CHECK(got == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("current integral: coverage and input guards") {
    const BandDiagram d = flat_diagram(-0.06, 0.04);
    CHECK_THROWS_AS(tsu_esaki_current(d, {}, 0.1, 5.0, 77.0), config_error);
    // a spectrum stopping at 0.1 eV misses most of the thermal tail
    const auto narrow = lorentzian_spectrum(0.1, 2001);
    try {
        tsu_esaki_current(d, narrow, 0.1, 5.0, 77.0);
        FAIL("expected coverage_error");
    } catch (const coverage_error& e) {
        CHECK(e.missing_from == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(e.missing_to > 0.1);
    }
}

TEST_CASE("adaptive spectrum agrees with a much denser uniform grid") {
    const DeviceStack s = small_stack(0.0);
    const BandDiagram d = self_consistent_band_diagram(s, 0.3, 0.0);

    const double e_lo = std::max(d.profile.potential_eV.front(), d.profile.potential_eV.back());
    auto make_grid = [&](double step) {
        std::vector<double> g;
        const int n = static_cast<int>(std::ceil(0.4 / step));
        for (int i = 0; i <= n; ++i) g.push_back(e_lo + 0.4 * i / n);
        return g;
    };
    RefinePolicy off;
    off.enabled = false;
    const auto adaptive = transmission(d.profile, make_grid(1e-3));
    const auto dense = transmission(d.profile, make_grid(5e-5), off);
    const double ia = tsu_esaki_current(d, adaptive, 0.3, 5.0, 77.0);
    const double id = tsu_esaki_current(d, dense, 0.3, 5.0, 77.0);
    CHECK(ia == doctest::Approx(id).epsilon(5e-3));
    CHECK(adaptive.energies_eV.size() < dense.energies_eV.size());
}

TEST_CASE("double-barrier device shows negative differential resistance") {
    const DeviceStack s = small_stack(0.0);
    TransportOptions opt;
    opt.fast_potential = true;
    const QDChargeState state = QDChargeState::make(s.qd_sheet, 0.0);

    std::vector<double> currents;
    for (int i = 1; i <= 12; ++i)
        currents.push_back(two_path_current(s, 0.05 * i, state, opt).total_A);

    std::size_t ipk = 0;
    for (std::size_t i = 0; i < currents.size(); ++i)
        if (currents[i] > currents[ipk]) ipk = i;
    REQUIRE(ipk > 0);
    REQUIRE(ipk + 1 < currents.size());
    double after_min = currents[ipk];
    for (std::size_t i = ipk + 1; i < currents.size(); ++i)
        after_min = std::min(after_min, currents[i]);
    CHECK(after_min < 0.8 * currents[ipk]);  // a real valley, not noise
}

TEST_CASE("symmetric device: current is antisymmetric in bias") {
    const DeviceStack s = small_stack(0.0);
    TransportOptions opt;
    opt.fast_potential = true;
    const QDChargeState state = QDChargeState::make(s.qd_sheet, 0.0);
    for (double v : {0.1, 0.3}) {
        const double ip = two_path_current(s, v, state, opt).total_A;
        const double in = two_path_current(s, -v, state, opt).total_A;
        CHECK(in == doctest::Approx(-ip).epsilon(2e-3));
    }
}

TEST_CASE("two-path split: weights, blocking, and bookkeeping") {
    const DeviceStack s = small_stack(0.1);
    TransportOptions opt;
    opt.fast_potential = true;

    const auto empty = two_path_current(s, 0.3, QDChargeState::make(s.qd_sheet, 0.0), opt);
    CHECK(empty.path_qd_A != 0.0);
    CHECK(empty.total_A == doctest::Approx(empty.path_rtd_A + empty.path_qd_A).epsilon(1e-12));

    // full dots block the through-dot channel entirely
    const auto full = two_path_current(s, 0.3, QDChargeState::make(s.qd_sheet, 6.0), opt);
    CHECK(full.path_qd_A == 0.0);
    CHECK(full.path_rtd_A == doctest::Approx(empty.path_rtd_A).epsilon(1e-12));

    // half-full dots: half the supply
    const auto half = two_path_current(s, 0.3, QDChargeState::make(s.qd_sheet, 3.0), opt);
    CHECK(half.path_qd_A == doctest::Approx(0.5 * empty.path_qd_A).epsilon(1e-12));

    // a dot-free device carries no through-dot current at all
    const auto none = two_path_current(small_stack(0.0), 0.3,
                                       QDChargeState::make(s.qd_sheet, 0.0), opt);
    CHECK(none.path_qd_A == 0.0);
}

TEST_CASE("stored dot charge suppresses the through-dot channel electrostatically") {
    const DeviceStack s = small_stack(0.1);
    TransportOptions opt;             // full per-bias electrostatics
    opt.supply_blocking = false;      // isolate the band push-up mechanism
    const auto empty = two_path_current(s, -0.15, QDChargeState::make(s.qd_sheet, 0.0), opt);
    const auto full = two_path_current(s, -0.15, QDChargeState::make(s.qd_sheet, 6.0), opt);
    CHECK(std::abs(full.path_qd_A) < std::abs(empty.path_qd_A));
}

TEST_CASE("peak detection: labels on a synthetic double-peak reverse branch") {
    IVCurve c;
    c.sweep_meta.direction = "reverse";
    for (int i = 0; i <= 80; ++i) {
        const double v = -0.05 * i;
        auto g = [&](double c0, double w) { return std::exp(-std::pow((v - c0) / w, 2)); };
        const double mag = g(-1.7, 0.1) + 0.6 * g(-2.3, 0.12) + 0.01 * std::abs(v) +
                           1e-5 * std::sin(40.0 * v);  // sub-floor ripple must be ignored
        c.points.push_back({v, -mag, 0.0, -mag, 0.0});
    }
    const PeakSet ps = detect_peaks(c);
    REQUIRE(ps.peaks.size() == 2);
    char la = '-', lb = '-';
    for (const auto& p : ps.peaks) {
        if (std::abs(p.bias_V + 1.7) < 0.05) la = p.label;
        if (std::abs(p.bias_V + 2.3) < 0.05) lb = p.label;
    }
    CHECK(la == 'A');
    CHECK(lb == 'B');

    // scale invariance: currents in different units, same peaks
    IVCurve scaled = c;
    for (auto& p : scaled.points) p.current_A *= 1e6;
    const PeakSet ps2 = detect_peaks(scaled);
    REQUIRE(ps2.peaks.size() == 2);
    CHECK(ps2.peaks[0].bias_V == ps.peaks[0].bias_V);
}

TEST_CASE("peak detection: forward branch main peak and degenerate inputs") {
    IVCurve c;
    for (int i = 0; i <= 60; ++i) {
        const double v = 0.05 * i;
        const double mag = std::exp(-std::pow((v - 2.0) / 0.2, 2)) +
                           0.3 * std::exp(-std::pow((v - 1.0) / 0.15, 2)) + 0.01 * v;
        c.points.push_back({v, mag, 0.0, mag, 0.0});
    }
    const PeakSet ps = detect_peaks(c);
    REQUIRE(ps.peaks.size() == 2);
    const Peak* main = nullptr;
    for (const auto& p : ps.peaks)
        if (p.label == 'C') main = &p;
    REQUIRE(main != nullptr);
    CHECK(main->bias_V == doctest::Approx(2.0).epsilon(0.05));

    IVCurve mono;
    for (int i = 0; i <= 20; ++i) mono.points.push_back({0.1 * i, 0.1 * i, 0.0, 0.0, 0.0});
    CHECK(detect_peaks(mono).peaks.empty());
    IVCurve tiny;
    tiny.points.push_back({0.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(detect_peaks(tiny).peaks.empty());
}

TEST_CASE("sweep: protocol metadata and the dark memory effect") {
    const DeviceStack s = small_stack(0.1);
    TransportOptions opt;
    opt.fast_potential = true;

    SweepProtocol dark;
    dark.former_bias_V = 0.0;
    dark.hold_duration_s = 2.0;
    dark.sweep_start_V = 0.0;
    dark.sweep_end_V = -0.3;
    dark.step_V = -0.05;
    dark.dwell_s_per_step = 0.1;

    const IVCurve uncharged = iv_sweep(s, dark, opt);
    CHECK(uncharged.points.size() == 7);
    CHECK(uncharged.sweep_meta.direction == "reverse");
    CHECK(uncharged.sweep_meta.temperature_K == 77.0);
    for (const auto& p : uncharged.points) CHECK(p.qd_occupancy == 0.0);
    CHECK(uncharged.points.front().bias_V == doctest::Approx(0.0));
    CHECK(uncharged.points.back().bias_V == doctest::Approx(-0.3));

    SweepProtocol charged = dark;
    charged.former_bias_V = 2.0;  // forward hold fills the dots first
    const IVCurve with_memory = iv_sweep(s, charged, opt);
    const double hold_x = 2.0 * opt.rates.charge_rate_per_V_s * 2.0;  // bias * charge rate * hold
    const double expect_occ = 6.0 * hold_x / (1.0 + hold_x);
    for (std::size_t i = 0; i < with_memory.points.size(); ++i) {
        // dark reverse sweep: the stored charge persists and throttles the dot path
        CHECK(with_memory.points[i].qd_occupancy == doctest::Approx(expect_occ).epsilon(1e-9));
        CHECK(std::abs(with_memory.points[i].path_qd_A) <=
              std::abs(uncharged.points[i].path_qd_A) + 1e-18);
    }
    CHECK(std::abs(with_memory.points.back().current_A) <
          std::abs(uncharged.points.back().current_A));
}

TEST_CASE("sweep: illumination discharges the dots and restores the current") {
    const DeviceStack s = small_stack(0.1);
    TransportOptions opt;
    opt.fast_potential = true;

    SweepProtocol p;
    p.former_bias_V = 2.0;
    p.hold_duration_s = 2.0;
    p.sweep_start_V = 0.0;
    p.sweep_end_V = -0.3;
    p.step_V = -0.05;
    p.dwell_s_per_step = 0.1;
    p.seed = 7;

    const auto family = photoresponse_sweep(s, p, {0.0, 1e8}, opt);
    REQUIRE(family.size() == 2);
    CHECK(family[0].sweep_meta.photon_rate_per_s_um2 == 0.0);
    CHECK(family[1].sweep_meta.photon_rate_per_s_um2 == 1e8);
    CHECK(family[0].sweep_meta.seed != family[1].sweep_meta.seed);

    const auto& dark = family[0].points;
    const auto& lit = family[1].points;
    CHECK(lit.back().qd_occupancy < dark.back().qd_occupancy);
    CHECK(std::abs(lit.back().current_A) > std::abs(dark.back().current_A));
}

TEST_CASE("sweep: identical inputs give identical outputs") {
    const DeviceStack s = small_stack(0.1);
    TransportOptions opt;
    opt.fast_potential = true;
    SweepProtocol p;
    p.former_bias_V = 1.0;
    p.sweep_start_V = 0.0;
    p.sweep_end_V = -0.2;
    p.step_V = -0.05;
    p.photon_rate_per_s_um2 = 1e7;
    p.seed = 42;
    const IVCurve a = iv_sweep(s, p, opt);
    const IVCurve b = iv_sweep(s, p, opt);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].current_A == b.points[i].current_A);
        CHECK(a.points[i].qd_occupancy == b.points[i].qd_occupancy);
    }
}
