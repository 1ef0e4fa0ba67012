#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qdrtd/errors.hpp"
#include "qdrtd/io.hpp"
#include "qdrtd/stack_config.hpp"

#include <cstdio>
#include <string>

using namespace qdrtd;

namespace {
void check_stacks_equal(const DeviceStack& a, const DeviceStack& b) {
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        CHECK(a.layers[i].material == b.layers[i].material);
        CHECK(a.layers[i].thickness_nm == b.layers[i].thickness_nm);
        CHECK(a.layers[i].doping_start_cm3 == b.layers[i].doping_start_cm3);
        CHECK(a.layers[i].doping_end_cm3 == b.layers[i].doping_end_cm3);
        CHECK(a.layers[i].role_tag == b.layers[i].role_tag);
    }
    CHECK(a.qd_sheet.areal_density_cm2 == b.qd_sheet.areal_density_cm2);
    CHECK(a.qd_sheet.position_layer_index == b.qd_sheet.position_layer_index);
    CHECK(a.qd_sheet.electrons_per_dot_max == b.qd_sheet.electrons_per_dot_max);
    CHECK(a.qd_sheet.well_thickness_nm == b.qd_sheet.well_thickness_nm);
    CHECK(a.qd_sheet.area_fraction == b.qd_sheet.area_fraction);
    CHECK(a.area_um2 == b.area_um2);
    CHECK(a.temperature_K == b.temperature_K);
}
} // namespace

TEST_CASE("stack config: canonical dump of the reference stack round-trips") {
    const DeviceStack ref = build_reference_stack();
    const std::string canonical = write_stack_config(ref);
    const DeviceStack parsed = parse_stack_config(canonical);
    check_stacks_equal(ref, parsed);
    // writer of the parsed stack reproduces the canonical text bit-exactly
    CHECK(write_stack_config(parsed) == canonical);
}

TEST_CASE("stack config: builtin source") {
    const DeviceStack s = load_stack("reference");
    CHECK(s.layers.size() == 12);
    CHECK(s.qd_sheet.areal_density_cm2 == doctest::Approx(5.7e10));
}

TEST_CASE("stack config: parse errors cite the line") {
    CHECK_THROWS_WITH_AS(parse_stack_config("GaAs -5 1e18\n"),
                         doctest::Contains("line 1"), config_error);
    CHECK_THROWS_WITH_AS(parse_stack_config("# header\nGaAs 10 1e18\nGaAs 5 -1e17\n"),
                         doctest::Contains("line 3"), config_error);
    CHECK_THROWS_AS(parse_stack_config("GaAs ten 1e18\n"), config_error);
    CHECK_THROWS_AS(parse_stack_config("@bogus 1\nGaAs 10 0\n"), config_error);
    CHECK_THROWS_AS(parse_stack_config("@qd 5.7e10 9 6 2 0.25\nGaAs 10 0\nGaAs 10 0\n"),
                    config_error);
    CHECK_THROWS_AS(parse_stack_config("# nothing but comments\n"), config_error);
}

TEST_CASE("stack config: comments, grading, missing dots") {
    const std::string text =
        "@area_um2 5\n@temperature_K 77\n"
        "GaAs 50 2e18 contact  # top\n"
        "GaAs 430 1e16:1e18 graded\n"
        "GaAs 50 2e18 contact\n";
    const DeviceStack s = parse_stack_config(text);
    REQUIRE(s.layers.size() == 3);
    CHECK(s.layers[1].doping_start_cm3 == 1e16);
    CHECK(s.layers[1].doping_end_cm3 == 1e18);
    CHECK(s.qd_sheet.areal_density_cm2 == 0.0);  // no @qd: dot-free device
    CHECK(write_stack_config(parse_stack_config(write_stack_config(s))) ==
          write_stack_config(s));
}

TEST_CASE("number formatting is shortest round-trip and deterministic") {
    for (double v : {0.0, 1.0, -2.3, 5.7e10, 1e-18, 0.056533, 77.0}) {
        const std::string s = io::format_number(v);
        CHECK(std::stod(s) == v);
        CHECK(io::format_number(v) == s);
    }
    CHECK(io::format_number(5.7e10) == "5.7e+10");
}

TEST_CASE("CSV writers emit documented headers") {
    PotentialProfile p;
    p.positions_nm = {0.0, 1.0, 2.0};
    p.potential_eV = {0.0, 1.05, 0.0};
    p.m_eff_per_node = {0.067, 0.15, 0.067};
    CHECK(io::csv_profile(p).rfind("position_nm,potential_eV,m_eff\n", 0) == 0);

    TransmissionSpectrum t;
    t.energies_eV = {0.1, 0.2};
    t.transmission = {0.5, 0.6};
    const std::string csv = io::csv_spectrum(t);
    CHECK(csv.find("energy_eV,T\n") != std::string::npos);
    CHECK(csv.find("0.1,0.5\n") != std::string::npos);

    IVCurve c;
    c.sweep_meta.direction = "reverse";
    c.points.push_back({-1.0, 2e-9, 0.5, 1.5e-9, 5e-10});
    const std::string ivcsv = io::csv_iv(c);
    CHECK(ivcsv.find("bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A\n") !=
          std::string::npos);
    CHECK(ivcsv.find("# direction=reverse\n") != std::string::npos);

    PeakSet ps;
    ps.peaks.push_back({-1.7, 1e-9, 'A'});
    CHECK(io::csv_peaks(ps).find("A,-1.7,1e-09\n") != std::string::npos);

    CHECK(io::csv_materials(77.0).rfind("name,T,cb_offset_eV,m_eff,eps_rel,band_gap_eV\n", 0) ==
          0);
}

TEST_CASE("multiplication report block") {
    const auto r = multiplication_factor(10e-9, 115.0, 0.02);
    const std::string rep = io::report_multiplication(r);
    CHECK(rep.find("M_external") != std::string::npos);
    CHECK(rep.find("M_internal") != std::string::npos);
    CHECK(rep.find("1e7") != std::string::npos);
}

TEST_CASE("file round trip and errors") {
    const std::string path = "io_test_roundtrip.tmp";
    io::write_file(path, "hello\n");
    CHECK(io::read_file(path) == "hello\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(io::read_file("does/not/exist"), io_error);
    CHECK_THROWS_AS(io::write_file("no/such/dir/file", "x"), io_error);
}

TEST_CASE("svg plot smoke") {
    const std::string svg =
        io::svg_plot({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}, "bias_V", "current_A", "sweep");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK_THROWS_AS(io::svg_plot({}, {}, "x", "y", "t"), io_error);
}
