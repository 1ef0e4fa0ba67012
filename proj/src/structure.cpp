#include "qdrtd/structure.hpp"
#include "qdrtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qdrtd {

double DeviceStack::total_thickness_nm() const {
    double t = 0.0;
    for (const auto& l : layers) t += l.thickness_nm;
    return t;
}

double DeviceStack::layer_start_nm(int i) const {
    double t = 0.0;
    for (int k = 0; k < i; ++k) t += layers[static_cast<std::size_t>(k)].thickness_nm;
    return t;
}

double DeviceStack::qd_position_nm() const {
    return layer_start_nm(qd_sheet.position_layer_index);
}

double monolayers_to_nm(double n_ml, const std::string& material) {
    if (n_ml < 0.0) throw config_error("monolayer count must be non-negative");
    return n_ml * lattice_constant_nm(material) / 2.0;
}

DeviceStack build_reference_stack() {
    const double barrier_nm = monolayers_to_nm(11, "AlAs");

    DeviceStack s;
    s.layers = {
        {"GaAs", 50.0, 2e18, 2e18, "contact"},    // top contact, emitter in reverse bias
        {"GaAs", 150.0, 0.0, 0.0, "absorber"},
        {"GaAs", 10.0, 0.0, 0.0, "cap"},          // QD sheet sits on top of this layer
        {"GaAs", 2.0, 0.0, 0.0, "spacer"},
        {"AlAs", barrier_nm, 0.0, 0.0, "barrier"},
        {"GaAs", 8.0, 0.0, 0.0, "well"},
        {"AlAs", barrier_nm, 0.0, 0.0, "barrier"},
        {"GaAs", 20.0, 0.0, 0.0, "spacer"},
        {"GaAs", 430.0, 1e16, 1e18, "contact"},   // graded bottom contact
        {"AlAs", 15.0, 0.0, 0.0, "etch_stop"},
        {"GaAs", 400.0, 0.0, 0.0, "buffer"},
        {"GaAs", 350000.0, 0.0, 0.0, "substrate"},
    };

    QDSheet qd;
    qd.areal_density_cm2 = 5.7e10;
    qd.position_layer_index = 2;
    qd.electrons_per_dot_max = 6.0;
    qd.well_thickness_nm = 2.0;
    // mean dot footprint: 24 nm lateral diameter
    const double footprint_cm2 = std::numbers::pi * 12e-7 * 12e-7;
    qd.area_fraction = qd.areal_density_cm2 * footprint_cm2;
    s.qd_sheet = qd;

    s.area_um2 = 5.0;       // 1 um x 5 um cross-wire intersection
    s.temperature_K = 77.0;
    return s;
}

std::pair<double, double> default_window(const DeviceStack& stack) {
    int last_contact = -1;
    for (int i = 0; i < static_cast<int>(stack.layers.size()); ++i)
        if (stack.layers[static_cast<std::size_t>(i)].role_tag == "contact") last_contact = i;
    if (last_contact < 0)
        return {0.0, stack.total_thickness_nm()};
    return {0.0, stack.layer_start_nm(last_contact) +
                     stack.layers[static_cast<std::size_t>(last_contact)].thickness_nm};
}

namespace {

int layer_at(const DeviceStack& stack, double z_nm) {
    double t = 0.0;
    for (int i = 0; i < static_cast<int>(stack.layers.size()); ++i) {
        t += stack.layers[static_cast<std::size_t>(i)].thickness_nm;
        if (z_nm < t) return i;
    }
    return static_cast<int>(stack.layers.size()) - 1;
}

double doping_at(const DeviceStack& stack, int layer_idx, double z_nm) {
    const Layer& l = stack.layers[static_cast<std::size_t>(layer_idx)];
    const double z0 = stack.layer_start_nm(layer_idx);
    const double frac = std::clamp((z_nm - z0) / l.thickness_nm, 0.0, 1.0);
    return l.doping_start_cm3 + frac * (l.doping_end_cm3 - l.doping_start_cm3);
}

} // namespace

Grid discretize(const DeviceStack& stack, double max_spacing_nm,
                std::optional<std::pair<double, double>> window) {
    if (!(max_spacing_nm > 0.0)) throw config_error("max_spacing_nm must be positive");
    const double total = stack.total_thickness_nm();
    const auto [w0, w1] = window.value_or(default_window(stack));
    if (w0 < 0.0 || w1 > total || !(w0 < w1))
        throw config_error("window [" + std::to_string(w0) + ", " + std::to_string(w1) +
                           "] nm outside stack [0, " + std::to_string(total) + "] nm");

    // breakpoints: window edges, layer interfaces, QD sheet plane, equivalent-well bottom
    std::vector<double> breaks = {w0, w1};
    double t = 0.0;
    for (const auto& l : stack.layers) {
        t += l.thickness_nm;
        if (t > w0 && t < w1) breaks.push_back(t);
    }
    const double zqd = stack.qd_position_nm();
    for (double z : {zqd, zqd + stack.qd_sheet.well_thickness_nm})
        if (z > w0 && z < w1) breaks.push_back(z);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 breaks.end());

    Grid g;
    g.temperature_K = stack.temperature_K;
    g.node_positions_nm.push_back(breaks.front());
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const double len = breaks[b + 1] - breaks[b];
        const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing_nm - 1e-12)));
        for (int i = 1; i <= n; ++i)
            g.node_positions_nm.push_back(breaks[b] + len * i / n);
        g.node_positions_nm.back() = breaks[b + 1];  // exact interface position
    }

    const std::size_t n = g.node_positions_nm.size();
    g.node_material.resize(n);
    g.node_doping_cm3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // material of the interval to the node's right (last node: left interval)
        const double mid = (i + 1 < n)
            ? 0.5 * (g.node_positions_nm[i] + g.node_positions_nm[i + 1])
            : 0.5 * (g.node_positions_nm[i - 1] + g.node_positions_nm[i]);
        const int li = layer_at(stack, mid);
        g.node_material[i] =
            get_material(stack.layers[static_cast<std::size_t>(li)].material, stack.temperature_K);
        g.node_doping_cm3[i] = doping_at(stack, li, g.node_positions_nm[i]);
    }

    g.qd_node_index = -1;
    if (zqd >= w0 && zqd <= w1) {
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(g.node_positions_nm[i] - zqd) < 1e-9) {
                g.qd_node_index = static_cast<long>(i);
                break;
            }
    }
    return g;
}

} // namespace qdrtd
