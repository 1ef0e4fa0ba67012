#include "qdrtd/electrostatics.hpp"
#include "qdrtd/constants.hpp"
#include "qdrtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace qdrtd {

using namespace consts;

// ---------------------------------------------------------------- Fermi-Dirac

namespace {

constexpr double kEtaMin = -50.0;
constexpr double kEtaMax = 120.0;
constexpr double kEtaStep = 0.01;

// (2/sqrt(pi)) Int_0^inf sqrt(x)/(1+exp(x-eta)) dx via x = t^2 and Simpson
double fermi_half_quadrature(double eta) {
    const double tmax = std::sqrt(std::max(eta, 0.0) + 60.0);
    const int n = 1024;  // even
    const double h = tmax / n;
    auto f = [eta](double t) {
        const double a = t * t - eta;
        return t * t / (1.0 + std::exp(std::min(a, 700.0)));
    };
    double s = f(0.0) + f(tmax);
    for (int i = 1; i < n; ++i)
        s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return (4.0 / std::sqrt(std::numbers::pi)) * s * h / 3.0;
}

const std::vector<double>& fermi_table() {
    static const std::vector<double> table = [] {
        const int n = static_cast<int>(std::round((kEtaMax - kEtaMin) / kEtaStep)) + 1;
        std::vector<double> t(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            t[static_cast<std::size_t>(i)] = fermi_half_quadrature(kEtaMin + i * kEtaStep);
        return t;
    }();
    return table;
}

double sommerfeld_half(double eta) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return (4.0 / (3.0 * std::sqrt(std::numbers::pi))) * std::pow(eta, 1.5) *
           (1.0 + pi2 / (8.0 * eta * eta) + 7.0 * pi2 * pi2 / (640.0 * std::pow(eta, 4.0)));
}

} // namespace

double fermi_half(double eta) {
    if (eta < kEtaMin) {
        const double e = std::exp(eta);
        return e * (1.0 - e / (2.0 * std::sqrt(2.0)) + e * e / (3.0 * std::sqrt(3.0)));
    }
    if (eta > kEtaMax) return sommerfeld_half(std::min(eta, 1e6));

    const auto& tab = fermi_table();
    const double x = (eta - kEtaMin) / kEtaStep;
    long i = static_cast<long>(x);
    i = std::clamp(i, 1L, static_cast<long>(tab.size()) - 3);
    const double u = x - i;
    // Catmull-Rom through tab[i-1..i+2]
    const double p0 = tab[static_cast<std::size_t>(i - 1)], p1 = tab[static_cast<std::size_t>(i)];
    const double p2 = tab[static_cast<std::size_t>(i + 1)], p3 = tab[static_cast<std::size_t>(i + 2)];
    return p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                          u * (3.0 * (p1 - p2) + p3 - p0)));
}

double fermi_half_deriv(double eta) {
    const double h = 5e-3;
    return (fermi_half(eta + h) - fermi_half(eta - h)) / (2.0 * h);
}

double inverse_fermi_half(double value) {
    if (!(value > 0.0)) throw config_error("inverse_fermi_half: value must be positive");
    double lo = -60.0, hi = 2000.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fermi_half(mid) < value ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double conduction_band_dos_cm3(double m_eff, double temperature_K) {
    const double kT_J = kB_JK * temperature_K;
    const double nc_m3 =
        2.0 * std::pow(2.0 * std::numbers::pi * m_eff * m0_kg * kT_J / (h_Js * h_Js), 1.5);
    return nc_m3 * 1e-6;
}

double neutral_ec_minus_ef(const MaterialParams& mat, double doping_cm3, double temperature_K) {
    if (doping_cm3 < 1.0) return 0.5 * mat.band_gap_eV;  // undoped: midgap pin
    const double nc = conduction_band_dos_cm3(mat.m_eff, temperature_K);
    const double eta = inverse_fermi_half(doping_cm3 / nc);
    return -kB_eVK * temperature_K * eta;
}

std::vector<double> electron_density(const PotentialProfile& profile, double fermi_level_eV,
                                     double temperature_K) {
    if (!(temperature_K > 0.0)) throw config_error("temperature must be positive");
    const double kT = kB_eVK * temperature_K;
    std::vector<double> n(profile.positions_nm.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double nc = conduction_band_dos_cm3(profile.m_eff_per_node[i], temperature_K);
        n[i] = nc * fermi_half((fermi_level_eV - profile.potential_eV[i]) / kT);
    }
    return n;
}

// -------------------------------------------------------------------- Poisson

namespace {

// in-place Thomas solve of a tridiagonal system
void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                  std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw config_error("singular Poisson system (degenerate grid)");
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw config_error("singular Poisson system (degenerate grid)");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

struct PoissonOperator {
    std::vector<double> lower, diag, upper;  // interior rows, [F/m^2]
    std::vector<double> cell_m;              // cell width per interior node [m]
    std::size_t n = 0;
};

PoissonOperator build_operator(const Grid& grid) {
    const std::size_t n = grid.size();
    if (n < 3) throw config_error("grid too small for Poisson solve");
    PoissonOperator op;
    op.n = n;
    op.lower.assign(n - 2, 0.0);
    op.diag.assign(n - 2, 0.0);
    op.upper.assign(n - 2, 0.0);
    op.cell_m.assign(n - 2, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = (grid.node_positions_nm[i] - grid.node_positions_nm[i - 1]) * 1e-9;
        const double hp = (grid.node_positions_nm[i + 1] - grid.node_positions_nm[i]) * 1e-9;
        const double cl = eps0_Fm * grid.node_material[i - 1].eps_rel / hm;
        const double cu = eps0_Fm * grid.node_material[i].eps_rel / hp;
        op.lower[i - 1] = cl;
        op.upper[i - 1] = cu;
        op.diag[i - 1] = -(cl + cu);
        op.cell_m[i - 1] = 0.5 * (hm + hp);
    }
    return op;
}

// enclosed charge per interior node [C/m^2]
std::vector<double> enclosed_charge(const Grid& grid, const PoissonOperator& op,
                                    const std::vector<double>& net_cm3, double sheet_cm2) {
    std::vector<double> Q(op.n - 2, 0.0);
    for (std::size_t i = 1; i + 1 < op.n; ++i)
        Q[i - 1] = q_C * net_cm3[i] * 1e6 * op.cell_m[i - 1];
    if (grid.qd_node_index > 0 && grid.qd_node_index + 1 < static_cast<long>(op.n))
        Q[static_cast<std::size_t>(grid.qd_node_index) - 1] += q_C * sheet_cm2 * 1e4;
    return Q;
}

} // namespace

std::vector<double> solve_poisson(const Grid& grid, const ChargeDensity& charge,
                                  std::pair<double, double> boundary_V) {
    if (charge.node_charge_cm3.size() != grid.size())
        throw config_error("charge array size does not match grid");
    if (!std::isfinite(boundary_V.first) || !std::isfinite(boundary_V.second))
        throw config_error("boundary potentials must be finite");

    PoissonOperator op = build_operator(grid);
    std::vector<double> Q =
        enclosed_charge(grid, op, charge.node_charge_cm3, charge.sheet_charge_cm2);

    // A phi = -Q with Dirichlet values moved to the right-hand side
    std::vector<double> rhs(op.n - 2);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -Q[i];
    rhs.front() -= op.lower.front() * boundary_V.first;
    rhs.back() -= op.upper.back() * boundary_V.second;

    std::vector<double> lo = op.lower, di = op.diag, up = op.upper;
    lo.front() = 0.0;
    up.back() = 0.0;
    thomas_solve(lo, di, up, rhs);

    std::vector<double> phi(op.n);
    phi.front() = boundary_V.first;
    phi.back() = boundary_V.second;
    for (std::size_t i = 0; i < rhs.size(); ++i) phi[i + 1] = rhs[i];
    return phi;
}

// ----------------------------------------------------- self-consistent solver

BandDiagram self_consistent_on_grid(const Grid& grid, double bias_V, double sheet_charge_cm2,
                                    double fermi_split_nm, const ScfOptions& options) {
    if (std::abs(bias_V) > 5.0) throw config_error("|bias| must be <= 5 V");
    const std::size_t n = grid.size();
    const double kT = kB_eVK * grid.temperature_K;

    // quasi-Fermi levels: bottom contact is the energy reference
    const double ef_bottom = 0.0;
    const double ef_top = -bias_V;
    std::vector<double> ef(n), offset(n), nc(n);
    for (std::size_t i = 0; i < n; ++i) {
        ef[i] = grid.node_positions_nm[i] < fermi_split_nm ? ef_top : ef_bottom;
        offset[i] = grid.node_material[i].cb_offset_eV;
        nc[i] = conduction_band_dos_cm3(grid.node_material[i].m_eff, grid.temperature_K);
    }

    // Dirichlet boundaries from bulk neutrality at the local doping
    const double d_top =
        neutral_ec_minus_ef(grid.node_material.front(), grid.node_doping_cm3.front(),
                            grid.temperature_K);
    const double d_bot =
        neutral_ec_minus_ef(grid.node_material.back(), grid.node_doping_cm3.back(),
                            grid.temperature_K);
    const double phi_top = offset.front() - ef.front() - d_top;
    const double phi_bot = offset.back() - ef.back() - d_bot;

    std::vector<double> phi(n);
    const double z0 = grid.node_positions_nm.front(), z1 = grid.node_positions_nm.back();
    for (std::size_t i = 0; i < n; ++i)
        phi[i] = phi_top + (phi_bot - phi_top) * (grid.node_positions_nm[i] - z0) / (z1 - z0);

    PoissonOperator op = build_operator(grid);
    std::vector<double> history;
    double alpha = options.mixing;
    double prev_res = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iter = 0;

    std::vector<double> net(n), dq(n);
    for (; iter < options.max_iterations; ++iter) {
        // density and its local response at the current potential
        for (std::size_t i = 0; i < n; ++i) {
            const double eta = std::clamp((ef[i] - (offset[i] - phi[i])) / kT, -1e4, 1e4);
            net[i] = grid.node_doping_cm3[i] - nc[i] * fermi_half(eta);
            dq[i] = -q_C * 1e6 * nc[i] * fermi_half_deriv(eta) / kT;  // d(rho)/d(phi) [C/m^3/V] * m
        }
        std::vector<double> Q = enclosed_charge(grid, op, net, sheet_charge_cm2);

        // residual of the discrete equations and the linearized (Newton) system
        std::vector<double> lo = op.lower, di = op.diag, up = op.upper, rhs(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double F = op.lower[i - 1] * phi[i - 1] + op.diag[i - 1] * phi[i] +
                             op.upper[i - 1] * phi[i + 1] + Q[i - 1];
            rhs[i - 1] = -F;
            di[i - 1] += dq[i] * op.cell_m[i - 1];
        }
        lo.front() = 0.0;
        up.back() = 0.0;
        thomas_solve(lo, di, up, rhs);

        double res = 0.0;
        for (double d : rhs) res = std::max(res, std::abs(d));
        history.push_back(res);
        if (res < options.tolerance_eV) {
            converged = true;
            ++iter;
            break;
        }
        for (std::size_t i = 1; i + 1 < n; ++i)
            phi[i] += std::clamp(alpha * rhs[i - 1], -options.max_step_V, options.max_step_V);
        if (options.adaptive_mixing)
            alpha = (res < prev_res) ? std::min(1.0, alpha * 1.6)
                                     : std::max(options.mixing, alpha * 0.3);
        prev_res = res;
    }
    if (!converged)
        throw convergence_error("self-consistent solve hit the iteration cap (" +
                                    std::to_string(options.max_iterations) + "), residual " +
                                    std::to_string(history.back()) + " eV",
                                history);

    BandDiagram d;
    d.profile.positions_nm = grid.node_positions_nm;
    d.profile.potential_eV.resize(n);
    d.profile.m_eff_per_node.resize(n);
    d.potential_V = phi;
    d.electron_cm3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.profile.potential_eV[i] = offset[i] - phi[i];
        d.profile.m_eff_per_node[i] = grid.node_material[i].m_eff;
        const double eta = std::clamp((ef[i] - d.profile.potential_eV[i]) / kT, -1e4, 1e4);
        d.electron_cm3[i] = nc[i] * fermi_half(eta);
    }
    d.fermi_top_eV = ef_top;
    d.fermi_bottom_eV = ef_bottom;
    d.fermi_split_nm = fermi_split_nm;
    d.residual_eV = history.back();
    d.iterations = iter;
    d.qd_node_index = grid.qd_node_index;
    return d;
}

BandDiagram self_consistent_band_diagram(const DeviceStack& stack, double bias_V,
                                         double qd_occupancy, const ScfOptions& options) {
    Grid grid = discretize(stack, options.grid_spacing_nm);

    // quasi-Fermi split at the center of the double-barrier well
    double split = 0.5 * (grid.node_positions_nm.front() + grid.node_positions_nm.back());
    for (int i = 0; i < static_cast<int>(stack.layers.size()); ++i)
        if (stack.layers[static_cast<std::size_t>(i)].role_tag == "well") {
            split = stack.layer_start_nm(i) +
                    0.5 * stack.layers[static_cast<std::size_t>(i)].thickness_nm;
            break;
        }

    const double sheet_cm2 = -qd_occupancy * stack.qd_sheet.areal_density_cm2;
    return self_consistent_on_grid(grid, bias_V, sheet_cm2, split, options);
}

} // namespace qdrtd
