#include "qdrtd/quantum.hpp"
#include "qdrtd/constants.hpp"
#include "qdrtd/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

namespace qdrtd {

using std::complex;
using consts::hbar2_over_2m0_eVnm2;

void PotentialProfile::validate() const {
    const std::size_t n = positions_nm.size();
    if (n < 3 || potential_eV.size() != n || m_eff_per_node.size() != n)
        throw config_error("potential profile arrays must have equal length >= 3");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(positions_nm[i] < positions_nm[i + 1]))
            throw config_error("profile positions must be strictly increasing");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(potential_eV[i]))
            throw config_error("profile potential must be finite");
        if (!(m_eff_per_node[i] > 0.0))
            throw config_error("profile effective mass must be positive");
    }
}

PotentialProfile PotentialProfile::mirrored() const {
    PotentialProfile m;
    const double z0 = positions_nm.front(), z1 = positions_nm.back();
    const std::size_t n = positions_nm.size();
    m.positions_nm.resize(n);
    m.potential_eV.resize(n);
    m.m_eff_per_node.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        m.positions_nm[i] = z0 + (z1 - positions_nm[n - 1 - i]);
    // a node's value describes the interval to its right; the mirrored node i
    // must therefore carry the value of the original interval n-2-i
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = n - 2 - i;
        m.potential_eV[i] = potential_eV[j];
        m.m_eff_per_node[i] = m_eff_per_node[j];
    }
    m.potential_eV[n - 1] = potential_eV[0];
    m.m_eff_per_node[n - 1] = m_eff_per_node[0];
    return m;
}

namespace {

// Inverse iteration for one eigenvector of a symmetric tridiagonal matrix.
// Pivoted LU of the shifted matrix (fill-in is one extra superdiagonal), two
// solves are enough for the well-separated spectra of 1-D Hamiltonians.
Eigen::VectorXd tridiag_eigenvector(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                    double lambda, double scale) {
    const long n = diag.size();
    const double sigma = lambda + 1e-12 * std::max(scale, 1.0);

    // factor (T - sigma I) once
    Eigen::VectorXd d0(n), d1(n), d2(n);
    Eigen::VectorXd lfac(n);
    std::vector<char> swapped(static_cast<std::size_t>(n), 0);
    for (long i = 0; i < n; ++i) {
        d0(i) = diag(i) - sigma;
        d1(i) = i + 1 < n ? sub(i) : 0.0;
        d2(i) = 0.0;
    }
    for (long i = 0; i + 1 < n; ++i) {
        // current row i+1 is still original: (sub, diag - sigma, sub)
        double r0 = sub(i), r1 = diag(i + 1) - sigma, r2 = (i + 2 < n) ? sub(i + 1) : 0.0;
        if (std::abs(r0) > std::abs(d0(i))) {
            swapped[static_cast<std::size_t>(i)] = 1;
            std::swap(d0(i), r0);
            std::swap(d1(i), r1);
            std::swap(d2(i), r2);
        }
        if (d0(i) == 0.0) d0(i) = 1e-300;
        const double f = r0 / d0(i);
        lfac(i) = f;
        d0(i + 1) = r1 - f * d1(i);
        d1(i + 1) = r2 - f * d2(i);
        d2(i + 1) = 0.0;
    }
    if (d0(n - 1) == 0.0) d0(n - 1) = 1e-300;

    auto solve = [&](Eigen::VectorXd b) {
        for (long i = 0; i + 1 < n; ++i) {
            if (swapped[static_cast<std::size_t>(i)]) std::swap(b(i), b(i + 1));
            b(i + 1) -= lfac(i) * b(i);
        }
        Eigen::VectorXd x(n);
        for (long i = n - 1; i >= 0; --i) {
            double s = b(i);
            if (i + 1 < n) s -= d1(i) * x(i + 1);
            if (i + 2 < n) s -= d2(i) * x(i + 2);
            x(i) = s / d0(i);
        }
        return x;
    };

    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0);
    v.normalize();
    for (int it = 0; it < 4; ++it) {
        v = solve(v);
        v.normalize();
        // residual ||T v - lambda v||
        double res = 0.0;
        for (long i = 0; i < n; ++i) {
            double r = (diag(i) - lambda) * v(i);
            if (i > 0) r += sub(i - 1) * v(i - 1);
            if (i + 1 < n) r += sub(i) * v(i + 1);
            res = std::max(res, std::abs(r));
        }
        if (res < 1e-10 * std::max(scale, 1.0)) break;
    }
    return v;
}

} // namespace

EigenSolution solve_bound_states(const PotentialProfile& profile, int n_states) {
    profile.validate();
    if (n_states < 1) throw config_error("n_states must be >= 1");

    const auto& z = profile.positions_nm;
    const auto& V = profile.potential_eV;
    const auto& m = profile.m_eff_per_node;
    const std::size_t n = z.size();
    const std::size_t ni = n - 2;  // interior nodes, Dirichlet edges

    // symmetrized BenDaniel-Duke tridiagonal in the weighted variable sqrt(w) psi
    Eigen::VectorXd diag(static_cast<long>(ni)), sub(static_cast<long>(ni) - 1);
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        w[i] = 0.5 * (z[i + 1] - z[i - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = z[i] - z[i - 1], hp = z[i + 1] - z[i];
        const double cm = hbar2_over_2m0_eVnm2 / (0.5 * (m[i - 1] + m[i]));
        const double cp = hbar2_over_2m0_eVnm2 / (0.5 * (m[i] + m[i + 1]));
        diag(static_cast<long>(i - 1)) = (cm / hm + cp / hp) / w[i] + V[i];
        if (i + 2 < n)
            sub(static_cast<long>(i - 1)) = -cp / (hp * std::sqrt(w[i] * w[i + 1]));
    }

    // eigenvalues only (O(n^2)); the few wanted eigenvectors come from inverse
    // iteration, so large grids stay cheap
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw convergence_error("tridiagonal eigensolve did not converge", {});

    double scale = 0.0;
    for (long i = 0; i < static_cast<long>(ni); ++i)
        scale = std::max(scale, std::abs(diag(i)));

    const double cutoff = std::max(V.front(), V.back());
    EigenSolution sol;
    for (long k = 0; k < static_cast<long>(ni) && static_cast<int>(sol.energies_eV.size()) < n_states; ++k) {
        const double E = solver.eigenvalues()(k);
        if (E >= cutoff) break;  // continuum
        const Eigen::VectorXd vec = tridiag_eigenvector(diag, sub, E, scale);
        std::vector<double> psi(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i)
            psi[i] = vec(static_cast<long>(i - 1)) / std::sqrt(w[i]);
        // eigenvector has unit l2 norm in the weighted variable, so
        // integral |psi|^2 dz = 1 already; fix the overall sign
        std::size_t imax = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(psi[i]) > std::abs(psi[imax])) imax = i;
        if (psi[imax] < 0.0)
            for (auto& v : psi) v = -v;
        sol.energies_eV.push_back(E);
        sol.wavefunctions.push_back(std::move(psi));
    }
    return sol;
}

namespace {

struct Mat2 {
    complex<double> a, b, c, d;  // row-major 2x2
};

inline Mat2 mul(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline complex<double> wavevector(double E, double V, double m) {
    // k [1/nm]; principal sqrt puts evanescent k on the +i axis
    complex<double> k = std::sqrt(complex<double>((E - V) * m / hbar2_over_2m0_eVnm2, 0.0));
    if (std::abs(k) < 1e-12) k = complex<double>(1e-12, 0.0);
    return k;
}

} // namespace

double transmission_at(const PotentialProfile& profile, double energy_eV) {
    const auto& z = profile.positions_nm;
    const auto& V = profile.potential_eV;
    const auto& m = profile.m_eff_per_node;
    const std::size_t nseg = z.size() - 1;

    // piecewise-constant segments; the left node carries the interval's value,
    // so abrupt heterointerfaces that fall on nodes stay exactly rectangular
    auto segV = [&](std::size_t j) { return V[j]; };
    auto segM = [&](std::size_t j) { return m[j]; };

    const double V0 = segV(0), VL = segV(nseg - 1);
    const double m0 = segM(0), mL = segM(nseg - 1);
    if (energy_eV <= V0 || energy_eV <= VL) return 0.0;  // evanescent lead

    const complex<double> k0 = wavevector(energy_eV, V0, m0);
    const complex<double> kL = wavevector(energy_eV, VL, mL);

    Mat2 M{1.0, 0.0, 0.0, 1.0};
    double logscale = 0.0;
    complex<double> kj = k0;
    double mj = m0;
    for (std::size_t j = 0; j < nseg; ++j) {
        const double d = z[j + 1] - z[j];
        // propagation across segment j, scaled so no element exceeds unit modulus
        const complex<double> ikd = complex<double>(0.0, 1.0) * kj * d;
        const double s = std::abs(ikd.real());
        const complex<double> pp = std::exp(ikd - s), pm = std::exp(-ikd - s);
        logscale += s;
        M = mul(Mat2{pp, 0.0, 0.0, pm}, M);

        if (j + 1 < nseg) {
            const complex<double> kn = wavevector(energy_eV, segV(j + 1), segM(j + 1));
            const double mn = segM(j + 1);
            const complex<double> g = (kj * mn) / (kn * mj);
            M = mul(Mat2{0.5 * (1.0 + g), 0.5 * (1.0 - g),
                         0.5 * (1.0 - g), 0.5 * (1.0 + g)},
                    M);
            kj = kn;
            mj = mn;
        }
        const double big = std::max(std::max(std::abs(M.a), std::abs(M.b)),
                                    std::max(std::abs(M.c), std::abs(M.d)));
        if (big > 1e100) {
            const double inv = 1.0 / big;
            M.a *= inv; M.b *= inv; M.c *= inv; M.d *= inv;
            logscale += std::log(big);
        }
    }

    // det(M_true) telescopes to (k0 mL)/(kL m0); t = det/M22, T = (kL m0)/(k0 mL)|t|^2
    const double pref = std::log((k0.real() * mL) / (kL.real() * m0));
    const double logT = pref - 2.0 * (std::log(std::abs(M.d)) + logscale);
    if (logT < -700.0) return 0.0;
    return std::exp(logT);
}

namespace {

// maximize T on (lo, hi) by golden section; returns (E, T) at the maximum
std::pair<double, double> golden_max(const PotentialProfile& p, double lo, double hi) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = transmission_at(p, x1), f2 = transmission_at(p, x2);
    for (int it = 0; it < 160 && (b - a) > 1e-15; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = transmission_at(p, x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = transmission_at(p, x1);
        }
    }
    return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

// bisect for T(E) = target between e_out (T < target) and e_in (T > target)
double bisect_level(const PotentialProfile& p, double e_out, double e_in, double target) {
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (e_out + e_in);
        if (transmission_at(p, mid) > target)
            e_in = mid;
        else
            e_out = mid;
    }
    return 0.5 * (e_out + e_in);
}

// Quasi-bound energies of the cavity between the profile's two highest potential
// maxima, by exact piecewise-constant shooting with hard walls at the barriers'
// outer edges. A thick-barrier resonance can be narrower than any practical
// energy grid while its Lorentzian tails drown under the nonresonant background,
// so no sampling scheme can see it; the hard-wall eigenvalue differs from the
// true resonance only by O(linewidth) and anchors the peak hunt exactly.
std::vector<double> quasibound_seeds(const PotentialProfile& p, double e_min, double e_max) {
    const auto& z = p.positions_nm;
    const auto& V = p.potential_eV;
    const auto& m = p.m_eff_per_node;
    const std::size_t nseg = z.size() - 1;
    if (nseg < 5) return {};

    // local maxima of the segment potential, equal-value runs merged
    struct Run {
        std::size_t first, last;
        double v;
    };
    std::vector<Run> runs;
    std::size_t start = 0;
    for (std::size_t k = 1; k <= nseg; ++k) {
        if (k == nseg || V[k] != V[start]) {
            runs.push_back({start, k - 1, V[start]});
            start = k;
        }
    }
    std::vector<Run> maxima;
    for (std::size_t r = 1; r + 1 < runs.size(); ++r)
        if (runs[r].v > runs[r - 1].v && runs[r].v > runs[r + 1].v) maxima.push_back(runs[r]);
    if (maxima.size() < 2) return {};
    std::sort(maxima.begin(), maxima.end(), [](const Run& a, const Run& b) { return a.v > b.v; });
    Run left = maxima[0], right = maxima[1];
    if (left.first > right.first) std::swap(left, right);
    if (right.first <= left.last + 1) return {};  // no cavity between the barriers

    // walls go at the barriers' outer feet (a tilted barrier peaks at one corner,
    // so the peak runs alone do not span the barrier bodies); the further out the
    // wall, the closer the hard-wall eigenvalue is to the open-system resonance
    double cavity_min = left.v;
    for (std::size_t k = left.last + 1; k < right.first; ++k)
        cavity_min = std::min(cavity_min, V[k]);
    const double tau = cavity_min + 0.25 * (std::min(left.v, right.v) - cavity_min);
    std::size_t a = left.first, b = right.last + 1;  // wall node indices
    while (a > 0 && V[a - 1] > tau) --a;
    while (b < nseg && V[b] > tau) ++b;
    const double e_top = std::min({left.v, right.v, e_max});
    if (!(e_top > e_min)) return {};

    // psi at the right wall for psi(left wall) = 0; flux-matched (psi, psi'/m)
    auto psi_end = [&](double E) {
        complex<double> psi(0.0, 0.0), phi(1.0, 0.0);
        for (std::size_t q = a; q < b; ++q) {
            const double d = z[q + 1] - z[q];
            const complex<double> k = wavevector(E, V[q], m[q]);
            const complex<double> c = std::cos(k * d), sn = std::sin(k * d);
            const complex<double> psi2 = psi * c + phi * (m[q] / k) * sn;
            phi = -psi * (k / m[q]) * sn + phi * c;
            psi = psi2;
            const double big = std::max(std::abs(psi), std::abs(phi));
            if (big > 1e50) {
                psi /= big;
                phi /= big;
            }
        }
        return psi.real();
    };

    std::vector<double> seeds;
    const int nsteps = std::max(2, static_cast<int>(std::ceil((e_top - e_min) / 2.5e-4)));
    double prev_e = e_min, prev_f = psi_end(prev_e);
    for (int i = 1; i <= nsteps; ++i) {
        const double e = e_min + (e_top - e_min) * i / nsteps;
        const double f = psi_end(e);
        if ((prev_f < 0.0 && f > 0.0) || (prev_f > 0.0 && f < 0.0)) {
            double lo = prev_e, hi = e, flo = prev_f;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = psi_end(mid);
                if ((flo < 0.0) == (fm < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            seeds.push_back(0.5 * (lo + hi));
        }
        prev_e = e;
        prev_f = f;
    }
    return seeds;
}

} // namespace

TransmissionSpectrum transmission(const PotentialProfile& profile,
                                  const std::vector<double>& energy_grid_eV,
                                  const RefinePolicy& refine) {
    profile.validate();
    if (energy_grid_eV.empty())
        throw config_error("transmission: empty energy grid");

    std::map<double, double> samples;
    for (double e : energy_grid_eV)
        samples.emplace(e, transmission_at(profile, e));

    if (refine.enabled && samples.size() >= 2) {
        // pass 1: subdivide wherever T jumps between neighbors
        auto subdivide = [&]() {
            struct Seg { double e1, t1, e2, t2; int depth; };
            std::vector<Seg> work;
            auto it = samples.begin();
            for (auto next = std::next(it); next != samples.end(); ++it, ++next)
                work.push_back({it->first, it->second, next->first, next->second, 0});
            while (!work.empty()) {
                Seg s = work.back();
                work.pop_back();
                if (std::abs(s.t2 - s.t1) <= refine.delta_t_threshold || s.depth >= refine.max_depth)
                    continue;
                const double em = 0.5 * (s.e1 + s.e2);
                if (em <= s.e1 || em >= s.e2) continue;  // spacing at rounding limit
                const double tm = transmission_at(profile, em);
                samples.emplace(em, tm);
                work.push_back({s.e1, s.t1, em, tm, s.depth + 1});
                work.push_back({em, tm, s.e2, s.t2, s.depth + 1});
            }
        };
        subdivide();

        const double grid_lo = samples.begin()->first;
        const double grid_hi = samples.rbegin()->first;

        // resolve one peak: bisect to its half-maximum crossings, then lay
        // >= min_points_per_fwhm points across the FWHM plus log-spaced wings
        auto resolve_peak = [&](double e0, double t0, double out_l, double out_r) {
            const double half = 0.5 * t0;
            const double el = (transmission_at(profile, out_l) < half)
                                  ? bisect_level(profile, out_l, e0, half)
                                  : out_l;
            const double er = (transmission_at(profile, out_r) < half)
                                  ? bisect_level(profile, out_r, e0, half)
                                  : out_r;
            const double fwhm = std::max(er - el, 1e-15);
            const int npts = std::max(refine.min_points_per_fwhm, 8);
            for (int j = 0; j <= npts; ++j) {
                const double e = el + fwhm * j / npts;
                samples.emplace(e, transmission_at(profile, e));
            }
            for (double wing : {1.0, 1.5, 2.5, 4.0, 6.5, 10.0, 16.0, 25.0, 40.0}) {
                for (double sgn : {-1.0, 1.0}) {
                    const double e = e0 + sgn * wing * fwhm;
                    if (e > grid_lo && e < grid_hi)
                        samples.emplace(e, transmission_at(profile, e));
                }
            }
            samples.emplace(e0, t0);
        };

        // pass 2: plant a sample on top of every cavity quasi-bound state; an
        // ultra-narrow resonance is invisible to grid scanning of any density
        for (double seed : quasibound_seeds(profile, grid_lo, grid_hi)) {
            std::map<double, double> local;
            auto probe = [&](double e) {
                if (e > grid_lo && e < grid_hi) local.emplace(e, transmission_at(profile, e));
            };
            probe(seed);
            for (double off = 1e-11; off < 2e-4; off *= 1.6) {
                probe(seed - off);
                probe(seed + off);
            }
            if (local.empty()) continue;
            auto best = local.begin();
            for (auto it = local.begin(); it != local.end(); ++it)
                if (it->second > best->second) best = it;
            if (best->second <= 0.0) continue;
            const double lo = best == local.begin() ? std::max(grid_lo, best->first - 2e-4)
                                                    : std::prev(best)->first;
            const auto nx = std::next(best);
            const double hi = nx == local.end() ? std::min(grid_hi, best->first + 2e-4)
                                                : nx->first;
            auto [e0, t0] = golden_max(profile, lo, hi);
            if (t0 < refine.resonance_floor) continue;
            for (const auto& [e, t] : local) samples.emplace(e, t);
            resolve_peak(e0, t0, std::max(grid_lo, e0 - 2e-4), std::min(grid_hi, e0 + 2e-4));
        }

        // pass 3: hunt every remaining interior local maximum to its true peak
        std::vector<double> es, ts;
        es.reserve(samples.size());
        ts.reserve(samples.size());
        for (const auto& [e, t] : samples) {
            es.push_back(e);
            ts.push_back(t);
        }
        for (std::size_t i = 1; i + 1 < es.size(); ++i) {
            if (!(ts[i] > ts[i - 1] && ts[i] > ts[i + 1])) continue;
            if (ts[i] <= 0.0) continue;
            auto [e0, t0] = golden_max(profile, es[i - 1], es[i + 1]);
            if (t0 < refine.resonance_floor) continue;
            resolve_peak(e0, t0, es[i - 1], es[i + 1]);
        }
        subdivide();
    }

    TransmissionSpectrum spec;
    spec.energies_eV.reserve(samples.size());
    spec.transmission.reserve(samples.size());
    for (const auto& [e, t] : samples) {
        spec.energies_eV.push_back(e);
        spec.transmission.push_back(t);
    }
    spec.resonances = find_resonances(spec, refine.resonance_floor);
    return spec;
}

std::vector<Resonance> find_resonances(const TransmissionSpectrum& spectrum, double floor) {
    const auto& E = spectrum.energies_eV;
    const auto& T = spectrum.transmission;
    std::vector<Resonance> out;
    if (E.size() < 3) return out;

    for (std::size_t i = 1; i + 1 < E.size(); ++i) {
        if (!(T[i] > T[i - 1] && T[i] > T[i + 1]) || T[i] < floor) continue;
        const double half = 0.5 * T[i];

        // walk out to the half-maximum crossing on each side, linear interpolation
        double el = E.front();
        for (std::size_t j = i; j > 0; --j) {
            if (T[j - 1] <= half) {
                el = E[j - 1] + (E[j] - E[j - 1]) * (half - T[j - 1]) / (T[j] - T[j - 1]);
                break;
            }
        }
        double er = E.back();
        for (std::size_t j = i; j + 1 < E.size(); ++j) {
            if (T[j + 1] <= half) {
                er = E[j] + (E[j + 1] - E[j]) * (half - T[j]) / (T[j + 1] - T[j]);
                break;
            }
        }
        out.push_back({E[i], er - el, T[i]});
    }
    return out;
}

} // namespace qdrtd
