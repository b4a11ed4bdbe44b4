#ifndef TICTAQ_FITTING_HPP
#define TICTAQ_FITTING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tictaq/common.hpp"
#include "tictaq/spectroscopy.hpp"

namespace tictaq {

struct Dip {
    double frequency = 0.0;  // sub-bin estimate (Hz)
    double depth = 0.0;      // prominence of the dip in P1
};

struct DipConfig {
    int smooth_window = 3;          // centered moving average, odd
    double min_prominence = 0.0;    // absolute floor; 0 selects the shot-noise rule
    double prominence_sigmas = 3.0; // multiples of sqrt(p(1-p)/shots)
};

namespace detail {

inline std::vector<double> moving_average(std::span<const double> x, int window) {
    const int half = window / 2;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = (i >= static_cast<std::size_t>(half)) ? i - half : 0;
        const std::size_t hi = std::min(x.size() - 1, i + static_cast<std::size_t>(half));
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += x[j];
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// Prominence of a local minimum: walk outward until a lower point (or the
// edge), take the lesser of the two flanking maxima relative to the minimum.
inline double dip_prominence(std::span<const double> s, std::size_t i) {
    double left = s[i];
    for (std::size_t j = i; j-- > 0;) {
        if (s[j] < s[i]) break;
        left = std::max(left, s[j]);
    }
    double right = s[i];
    for (std::size_t j = i + 1; j < s.size(); ++j) {
        if (s[j] < s[i]) break;
        right = std::max(right, s[j]);
    }
    return std::min(left, right) - s[i];
}

}  // namespace detail

// Local P1 minima in one constant-voltage slice, with sub-bin frequencies from
// a parabola through the three points around each minimum. shots == 0 means a
// noiseless slice (the shot-noise prominence floor degenerates to zero).
inline std::vector<Dip> detect_dips(std::span<const double> f_grid, std::span<const double> p1,
                                    int shots, const DipConfig& cfg = {}) {
    if (p1.size() != f_grid.size())
        throw std::invalid_argument("detect_dips: slice length does not match f_grid");
    if (p1.size() < 5) throw std::invalid_argument("detect_dips: slice needs at least 5 points");
    const std::vector<double> s = detail::moving_average(p1, cfg.smooth_window);
    std::vector<Dip> out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (!(s[i] < s[i - 1] && s[i] <= s[i + 1])) continue;
        const double prom = detail::dip_prominence(s, i);
        double threshold = cfg.min_prominence;
        if (threshold == 0.0 && shots > 0) {
            const double p = std::clamp(s[i], 0.0, 1.0);
            threshold = cfg.prominence_sigmas * std::sqrt(std::max(p * (1.0 - p), 1e-6) / shots);
        }
        if (!(prom > threshold)) continue;
        const double den = s[i - 1] - 2.0 * s[i] + s[i + 1];
        double offset = (den > 0.0) ? 0.5 * (s[i - 1] - s[i + 1]) / den : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        const double bin = 0.5 * (f_grid[i + 1] - f_grid[i - 1]);
        out.push_back({f_grid[i] + offset * bin, prom});
    }
    return out;
}

// One TLS tuning curve: dip positions versus voltage, with optional voltage
// intervals to exclude from fitting (e.g. across a scrambling discontinuity).
struct Trajectory {
    std::vector<double> voltages;
    std::vector<double> frequencies;
    std::vector<double> depths;
    std::vector<std::pair<double, double>> excluded;

    std::size_t size() const { return voltages.size(); }
};

struct LinkConfig {
    double max_jump = 0.0;       // largest |df| between adjacent voltages (Hz); must be set
    std::size_t min_points = 4;  // shorter tracks are discarded
    int max_skip = 1;            // voltages a track may miss consecutively
};

// Greedy nearest-neighbor association of dips across adjacent voltages:
// candidate (track, dip) pairs are taken in order of increasing frequency
// jump, each track and dip used at most once per voltage.
inline std::vector<Trajectory> link_trajectories(std::span<const double> v_grid,
                                                 const std::vector<std::vector<Dip>>& dips,
                                                 const LinkConfig& cfg) {
    if (dips.size() != v_grid.size())
        throw std::invalid_argument("link_trajectories: dips must be keyed by v_grid");
    if (!(cfg.max_jump > 0.0)) throw std::invalid_argument("link_trajectories: max_jump must be > 0");

    struct Track {
        Trajectory traj;
        std::size_t last_idx = 0;
        bool open = true;
    };
    std::vector<Track> tracks;

    for (std::size_t iv = 0; iv < v_grid.size(); ++iv) {
        struct Cand {
            double dist;
            std::size_t track;
            std::size_t dip;
        };
        std::vector<Cand> cands;
        for (std::size_t t = 0; t < tracks.size(); ++t) {
            if (!tracks[t].open) continue;
            const std::size_t gap = iv - tracks[t].last_idx;
            if (gap > static_cast<std::size_t>(cfg.max_skip) + 1) {
                tracks[t].open = false;
                continue;
            }
            for (std::size_t d = 0; d < dips[iv].size(); ++d) {
                const double dist = std::abs(dips[iv][d].frequency - tracks[t].traj.frequencies.back());
                if (dist <= cfg.max_jump * static_cast<double>(gap)) cands.push_back({dist, t, d});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.track != b.track) return a.track < b.track;
            return a.dip < b.dip;
        });
        std::vector<bool> track_used(tracks.size(), false), dip_used(dips[iv].size(), false);
        for (const Cand& c : cands) {
            if (track_used[c.track] || dip_used[c.dip]) continue;
            track_used[c.track] = true;
            dip_used[c.dip] = true;
            Track& tr = tracks[c.track];
            tr.traj.voltages.push_back(v_grid[iv]);
            tr.traj.frequencies.push_back(dips[iv][c.dip].frequency);
            tr.traj.depths.push_back(dips[iv][c.dip].depth);
            tr.last_idx = iv;
        }
        for (std::size_t d = 0; d < dips[iv].size(); ++d) {
            if (dip_used[d]) continue;
            Track tr;
            tr.traj.voltages.push_back(v_grid[iv]);
            tr.traj.frequencies.push_back(dips[iv][d].frequency);
            tr.traj.depths.push_back(dips[iv][d].depth);
            tr.last_idx = iv;
            tracks.push_back(std::move(tr));
        }
    }

    std::vector<Trajectory> out;
    for (auto& t : tracks)
        if (t.traj.size() >= cfg.min_points) out.push_back(std::move(t.traj));
    return out;
}

struct HyperbolaFit {
    double gamma_e = 0.0;   // asymptotic tuning sensitivity magnitude (Hz/V)
    double delta0 = 0.0;    // tunneling energy as frequency (Hz)
    double v0 = 0.0;        // vertex voltage (V)
    int slope_sign = 1;     // sign of the dominant observed df/dV branch
    std::array<double, 9> covariance{};  // row-major (gamma_e, delta0, v0)
    double sigma_gamma_e = 0.0;
    double sigma_delta0 = 0.0;
    double sigma_v0 = 0.0;
    double residual_norm = 0.0;
    std::size_t n_points = 0;
    bool converged = false;
    bool low_confidence = false;
};

namespace detail {

// Solve a symmetric positive-ish 3x3 system by Gaussian elimination with
// partial pivoting; returns false when effectively singular.
inline bool solve3(std::array<double, 9> a, std::array<double, 3> b, std::array<double, 3>& x) {
    std::array<int, 3> piv{0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[piv[r] * 3 + col]) > std::abs(a[piv[best] * 3 + col])) best = r;
        std::swap(piv[col], piv[best]);
        const double d = a[piv[col] * 3 + col];
        if (std::abs(d) < 1e-300) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double m = a[piv[r] * 3 + col] / d;
            for (int c = col; c < 3; ++c) a[piv[r] * 3 + c] -= m * a[piv[col] * 3 + c];
            b[piv[r]] -= m * b[piv[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = b[piv[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[piv[row] * 3 + c] * x[c];
        x[row] = s / a[piv[row] * 3 + row];
    }
    return true;
}

inline bool invert3(const std::array<double, 9>& a, std::array<double, 9>& inv) {
    const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                       a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (std::abs(det) < 1e-300) return false;
    inv = {(a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det,
           (a[1] * a[5] - a[2] * a[4]) / det, (a[5] * a[6] - a[3] * a[8]) / det,
           (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
           (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det,
           (a[0] * a[4] - a[1] * a[3]) / det};
    return true;
}

struct LmOutcome {
    std::array<double, 3> p{};
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

inline double hyperbola_cost(std::span<const double> vs, std::span<const double> fs,
                             const std::array<double, 3>& p) {
    double cost = 0.0;
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const double r = std::hypot(p[0] * (vs[k] - p[2]), p[1]) - fs[k];
        cost += r * r;
    }
    return cost;
}

// Damped least squares on f(V) = sqrt(gamma^2 (V-V0)^2 + delta0^2) with the
// analytic Jacobian and Marquardt diagonal scaling.
inline LmOutcome lm_hyperbola(std::span<const double> vs, std::span<const double> fs,
                              std::array<double, 3> p, int max_iter, double step_tol) {
    LmOutcome out;
    out.p = p;
    out.cost = hyperbola_cost(vs, fs, p);
    double lambda = 1e-3;
    for (int it = 0; it < max_iter; ++it) {
        std::array<double, 9> jtj{};
        std::array<double, 3> jtr{};
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const double dv = vs[k] - out.p[2];
            const double f = std::hypot(out.p[0] * dv, out.p[1]);
            if (f <= 0.0) return out;
            const double r = f - fs[k];
            const std::array<double, 3> j = {out.p[0] * dv * dv / f, out.p[1] / f,
                                             -out.p[0] * out.p[0] * dv / f};
            for (int a = 0; a < 3; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 3; ++b) jtj[a * 3 + b] += j[a] * j[b];
            }
        }
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            std::array<double, 9> damped = jtj;
            for (int a = 0; a < 3; ++a)
                damped[a * 3 + a] += lambda * std::max(jtj[a * 3 + a], 1e-300);
            std::array<double, 3> step{};
            std::array<double, 3> neg = {-jtr[0], -jtr[1], -jtr[2]};
            if (!solve3(damped, neg, step)) {
                lambda *= 10.0;
                continue;
            }
            const std::array<double, 3> cand = {out.p[0] + step[0], out.p[1] + step[1],
                                                out.p[2] + step[2]};
            const double cost = hyperbola_cost(vs, fs, cand);
            if (cost <= out.cost) {
                double rel = 0.0;
                for (int a = 0; a < 3; ++a)
                    rel = std::max(rel, std::abs(step[a]) / std::max(std::abs(out.p[a]), 1e-12));
                out.p = cand;
                out.cost = cost;
                lambda = std::max(lambda * 0.3, 1e-14);
                accepted = true;
                if (rel < step_tol) {
                    out.converged = true;
                    return out;
                }
            } else {
                lambda *= 2.0;
            }
        }
        if (!accepted) {
            out.converged = true;  // damping exhausted: local optimum to working precision
            return out;
        }
    }
    return out;
}

}  // namespace detail

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;
};

// Least-squares STM hyperbola through one trajectory. Two starts are tried:
// the vertex heuristic (argmin frequency plus wing secant slopes) and an exact
// linearization of f^2 as a quadratic in V; the lower-cost optimum wins, so
// the result never regresses below the heuristic initialization.
inline HyperbolaFit fit_hyperbola(const Trajectory& traj, const FitOptions& opt = {}) {
    std::vector<double> vs, fs;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        bool cut = false;
        for (const auto& [lo, hi] : traj.excluded)
            if (traj.voltages[k] >= lo && traj.voltages[k] <= hi) cut = true;
        if (!cut) {
            vs.push_back(traj.voltages[k]);
            fs.push_back(traj.frequencies[k]);
        }
    }
    if (vs.size() < 4) throw std::invalid_argument("fit_hyperbola: need at least 4 usable points");

    // Heuristic start: vertex at the lowest observed frequency, slope from the
    // outer third of points on each side.
    const std::size_t n = vs.size();
    std::size_t imin = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (fs[k] < fs[imin]) imin = k;
    std::vector<double> wing_slopes;
    const std::size_t third = std::max<std::size_t>(2, n / 3);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (k + 1 >= third && k < n - third) continue;
        const double dv = vs[k + 1] - vs[k];
        if (dv != 0.0) wing_slopes.push_back(std::abs((fs[k + 1] - fs[k]) / dv));
    }
    double slope0 = wing_slopes.empty() ? 1.0 : quantile(wing_slopes, 0.5);
    if (!(slope0 > 0.0)) slope0 = 1.0;
    const std::array<double, 3> init_heuristic = {slope0, fs[imin], vs[imin]};

    detail::LmOutcome best = detail::lm_hyperbola(vs, fs, init_heuristic, opt.max_iterations,
                                                  opt.step_tolerance);

    // Linearized start: f^2 = a V^2 + b V + c.
    {
        std::array<double, 9> ata{};
        std::array<double, 3> atb{};
        for (std::size_t k = 0; k < n; ++k) {
            const std::array<double, 3> row = {vs[k] * vs[k], vs[k], 1.0};
            const double y = fs[k] * fs[k];
            for (int a = 0; a < 3; ++a) {
                atb[a] += row[a] * y;
                for (int b = 0; b < 3; ++b) ata[a * 3 + b] += row[a] * row[b];
            }
        }
        std::array<double, 3> abc{};
        if (detail::solve3(ata, atb, abc) && abc[0] > 0.0) {
            const double v0 = -abc[1] / (2.0 * abc[0]);
            const double d2 = abc[2] - abc[0] * v0 * v0;
            if (d2 > 0.0) {
                const std::array<double, 3> init_lin = {std::sqrt(abc[0]), std::sqrt(d2), v0};
                detail::LmOutcome alt = detail::lm_hyperbola(vs, fs, init_lin, opt.max_iterations,
                                                             opt.step_tolerance);
                if (alt.cost < best.cost) best = alt;
            }
        }
    }

    HyperbolaFit fit;
    fit.gamma_e = std::abs(best.p[0]);
    fit.delta0 = std::abs(best.p[1]);
    fit.v0 = best.p[2];
    fit.n_points = n;
    fit.converged = best.converged;
    fit.residual_norm = std::sqrt(best.cost);

    std::vector<double> all_slopes;
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (vs[k + 1] != vs[k]) all_slopes.push_back((fs[k + 1] - fs[k]) / (vs[k + 1] - vs[k]));
    fit.slope_sign = (!all_slopes.empty() && quantile(all_slopes, 0.5) < 0.0) ? -1 : 1;

    // Covariance from the Jacobian at the optimum: sigma^2 (J^T J)^{-1}.
    std::array<double, 9> jtj{};
    for (std::size_t k = 0; k < n; ++k) {
        const double dv = vs[k] - fit.v0;
        const double f = std::hypot(fit.gamma_e * dv, fit.delta0);
        const std::array<double, 3> j = {fit.gamma_e * dv * dv / f, fit.delta0 / f,
                                         -fit.gamma_e * fit.gamma_e * dv / f};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) jtj[a * 3 + b] += j[a] * j[b];
    }
    const double dof = static_cast<double>(n > 3 ? n - 3 : 1);
    const double s2 = best.cost / dof;
    std::array<double, 9> inv{};
    if (detail::invert3(jtj, inv)) {
        for (int a = 0; a < 9; ++a) fit.covariance[a] = s2 * inv[a];
        fit.sigma_gamma_e = std::sqrt(std::max(fit.covariance[0], 0.0));
        fit.sigma_delta0 = std::sqrt(std::max(fit.covariance[4], 0.0));
        fit.sigma_v0 = std::sqrt(std::max(fit.covariance[8], 0.0));
    } else {
        constexpr double inf = std::numeric_limits<double>::infinity();
        fit.covariance.fill(inf);
        fit.sigma_gamma_e = fit.sigma_delta0 = fit.sigma_v0 = inf;
        fit.low_confidence = true;
    }
    const auto [vmin, vmax] = std::minmax_element(vs.begin(), vs.end());
    if (fit.v0 < *vmin || fit.v0 > *vmax || !fit.converged) fit.low_confidence = true;
    return fit;
}

struct FitReportConfig {
    DipConfig dips;
    LinkConfig link;                                   // max_jump 0 -> 0.2 x frequency span
    FitOptions fit;
    std::vector<std::pair<double, double>> excluded;   // voltage intervals excluded from fits
};

struct FitReport {
    std::vector<Trajectory> trajectories;
    std::vector<HyperbolaFit> fits;  // aligned with trajectories
};

// Full pipeline over one map: dip detection per slice, trajectory linking,
// one hyperbola fit per trajectory.
inline FitReport fit_report(const SpectroscopyMap& map, FitReportConfig cfg = {}) {
    map.validate();
    FitReport report;
    if (map.v_grid.empty() || map.f_grid.empty()) return report;
    std::vector<std::vector<Dip>> dips;
    dips.reserve(map.v_grid.size());
    for (const auto& slice : map.p1) dips.push_back(detect_dips(map.f_grid, slice, map.shots, cfg.dips));
    if (cfg.link.max_jump == 0.0)
        cfg.link.max_jump = 0.2 * (map.f_grid.back() - map.f_grid.front());
    for (auto& traj : link_trajectories(map.v_grid, dips, cfg.link)) {
        traj.excluded = cfg.excluded;
        std::size_t usable = 0;
        for (double v : traj.voltages) {
            bool cut = false;
            for (const auto& [lo, hi] : cfg.excluded)
                if (v >= lo && v <= hi) cut = true;
            if (!cut) ++usable;
        }
        if (usable < 4) continue;
        report.fits.push_back(fit_hyperbola(traj, cfg.fit));
        report.trajectories.push_back(std::move(traj));
    }
    return report;
}

}  // namespace tictaq

#endif
