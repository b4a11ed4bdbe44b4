#ifndef TICTAQ_OPTIMIZER_HPP
#define TICTAQ_OPTIMIZER_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tictaq/bath.hpp"
#include "tictaq/common.hpp"
#include "tictaq/spectroscopy.hpp"

namespace tictaq {

struct OptimizerConfig {
    std::vector<double> v_grid;      // coarse scan voltages, sorted
    double f_halfwidth = 5e6;        // spectroscopy window half-width around f01 (Hz)
    int f_points = 9;
    double tau = 4500.0;             // history weighting time constant (s)
    double refine_halfwidth = 0.4;   // T1 refinement half-window (V)
    int refine_points = 7;
    double t_delay = 20e-6;          // spectroscopy delay (s)
    int shots = 1000;
    double v_min = -10.0;            // global voltage limits for refinement clipping
    double v_max = 10.0;

    static OptimizerConfig defaults() {
        OptimizerConfig cfg;
        cfg.v_grid = linspace(-10.0, 10.0, 51);
        return cfg;
    }

    void validate() const {
        if (v_grid.size() < 2) throw std::invalid_argument("OptimizerConfig: v_grid needs >= 2 points");
        for (std::size_t i = 0; i + 1 < v_grid.size(); ++i)
            if (!(v_grid[i] < v_grid[i + 1]))
                throw std::invalid_argument("OptimizerConfig: v_grid must be sorted ascending");
        if (!(tau > 0.0)) throw std::invalid_argument("OptimizerConfig: tau must be > 0");
        if (refine_points < 1) throw std::invalid_argument("OptimizerConfig: refine_points must be >= 1");
        if (f_points < 1) throw std::invalid_argument("OptimizerConfig: f_points must be >= 1");
        if (!(t_delay > 0.0)) throw std::invalid_argument("OptimizerConfig: t_delay must be > 0");
        if (!(v_min < v_max)) throw std::invalid_argument("OptimizerConfig: v_min must be < v_max");
    }
};

// Time-stamped history of frequency-averaged traces for one qubit.
struct OptimizerState {
    struct Entry {
        double t = 0.0;                // virtual timestamp of the scan (s)
        std::vector<double> p1bar;     // frequency-averaged P1 over v_grid
    };
    std::vector<Entry> history;
    double last_v_opt = 0.0;

    void append(double t, std::vector<double> trace) {
        if (!history.empty()) {
            if (!(t > history.back().t))
                throw std::invalid_argument("OptimizerState: timestamps must be strictly increasing");
            if (trace.size() != history.back().p1bar.size())
                throw std::invalid_argument("OptimizerState: traces must share one v_grid");
        }
        history.push_back({t, std::move(trace)});
    }
};

struct IterationResult {
    double t_start = 0.0;
    double v_star = 0.0;               // coarse optimum
    double v_opt = 0.0;                // refined optimum
    std::vector<double> loss;          // weighted loss over v_grid
    std::vector<double> refine_grid;   // refinement voltages
    std::vector<double> refine_t1;     // measured T1 per refinement voltage (s)
    double duration = 0.0;             // virtual seconds consumed
};

// Mean of P1 across the sampled frequencies at each voltage.
inline std::vector<double> freq_average(const SpectroscopyMap& map) {
    map.validate();
    if (map.f_grid.empty()) throw std::invalid_argument("freq_average: map has no frequencies");
    std::vector<double> out(map.v_grid.size(), 0.0);
    for (std::size_t i = 0; i < map.p1.size(); ++i) {
        double s = 0.0;
        for (double p : map.p1[i]) s += p;
        out[i] = s / static_cast<double>(map.f_grid.size());
    }
    return out;
}

// Linearly weighted history average: W(t_i, t_j) = max(1 - (t_i - t_j)/tau, 0),
// loss(V) = sum_j W_j P1bar_j(V) / sum_j W_j. If every entry has aged out the
// newest trace is used alone.
inline std::vector<double> weighted_loss(const OptimizerState& state, double t_i, double tau) {
    if (state.history.empty()) throw std::invalid_argument("weighted_loss: empty history");
    if (!(tau > 0.0)) throw std::invalid_argument("weighted_loss: tau must be > 0");
    if (t_i < state.history.back().t)
        throw std::invalid_argument("weighted_loss: t_i precedes the latest trace");
    const std::size_t n = state.history.back().p1bar.size();
    std::vector<double> acc(n, 0.0);
    double norm = 0.0;
    for (const auto& e : state.history) {
        const double w = std::max(1.0 - (t_i - e.t) / tau, 0.0);
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < n; ++k) acc[k] += w * e.p1bar[k];
        norm += w;
    }
    if (norm == 0.0) return state.history.back().p1bar;
    for (double& x : acc) x /= norm;
    return acc;
}

// Grid voltage maximizing the loss. Ties break toward the smallest |V|, then
// toward the negative sign.
inline std::size_t coarse_select_index(std::span<const double> loss, std::span<const double> v_grid) {
    if (loss.empty() || loss.size() != v_grid.size())
        throw std::invalid_argument("coarse_select: loss and v_grid must be non-empty and aligned");
    std::size_t best = 0;
    for (std::size_t i = 1; i < loss.size(); ++i) {
        if (loss[i] > loss[best]) {
            best = i;
        } else if (loss[i] == loss[best]) {
            const double ai = std::abs(v_grid[i]);
            const double ab = std::abs(v_grid[best]);
            if (ai < ab || (ai == ab && v_grid[i] < v_grid[best])) best = i;
        }
    }
    return best;
}

inline double coarse_select(std::span<const double> loss, std::span<const double> v_grid) {
    return v_grid[coarse_select_index(loss, v_grid)];
}

// Refinement voltages: evenly spaced over v_star +- halfwidth clipped to the
// global limits, with v_star inserted when the clipped grid misses it.
inline std::vector<double> refine_grid(double v_star, const OptimizerConfig& cfg) {
    if (cfg.refine_points == 1) return {v_star};
    const double lo = std::max(v_star - cfg.refine_halfwidth, cfg.v_min);
    const double hi = std::min(v_star + cfg.refine_halfwidth, cfg.v_max);
    std::vector<double> grid = linspace(lo, hi, static_cast<std::size_t>(cfg.refine_points));
    bool has_star = false;
    for (double v : grid)
        if (v == v_star) has_star = true;
    if (!has_star) {
        grid.push_back(v_star);
        std::sort(grid.begin(), grid.end());
    }
    return grid;
}

struct RefineResult {
    double v_opt = 0.0;
    std::vector<double> grid;
    std::vector<double> t1;
};

// Measure T1 across the refinement grid and take the argmax (coarse tie rule).
inline RefineResult refine(DeviceModel& device, std::size_t q, double v_star,
                           const OptimizerConfig& cfg, std::span<const double> base,
                           const std::string& tag = "refine") {
    RefineResult out;
    out.grid = refine_grid(v_star, cfg);
    std::vector<double> v(base.begin(), base.end());
    out.t1.reserve(out.grid.size());
    for (double vq : out.grid) {
        v.at(q) = vq;
        out.t1.push_back(device.measure_t1(q, v, tag));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.grid.size(); ++i) {
        if (out.t1[i] > out.t1[best]) {
            best = i;
        } else if (out.t1[i] == out.t1[best]) {
            const double ai = std::abs(out.grid[i]);
            const double ab = std::abs(out.grid[best]);
            if (ai < ab || (ai == ab && out.grid[i] < out.grid[best])) best = i;
        }
    }
    out.v_opt = out.grid[best];
    return out;
}

// One optimization iteration: coarse spectroscopy scan over v_grid x window,
// frequency averaging, history-weighted loss, coarse argmax, T1 refinement.
// The scan trace is appended to the history before the loss is evaluated, so
// the current iteration enters with weight 1.
inline IterationResult run_iteration(DeviceModel& device, std::size_t q, OptimizerState& state,
                                     const OptimizerConfig& cfg, std::span<const double> base,
                                     const std::string& tag_prefix = {}) {
    cfg.validate();
    IterationResult res;
    res.t_start = device.clock();
    const double f01 = device.qubit(q).f01;
    const std::vector<double> f_list =
        linspace(f01 - cfg.f_halfwidth, f01 + cfg.f_halfwidth, static_cast<std::size_t>(cfg.f_points));
    const SpectroscopyMap map = device.acquire_map(q, cfg.v_grid, f_list, cfg.t_delay, cfg.shots,
                                                   base, tag_prefix + "scan");
    state.append(res.t_start, freq_average(map));
    res.loss = weighted_loss(state, res.t_start, cfg.tau);
    res.v_star = coarse_select(res.loss, cfg.v_grid);
    RefineResult ref = refine(device, q, res.v_star, cfg, base, tag_prefix + "refine");
    res.v_opt = ref.v_opt;
    res.refine_grid = std::move(ref.grid);
    res.refine_t1 = std::move(ref.t1);
    res.duration = device.clock() - res.t_start;
    state.last_v_opt = res.v_opt;
    return res;
}

// Tukey fence from the sample quartiles: Q3 + 1.5 (Q3 - Q1), quartiles by
// linear interpolation between order statistics.
inline double outlier_threshold(std::span<const double> samples) {
    if (samples.size() < 4) throw std::invalid_argument("outlier_threshold: need at least 4 samples");
    std::vector<double> xs(samples.begin(), samples.end());
    const double q1 = quantile(xs, 0.25);
    const double q3 = quantile(xs, 0.75);
    return q3 + 1.5 * (q3 - q1);
}

// Per-timestamp count of qubits whose error exceeds their own threshold.
inline std::vector<int> count_outlier_qubits(const std::vector<std::vector<double>>& per_qubit,
                                             std::span<const double> thresholds) {
    if (per_qubit.size() != thresholds.size())
        throw std::invalid_argument("count_outlier_qubits: one threshold per qubit required");
    if (per_qubit.empty()) return {};
    const std::size_t steps = per_qubit.front().size();
    for (const auto& series : per_qubit)
        if (series.size() != steps)
            throw std::invalid_argument("count_outlier_qubits: timelines are misaligned");
    std::vector<int> out(steps, 0);
    for (std::size_t q = 0; q < per_qubit.size(); ++q)
        for (std::size_t t = 0; t < steps; ++t)
            if (per_qubit[q][t] > thresholds[q]) ++out[t];
    return out;
}

}  // namespace tictaq

#endif
