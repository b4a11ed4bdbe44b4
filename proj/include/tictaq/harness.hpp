#ifndef TICTAQ_HARNESS_HPP
#define TICTAQ_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tictaq/csvio.hpp"
#include "tictaq/fitting.hpp"
#include "tictaq/optimizer.hpp"
#include "tictaq/runlog.hpp"
#include "tictaq/scenario.hpp"

namespace tictaq {

// One paired evaluation point on a timeline. For T1-only sweeps eps is 0 and
// ignored by the statistics.
struct EvalSample {
    double t = 0.0;
    int qubit = 0;
    std::string policy;  // dynamic | static | static_grid | local | global
    double v = 0.0;      // bias on the qubit's own line (or the common bias)
    double t1 = 0.0;
    double eps = 0.0;
};

struct Timelines {
    std::vector<EvalSample> evals;
    std::vector<double> iter_time;
    std::vector<std::vector<double>> v_opt;  // [iteration][qubit]
    double end_clock = 0.0;
    double measurement_cost = 0.0;
    double idle = 0.0;
    // Accumulates the same dt sequence the device clock receives, so
    // end_clock == accounted_clock bitwise when every advance is accounted.
    double accounted_clock = 0.0;
};

struct QubitStats {
    double mean_t1_dyn = 0.0, std_t1_dyn = 0.0;
    double mean_t1_stat = 0.0, std_t1_stat = 0.0;
    double mean_eps_dyn = 0.0, std_eps_dyn = 0.0;
    double mean_eps_stat = 0.0, std_eps_stat = 0.0;
    double threshold = 0.0;  // Tukey fence of the dynamic gate-error sample
    double outlier_frac_dyn = 0.0, outlier_frac_stat = 0.0;
};

struct BiasStats {
    double v = 0.0;
    double mean_t1 = 0.0;
    double std_t1 = 0.0;
    std::size_t n = 0;
};

struct RunSummary {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string kind;  // stability | static-grid | multiqubit
    std::size_t qubit_count = 0;
    std::vector<QubitStats> qubits;
    double device_mean_t1_dyn = 0.0, device_mean_t1_stat = 0.0;
    double device_mean_eps_dyn = 0.0, device_mean_eps_stat = 0.0;
    double eps_ratio = 0.0;  // static over dynamic mean gate error
    double t1_ratio = 0.0;   // dynamic over static mean T1
    std::vector<int> outcount_dyn, outcount_stat;  // outlier qubits per iteration
    double frac_ge1_dyn = 0.0, frac_ge1_stat = 0.0;
    double frac_ge2_dyn = 0.0, frac_ge2_stat = 0.0;
    std::vector<BiasStats> bias_grid;  // per static/global bias
    double local_device_mean_t1 = 0.0;
    Timelines timelines;
};

namespace detail {

inline EvalSample paired_eval(DeviceModel& dev, int q, const std::vector<double>& v,
                              const std::string& policy, const std::string& tag) {
    EvalSample e;
    e.t = dev.clock();
    e.qubit = q;
    e.policy = policy;
    e.v = v[static_cast<std::size_t>(q)];
    e.eps = dev.measure_rb_error(static_cast<std::size_t>(q), v, tag);
    e.t1 = dev.measure_t1(static_cast<std::size_t>(q), v, tag);
    return e;
}

inline std::vector<double> collect(const std::vector<EvalSample>& evals, int q,
                                   const std::string& policy, bool eps) {
    std::vector<double> out;
    for (const auto& e : evals)
        if (e.qubit == q && e.policy == policy) out.push_back(eps ? e.eps : e.t1);
    return out;
}

}  // namespace detail

// Derives every reported number from the collected timelines; runs and
// log-replays share this path so exports agree exactly.
inline RunSummary compute_summary(const Scenario& sc, const std::string& kind, Timelines tl) {
    RunSummary s;
    s.scenario = sc.name;
    s.seed = sc.seed;
    s.kind = kind;
    s.qubit_count = sc.qubits.size();

    std::vector<std::vector<double>> eps_dyn_series(s.qubit_count), eps_stat_series(s.qubit_count);
    double sum_t1_dyn = 0.0, sum_t1_stat = 0.0, sum_eps_dyn = 0.0, sum_eps_stat = 0.0;
    std::size_t n_dyn = 0, n_stat = 0;
    for (std::size_t q = 0; q < s.qubit_count; ++q) {
        QubitStats qs;
        const auto t1_dyn = detail::collect(tl.evals, static_cast<int>(q), "dynamic", false);
        const auto t1_stat = detail::collect(tl.evals, static_cast<int>(q), "static", false);
        eps_dyn_series[q] = detail::collect(tl.evals, static_cast<int>(q), "dynamic", true);
        eps_stat_series[q] = detail::collect(tl.evals, static_cast<int>(q), "static", true);
        if (!t1_dyn.empty()) {
            qs.mean_t1_dyn = mean(t1_dyn);
            qs.std_t1_dyn = stddev(t1_dyn);
            qs.mean_eps_dyn = mean(eps_dyn_series[q]);
            qs.std_eps_dyn = stddev(eps_dyn_series[q]);
            sum_t1_dyn += qs.mean_t1_dyn * static_cast<double>(t1_dyn.size());
            sum_eps_dyn += qs.mean_eps_dyn * static_cast<double>(t1_dyn.size());
            n_dyn += t1_dyn.size();
        }
        if (!t1_stat.empty()) {
            qs.mean_t1_stat = mean(t1_stat);
            qs.std_t1_stat = stddev(t1_stat);
            qs.mean_eps_stat = mean(eps_stat_series[q]);
            qs.std_eps_stat = stddev(eps_stat_series[q]);
            sum_t1_stat += qs.mean_t1_stat * static_cast<double>(t1_stat.size());
            sum_eps_stat += qs.mean_eps_stat * static_cast<double>(t1_stat.size());
            n_stat += t1_stat.size();
        }
        // Outlier screening against the dynamic-policy distribution only.
        if (eps_dyn_series[q].size() >= 4) {
            qs.threshold = outlier_threshold(eps_dyn_series[q]);
            auto frac_above = [&](const std::vector<double>& xs) {
                if (xs.empty()) return 0.0;
                std::size_t k = 0;
                for (double x : xs)
                    if (x > qs.threshold) ++k;
                return static_cast<double>(k) / static_cast<double>(xs.size());
            };
            qs.outlier_frac_dyn = frac_above(eps_dyn_series[q]);
            qs.outlier_frac_stat = frac_above(eps_stat_series[q]);
        }
        s.qubits.push_back(qs);
    }
    if (n_dyn > 0) {
        s.device_mean_t1_dyn = sum_t1_dyn / static_cast<double>(n_dyn);
        s.device_mean_eps_dyn = sum_eps_dyn / static_cast<double>(n_dyn);
    }
    if (n_stat > 0) {
        s.device_mean_t1_stat = sum_t1_stat / static_cast<double>(n_stat);
        s.device_mean_eps_stat = sum_eps_stat / static_cast<double>(n_stat);
    }
    if (s.device_mean_eps_dyn > 0.0) s.eps_ratio = s.device_mean_eps_stat / s.device_mean_eps_dyn;
    if (s.device_mean_t1_stat > 0.0) s.t1_ratio = s.device_mean_t1_dyn / s.device_mean_t1_stat;

    // Outlier-count timeline (one entry per schedule iteration).
    const std::size_t iters = eps_dyn_series.empty() ? 0 : eps_dyn_series.front().size();
    bool aligned = iters > 0;
    for (std::size_t q = 0; q < s.qubit_count; ++q)
        if (eps_dyn_series[q].size() != iters || eps_stat_series[q].size() != iters) aligned = false;
    if (aligned) {
        std::vector<double> thresholds;
        for (const auto& qs : s.qubits) thresholds.push_back(qs.threshold);
        s.outcount_dyn = count_outlier_qubits(eps_dyn_series, thresholds);
        s.outcount_stat = count_outlier_qubits(eps_stat_series, thresholds);
        auto frac_at_least = [&](const std::vector<int>& counts, int k) {
            if (counts.empty()) return 0.0;
            std::size_t n = 0;
            for (int c : counts)
                if (c >= k) ++n;
            return static_cast<double>(n) / static_cast<double>(counts.size());
        };
        s.frac_ge1_dyn = frac_at_least(s.outcount_dyn, 1);
        s.frac_ge1_stat = frac_at_least(s.outcount_stat, 1);
        s.frac_ge2_dyn = frac_at_least(s.outcount_dyn, 2);
        s.frac_ge2_stat = frac_at_least(s.outcount_stat, 2);
    }

    // Per-bias statistics for static-grid and global sweeps.
    std::map<double, std::vector<double>> by_bias;
    for (const auto& e : tl.evals)
        if (e.policy == "static_grid" || e.policy == "global") by_bias[e.v].push_back(e.t1);
    for (const auto& [v, xs] : by_bias)
        s.bias_grid.push_back({v, mean(xs), stddev(xs), xs.size()});

    std::vector<double> local_t1;
    for (const auto& e : tl.evals)
        if (e.policy == "local") local_t1.push_back(e.t1);
    if (!local_t1.empty()) s.local_device_mean_t1 = mean(local_t1);

    s.timelines = std::move(tl);
    return s;
}

namespace detail {

struct RunContext {
    DeviceModel device;
    Timelines tl;
    RunLogWriter* log = nullptr;

    RunContext(const Scenario& sc, RunLogWriter* log_writer) : device(sc.build_device()), log(log_writer) {
        device.set_record_sink([this](const MeasurementRecord& rec) {
            tl.measurement_cost += rec.duration;
            tl.accounted_clock += rec.duration;
            if (log && log->is_open()) log->write(rec);
        });
        const std::vector<double> base = sc.baseline_voltages();
        for (std::size_t q = 0; q < sc.qubits.size(); ++q) device.calibrate(q, base);
    }

    void idle_to(double target) {
        const double gap = target - device.clock();
        if (gap > 0.0) {
            device.advance_time(gap);
            tl.idle += gap;
            tl.accounted_clock += gap;
        }
    }

    void finish() {
        tl.end_clock = device.clock();
        if (log && log->is_open()) log->write_end(tl.end_clock, tl.measurement_cost, tl.idle);
    }
};

}  // namespace detail

// Fig. 3-style stability run: every period, re-optimize qubit 0 and evaluate
// gate error and T1 at both the fresh optimum and the static baseline on the
// same evolving bath.
inline RunSummary run_stability(const Scenario& sc, RunLogWriter* log = nullptr) {
    sc.validate();
    detail::RunContext ctx(sc, log);
    const std::vector<double> base = sc.baseline_voltages();
    OptimizerState state;
    const auto iterations = static_cast<std::size_t>(sc.total_duration / sc.iteration_period + 1e-9);
    for (std::size_t i = 0; i < iterations; ++i) {
        const double t0 = ctx.device.clock();
        ctx.tl.iter_time.push_back(t0);
        const IterationResult res = run_iteration(ctx.device, 0, state, sc.optimizer, base);
        if (log && log->is_open()) log->write_iteration(0, res);
        ctx.tl.v_opt.push_back({res.v_opt});
        const std::vector<double> v_dyn{res.v_opt};
        ctx.tl.evals.push_back(detail::paired_eval(ctx.device, 0, v_dyn, "dynamic", "eval_dynamic"));
        ctx.tl.evals.push_back(detail::paired_eval(ctx.device, 0, base, "static", "eval_static"));
        ctx.idle_to(t0 + sc.iteration_period);
    }
    ctx.finish();
    return compute_summary(sc, "stability", std::move(ctx.tl));
}

// Fig. 3c-style comparison: every period, re-optimize and then measure T1 at
// the fresh optimum and across a grid of static biases.
inline RunSummary run_static_grid(const Scenario& sc, int n_biases, RunLogWriter* log = nullptr) {
    sc.validate();
    if (n_biases < 2) throw std::invalid_argument("run_static_grid: need at least 2 biases");
    detail::RunContext ctx(sc, log);
    const std::vector<double> base = sc.baseline_voltages();
    const std::vector<double> biases =
        linspace(sc.optimizer.v_min, sc.optimizer.v_max, static_cast<std::size_t>(n_biases));
    OptimizerState state;
    const auto iterations = static_cast<std::size_t>(sc.total_duration / sc.iteration_period + 1e-9);
    for (std::size_t i = 0; i < iterations; ++i) {
        const double t0 = ctx.device.clock();
        ctx.tl.iter_time.push_back(t0);
        const IterationResult res = run_iteration(ctx.device, 0, state, sc.optimizer, base);
        if (log && log->is_open()) log->write_iteration(0, res);
        ctx.tl.v_opt.push_back({res.v_opt});
        const std::vector<double> v_dyn{res.v_opt};
        ctx.tl.evals.push_back(detail::paired_eval(ctx.device, 0, v_dyn, "dynamic", "eval_dynamic"));
        std::vector<double> v = base;
        for (double b : biases) {
            v[0] = b;
            EvalSample e;
            e.t = ctx.device.clock();
            e.qubit = 0;
            e.policy = "static_grid";
            e.v = b;
            e.t1 = ctx.device.measure_t1(0, v, "eval_static_grid");
            ctx.tl.evals.push_back(e);
        }
        ctx.idle_to(t0 + sc.iteration_period);
    }
    ctx.finish();
    return compute_summary(sc, "static-grid", std::move(ctx.tl));
}

// Fig. 4-style multi-qubit run: round-robin local optimization with paired
// dynamic/static evaluations each period, then a local-versus-global bias
// comparison using the final-iteration local voltages.
inline RunSummary run_multiqubit(const Scenario& sc, RunLogWriter* log = nullptr) {
    sc.validate();
    if (sc.qubits.size() < 2) throw std::invalid_argument("run_multiqubit: need at least 2 qubits");
    detail::RunContext ctx(sc, log);
    const std::size_t n_q = sc.qubits.size();
    const std::vector<double> base = sc.baseline_voltages();
    std::vector<double> v_local = base;
    std::vector<OptimizerState> states(n_q);
    const auto iterations = static_cast<std::size_t>(sc.total_duration / sc.iteration_period + 1e-9);
    for (std::size_t i = 0; i < iterations; ++i) {
        const double t0 = ctx.device.clock();
        ctx.tl.iter_time.push_back(t0);
        // Round-robin: each qubit is evaluated right after its own
        // optimization, the serialized stand-in for the concurrent
        // per-qubit measurement the schedule describes.
        for (std::size_t q = 0; q < n_q; ++q) {
            const IterationResult res = run_iteration(ctx.device, q, states[q], sc.optimizer, v_local);
            if (log && log->is_open()) log->write_iteration(static_cast<int>(q), res);
            v_local[q] = res.v_opt;
            ctx.tl.evals.push_back(
                detail::paired_eval(ctx.device, static_cast<int>(q), v_local, "dynamic", "eval_dynamic"));
            std::vector<double> v_stat = v_local;
            v_stat[q] = sc.baseline_voltage;
            ctx.tl.evals.push_back(
                detail::paired_eval(ctx.device, static_cast<int>(q), v_stat, "static", "eval_static"));
        }
        ctx.tl.v_opt.push_back(v_local);
        ctx.idle_to(t0 + sc.iteration_period);
    }

    // Local-versus-global comparison with the final-iteration local voltages.
    // Local-config samples are interleaved with every global bias so both
    // consume the same bath realization (paired design).
    auto sweep_t1 = [&](const std::vector<double>& v, const std::string& policy, double bias,
                        const std::string& tag) {
        for (std::size_t q = 0; q < n_q; ++q)
            for (int rep = 0; rep < sc.global_sweep.eval_repetitions; ++rep) {
                EvalSample e;
                e.t = ctx.device.clock();
                e.qubit = static_cast<int>(q);
                e.policy = policy;
                e.v = (policy == "local") ? v[q] : bias;
                e.t1 = ctx.device.measure_t1(q, v, tag);
                ctx.tl.evals.push_back(e);
            }
    };
    const std::vector<double> global_grid = linspace(
        sc.optimizer.v_min, sc.optimizer.v_max, static_cast<std::size_t>(sc.global_sweep.bias_points));
    for (double b : global_grid) {
        sweep_t1(std::vector<double>(n_q, b), "global", b, "eval_global");
        sweep_t1(v_local, "local", 0.0, "eval_local");
    }

    ctx.finish();
    return compute_summary(sc, "multiqubit", std::move(ctx.tl));
}

struct CrosstalkReport {
    std::vector<std::vector<double>> movement;  // [qubit][line], Hz
    std::vector<std::vector<bool>> flagged;
    double threshold = 0.0;
};

// Appendix-E-style scan: sweep one line at a time while monitoring every
// qubit's spectroscopy window; a pair is flagged when a linked dip trajectory
// moves more than the threshold. Diagonal pairs are the intended controls and
// always flagged.
inline CrosstalkReport run_crosstalk_scan(const Scenario& sc, RunLogWriter* log = nullptr) {
    sc.validate();
    Scenario scan_sc = sc;
    if (sc.crosstalk_scan.noiseless) scan_sc.noise.noiseless = true;
    detail::RunContext ctx(scan_sc, log);
    const std::size_t n_q = sc.qubits.size();
    const std::vector<double> v_grid = linspace(sc.optimizer.v_min, sc.optimizer.v_max,
                                                static_cast<std::size_t>(sc.crosstalk_scan.v_points));
    CrosstalkReport report;
    report.threshold = sc.crosstalk_scan.movement_threshold;
    report.movement.assign(n_q, std::vector<double>(n_q, 0.0));
    report.flagged.assign(n_q, std::vector<bool>(n_q, false));

    std::vector<std::vector<double>> f_grids(n_q);
    for (std::size_t q = 0; q < n_q; ++q)
        f_grids[q] = linspace(sc.qubits[q].f01 - sc.map_scan.f_halfwidth,
                              sc.qubits[q].f01 + sc.map_scan.f_halfwidth,
                              static_cast<std::size_t>(sc.map_scan.f_points));

    for (std::size_t l = 0; l < n_q; ++l) {
        std::vector<std::vector<std::vector<Dip>>> dips(n_q);  // [qubit][voltage]
        std::vector<double> v(n_q, 0.0);
        for (double bias : v_grid) {
            v[l] = bias;
            for (std::size_t q = 0; q < n_q; ++q) {
                const std::vector<double> slice = ctx.device.stark_spectroscopy(
                    q, v, f_grids[q], sc.optimizer.t_delay, sc.optimizer.shots, "crosstalk_scan");
                const int shots = scan_sc.noise.noiseless ? 0 : sc.optimizer.shots;
                dips[q].push_back(detect_dips(f_grids[q], slice, shots));
            }
        }
        for (std::size_t q = 0; q < n_q; ++q) {
            LinkConfig link;
            link.max_jump = 0.2 * (f_grids[q].back() - f_grids[q].front());
            double worst = 0.0;
            for (const Trajectory& t : link_trajectories(v_grid, dips[q], link)) {
                const auto [lo, hi] = std::minmax_element(t.frequencies.begin(), t.frequencies.end());
                worst = std::max(worst, *hi - *lo);
            }
            report.movement[q][l] = worst;
            report.flagged[q][l] = (q == l) || worst > report.threshold;
        }
    }
    ctx.finish();
    return report;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline void export_crosstalk_csv(const CrosstalkReport& report, const std::string& path) {
    CsvWriter csv(path, {"qubit", "line", "movement_hz", "flagged"});
    for (std::size_t q = 0; q < report.movement.size(); ++q)
        for (std::size_t l = 0; l < report.movement[q].size(); ++l)
            csv.row(std::vector<std::string>{std::to_string(q), std::to_string(l),
                                             format_number(report.movement[q][l]),
                                             report.flagged[q][l] ? "1" : "0"});
}

inline json summary_to_json(const RunSummary& s) {
    json j;
    j["schema"] = "tictaq-summary/1";
    j["scenario"] = s.scenario;
    j["seed"] = s.seed;
    j["kind"] = s.kind;
    j["qubits"] = json::array();
    for (std::size_t q = 0; q < s.qubits.size(); ++q) {
        const QubitStats& qs = s.qubits[q];
        json jq;
        jq["qubit"] = q;
        jq["mean_t1_dynamic"] = qs.mean_t1_dyn;
        jq["std_t1_dynamic"] = qs.std_t1_dyn;
        jq["mean_t1_static"] = qs.mean_t1_stat;
        jq["std_t1_static"] = qs.std_t1_stat;
        jq["mean_rb_error_dynamic"] = qs.mean_eps_dyn;
        jq["std_rb_error_dynamic"] = qs.std_eps_dyn;
        jq["mean_rb_error_static"] = qs.mean_eps_stat;
        jq["std_rb_error_static"] = qs.std_eps_stat;
        jq["outlier_threshold"] = qs.threshold;
        jq["outlier_fraction_dynamic"] = qs.outlier_frac_dyn;
        jq["outlier_fraction_static"] = qs.outlier_frac_stat;
        j["qubits"].push_back(jq);
    }
    j["device_mean_t1_dynamic"] = s.device_mean_t1_dyn;
    j["device_mean_t1_static"] = s.device_mean_t1_stat;
    j["device_mean_rb_error_dynamic"] = s.device_mean_eps_dyn;
    j["device_mean_rb_error_static"] = s.device_mean_eps_stat;
    j["rb_error_ratio_static_over_dynamic"] = s.eps_ratio;
    j["t1_ratio_dynamic_over_static"] = s.t1_ratio;
    j["outlier_iter_fraction_ge1_dynamic"] = s.frac_ge1_dyn;
    j["outlier_iter_fraction_ge1_static"] = s.frac_ge1_stat;
    j["outlier_iter_fraction_ge2_dynamic"] = s.frac_ge2_dyn;
    j["outlier_iter_fraction_ge2_static"] = s.frac_ge2_stat;
    if (!s.bias_grid.empty()) {
        j["bias_grid"] = json::array();
        for (const BiasStats& b : s.bias_grid) {
            json jb;
            jb["v"] = b.v;
            jb["mean_t1"] = b.mean_t1;
            jb["std_t1"] = b.std_t1;
            jb["n"] = b.n;
            j["bias_grid"].push_back(jb);
        }
    }
    if (s.local_device_mean_t1 > 0.0) j["local_device_mean_t1"] = s.local_device_mean_t1;
    j["virtual_duration"] = s.timelines.end_clock;
    j["measurement_cost"] = s.timelines.measurement_cost;
    j["idle"] = s.timelines.idle;
    return j;
}

// Writes summary.json plus the timeline, CDF and per-bias CSV tables.
inline void export_summary_files(const RunSummary& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/summary.json", std::ios::trunc);
        if (!out) throw std::runtime_error("export: cannot open summary.json");
        out << summary_to_json(s).dump(2) << "\n";
    }
    {
        CsvWriter csv(dir + "/timeline.csv", {"t", "qubit", "policy", "v", "t1_s", "rb_error", "outlier"});
        for (const EvalSample& e : s.timelines.evals) {
            const bool has_threshold = e.qubit >= 0 &&
                                       static_cast<std::size_t>(e.qubit) < s.qubits.size() &&
                                       (e.policy == "dynamic" || e.policy == "static");
            const bool outlier = has_threshold && e.eps > s.qubits[e.qubit].threshold;
            csv.row(std::vector<std::string>{format_number(e.t), std::to_string(e.qubit), e.policy,
                                             format_number(e.v), format_number(e.t1),
                                             format_number(e.eps), outlier ? "1" : "0"});
        }
    }
    for (const bool eps : {false, true}) {
        CsvWriter csv(dir + (eps ? "/cdf_rb_error.csv" : "/cdf_t1.csv"),
                      {"qubit", "policy", eps ? "rb_error" : "t1_s", "cumulative_fraction"});
        for (std::size_t q = 0; q < s.qubit_count; ++q)
            for (const char* policy : {"dynamic", "static"}) {
                auto xs = detail::collect(s.timelines.evals, static_cast<int>(q), policy, eps);
                if (xs.empty()) continue;
                std::sort(xs.begin(), xs.end());
                for (std::size_t i = 0; i < xs.size(); ++i)
                    csv.row(std::vector<std::string>{
                        std::to_string(q), policy, format_number(xs[i]),
                        format_number(static_cast<double>(i + 1) / static_cast<double>(xs.size()))});
            }
    }
    if (!s.bias_grid.empty()) {
        CsvWriter csv(dir + "/bias_grid.csv", {"v", "mean_t1_s", "std_t1_s", "n"});
        for (const BiasStats& b : s.bias_grid)
            csv.row(std::vector<std::string>{format_number(b.v), format_number(b.mean_t1),
                                             format_number(b.std_t1), std::to_string(b.n)});
    }
    if (!s.outcount_dyn.empty()) {
        CsvWriter csv(dir + "/outlier_counts.csv", {"t", "count_dynamic", "count_static"});
        for (std::size_t i = 0; i < s.outcount_dyn.size(); ++i)
            csv.row(std::vector<std::string>{format_number(s.timelines.iter_time[i]),
                                             std::to_string(s.outcount_dyn[i]),
                                             std::to_string(s.outcount_stat[i])});
    }
}

// Rebuilds the timelines from a JSON-lines run log; produces the same summary
// as the live run because both go through compute_summary.
inline RunSummary summary_from_log(const Scenario& sc, const std::string& kind,
                                   const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("runlog: cannot open '" + log_path + "'");
    Timelines tl;
    std::string line;
    bool header_seen = false;
    EvalSample pending;
    bool have_pending = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (!header_seen) {
            if (j.value("schema", "") != "tictaq-runlog/1")
                throw std::invalid_argument("runlog: unsupported schema");
            header_seen = true;
            continue;
        }
        const std::string type = j.value("type", "");
        if (type == "iteration") {
            const auto qubit = j.at("qubit").get<std::size_t>();
            if (qubit == 0) {
                tl.iter_time.push_back(j.at("t").get<double>());
                tl.v_opt.emplace_back();
            }
            if (!tl.v_opt.empty()) tl.v_opt.back().push_back(j.at("v_opt").get<double>());
        } else if (type == "end") {
            tl.end_clock = j.at("clock").get<double>();
            tl.measurement_cost = j.at("measurement_cost").get<double>();
            tl.idle = j.at("idle").get<double>();
        } else if (type == "measurement") {
            const std::string tag = j.value("tag", "");
            const std::string kind_str = j.value("kind", "");
            auto policy_of = [](const std::string& t) -> std::string {
                if (t == "eval_dynamic") return "dynamic";
                if (t == "eval_static") return "static";
                if (t == "eval_static_grid") return "static_grid";
                if (t == "eval_local") return "local";
                if (t == "eval_global") return "global";
                return "";
            };
            const std::string policy = policy_of(tag);
            if (policy.empty()) continue;
            const int qubit = j.at("qubit").get<int>();
            const auto voltages = j.at("v").get<std::vector<double>>();
            const double value = j.at("values").get<std::vector<double>>().at(0);
            if (policy == "dynamic" || policy == "static") {
                // Paired RB then T1 with the same tag.
                if (kind_str == "rb") {
                    pending = EvalSample{};
                    pending.t = j.at("t").get<double>();
                    pending.qubit = qubit;
                    pending.policy = policy;
                    pending.v = voltages.at(static_cast<std::size_t>(qubit));
                    pending.eps = value;
                    have_pending = true;
                } else if (kind_str == "t1" && have_pending && pending.qubit == qubit &&
                           pending.policy == policy) {
                    pending.t1 = value;
                    tl.evals.push_back(pending);
                    have_pending = false;
                }
            } else if (kind_str == "t1") {
                EvalSample e;
                e.t = j.at("t").get<double>();
                e.qubit = qubit;
                e.policy = policy;
                e.v = (policy == "global") ? voltages.at(0)
                                           : voltages.at(static_cast<std::size_t>(qubit));
                e.t1 = value;
                tl.evals.push_back(e);
            }
        }
    }
    return compute_summary(sc, kind, std::move(tl));
}

}  // namespace tictaq

#endif
