// Acceptance suite: end-to-end checks against the shipped scenarios and
// synthetic ground truth. Prints one pass/fail line per criterion and exits
// nonzero if any fail.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "synthetic.hpp"
#include "tictaq/circuit.hpp"
#include "tictaq/csvio.hpp"
#include "tictaq/fitting.hpp"
#include "tictaq/harness.hpp"
#include "tictaq/optimizer.hpp"
#include "tictaq/rng.hpp"
#include "tictaq/runlog.hpp"
#include "tictaq/scenario.hpp"
#include "tictaq/stm.hpp"

using namespace tictaq;

namespace {

const std::string kScenarioDir = TICTAQ_SCENARIO_DIR;

struct Check {
    int id;
    std::string name;
    double limit_s;
    std::function<bool(std::string&)> run;
};

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "tictaq_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Circuit correctness
// ---------------------------------------------------------------------------
bool check_circuit(std::string& detail) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> cap(0.05e-15, 120e-15);
    std::uniform_real_distribution<double> cc(0.1e-15, 4e-15);
    std::uniform_real_distribution<double> line(5.0, 250.0);
    std::uniform_real_distribution<double> freq(1e9, 10e9);

    double worst_equiv = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        ControlLineCircuit c;
        c.c_q = cap(gen);
        c.c_c1 = cap(gen);
        c.c_c2 = cap(gen);
        c.c_g1 = cap(gen);
        c.c_g2 = cap(gen);
        c.c_gc = cap(gen);
        c.z0 = line(gen);
        const double omega = kTwoPi * freq(gen);
        const std::complex<double> j(0.0, 1.0);
        const std::complex<double> z1 = 1.0 / (j * omega * c.c_c1);
        const std::complex<double> z2 = 1.0 / (j * omega * c.c_c2);
        const std::complex<double> z3 = environment_impedance(c, omega);
        const ReducedNetwork d = y_delta(c, omega);
        auto parallel = [](std::complex<double> a, std::complex<double> b) {
            return a * b / (a + b);
        };
        const std::complex<double> pairs[3][2] = {
            {z1 + z2, parallel(d.z_env_prime, d.z_b + d.z_a)},
            {z1 + z3, parallel(d.z_b, d.z_env_prime + d.z_a)},
            {z2 + z3, parallel(d.z_a, d.z_env_prime + d.z_b)},
        };
        for (const auto& p : pairs)
            worst_equiv = std::max(worst_equiv, std::abs(p[1] - p[0]) / std::abs(p[0]));
    }
    if (worst_equiv > 1e-10) {
        detail = "network equivalence worst rel " + format_number(worst_equiv);
        return false;
    }

    double worst_closed = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        ControlLineCircuit c;
        c.c_q = cap(gen);
        c.c_g1 = c.c_g2 = cap(gen);
        c.c_gc = cap(gen);
        c.z0 = line(gen);
        const double c_c = cc(gen);
        const double delta = (trial % 2 == 0) ? 1e-2 : 1e-3;
        c.c_c1 = c_c * (1.0 + delta);
        c.c_c2 = c_c * (1.0 - delta);
        const double omega = kTwoPi * freq(gen);
        const PurcellResult general = purcell_rate(c, omega);
        const double closed = symmetric_purcell_rate(delta, c_c, c.c_g1, general.c_sigma, omega,
                                                     environment_impedance(c, omega));
        worst_closed = std::max(worst_closed, std::abs(closed - general.gamma) / general.gamma);
    }
    if (worst_closed > 1e-6) {
        detail = "closed form worst rel " + format_number(worst_closed);
        return false;
    }

    ControlLineCircuit rep;
    rep.c_q = 70e-15;
    rep.c_g1 = rep.c_g2 = 40e-15;
    rep.c_gc = 12e-15;
    rep.z0 = 50.0;
    const double omega = kTwoPi * 5e9;
    const double c_sigma = [&] {
        ControlLineCircuit c = rep;
        c.c_c1 = c.c_c2 = 0.5e-15;
        return shunt_capacitance(c, omega);
    }();
    if (symmetric_purcell_rate(0.0, 0.5e-15, 40e-15, c_sigma, omega,
                               environment_impedance(rep, omega)) != 0.0) {
        detail = "closed form not exactly zero at delta = 0";
        return false;
    }
    auto general_gamma = [&](double delta) {
        ControlLineCircuit c = rep;
        c.c_c1 = 0.5e-15 * (1.0 + delta);
        c.c_c2 = 0.5e-15 * (1.0 - delta);
        return purcell_rate(c, omega).gamma;
    };
    if (!(general_gamma(0.0) < 1e-6 * general_gamma(0.01))) {
        detail = "general path gamma(0) not negligible";
        return false;
    }
    const double r1 = general_gamma(1e-3) / 1e-6;
    const double r2 = general_gamma(1e-2) / 1e-4;
    if (std::abs(r1 - r2) > 1e-6 * std::abs(r2)) {
        detail = "gamma/delta^2 not constant: " + format_number(std::abs(r1 - r2) / r2);
        return false;
    }
    detail = "equivalence worst " + format_number(worst_equiv) + ", closed-form worst " +
             format_number(worst_closed);
    return true;
}

// ---------------------------------------------------------------------------
// 2. STM correctness
// ---------------------------------------------------------------------------
bool check_stm(std::string& detail) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> delta0_dist(1e8, 8e9);
    std::uniform_real_distribution<double> eps_dist(-5e9, 5e9);
    std::uniform_real_distribution<double> sens_dist(1e6, 3e8);
    std::uniform_real_distribution<double> v_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> x_dist(0.0, 20.0);

    const double h = 1e-4;
    for (int trial = 0; trial < 10000; ++trial) {
        TlsDefect d;
        d.delta0 = delta0_dist(gen);
        d.eps0 = eps_dist(gen);
        const double sens = sens_dist(gen) * (trial % 2 == 0 ? 1.0 : -1.0);
        d.sensitivity = {sens};
        d.coupling_g = 1e5;
        d.gamma1_tls = 1e4;
        d.gamma2_tls = 1e6;

        const std::vector<double> v{v_dist(gen)};
        const double f = tls_frequency(d, v);
        if (!(f >= d.delta0)) {
            detail = "frequency below delta0";
            return false;
        }
        const double v0 = -d.eps0 / sens;
        const double x = x_dist(gen);
        const std::vector<double> lhs{v0 + x}, rhs{v0 - x};
        const double fl = tls_frequency(d, lhs), fr = tls_frequency(d, rhs);
        if (std::abs(fl - fr) > 1e-9 * fl) {
            detail = "vertex symmetry violated";
            return false;
        }
        const std::vector<double> vertex{v0};
        if (std::abs(tls_frequency(d, vertex) - d.delta0) > 1e-6 * d.delta0) {
            detail = "vertex frequency is not delta0";
            return false;
        }
        const double analytic = tuning_slope(d, v, 0);
        const std::vector<double> up{v[0] + h}, dn{v[0] - h};
        const double numeric = (tls_frequency(d, up) - tls_frequency(d, dn)) / (2.0 * h);
        const double err = std::abs(numeric - analytic);
        if (std::abs(analytic) > 1.0 ? err > 1e-6 * std::abs(analytic) : err > 1e-3) {
            detail = "slope mismatch " + format_number(err);
            return false;
        }
    }

    const double gamma_e = sensitivity_from_dipole({3.0, 130.0, 1.0});
    if (std::abs(gamma_e - 3.93e6) > 0.005 * 3.93e6) {
        detail = "dipole sensitivity " + format_number(gamma_e) + " Hz/V not 3.93 MHz/V +- 0.5%";
        return false;
    }
    detail = "10000 defects, gamma_E(3 debye, 130 V/m) = " + format_number(gamma_e / 1e6) + " MHz/V";
    return true;
}

// ---------------------------------------------------------------------------
// 3. Fitter recovery
// ---------------------------------------------------------------------------
bool check_fitter(std::string& detail) {
    using testing::MapSpec;
    using testing::PlantedDefect;
    using testing::planted_map;

    const double f01 = 5e9;
    MapSpec spec;
    spec.v_grid = linspace(-10.0, 10.0, 51);
    spec.f_grid = linspace(f01 - 5e6, f01 + 5e6, 9);
    spec.shots = 1000;

    RandomStream rng(404);
    std::vector<double> err_gamma, err_delta0, err_v0;
    int fitted = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PlantedDefect d;
        d.gamma_e = 10e6 + 30e6 * rng.uniform();
        d.delta0 = f01 + (-4e6 + 6e6 * rng.uniform());
        d.v0 = (1.0 + 5.0 * rng.uniform()) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        d.coupling = 4e5;
        d.gamma2 = 2e6;
        const SpectroscopyMap map = planted_map({d}, spec, &rng);
        const FitReport report = fit_report(map);
        if (report.fits.empty()) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < report.fits.size(); ++i)
            if (report.fits[i].n_points > report.fits[best].n_points) best = i;
        const HyperbolaFit& f = report.fits[best];
        ++fitted;
        err_gamma.push_back(std::abs(f.gamma_e - d.gamma_e) / d.gamma_e);
        err_delta0.push_back(std::abs(f.delta0 - d.delta0) / d.delta0);
        err_v0.push_back(std::abs(f.v0 - d.v0) / std::abs(d.v0));
    }
    if (fitted < 100) {
        detail = "only " + std::to_string(fitted) + "/100 maps produced a fit";
        return false;
    }
    std::ostringstream msg;
    for (auto& [name, errs] : {std::pair<const char*, std::vector<double>&>{"gamma_e", err_gamma},
                               {"delta0", err_delta0},
                               {"v0", err_v0}}) {
        const double med = quantile(errs, 0.5);
        const double p90 = quantile(errs, 0.9);
        msg << name << " med " << format_number(med * 100) << "% p90 "
            << format_number(p90 * 100) << "%; ";
        if (med > 0.02 || p90 > 0.05) {
            detail = std::string(name) + " recovery out of tolerance: median " +
                     format_number(med * 100) + "%, p90 " + format_number(p90 * 100) + "%";
            return false;
        }
    }

    // Eleven planted tuning curves must come back as exactly eleven tracks.
    std::vector<PlantedDefect> defects;
    const double vertices[11] = {-8.0, -6.5, -5.0, -3.5, -2.0, 0.0, 1.5, 3.0, 4.5, 6.5, 8.0};
    const double slopes[11] = {9e6, 12e6, 7e6, 15e6, 10e6, 8e6, 14e6, 11e6, 9e6, 13e6, 10e6};
    const double offs[11] = {-45e6, -28e6, -12e6, 2e6, 18e6, -38e6, 30e6, -20e6, 8e6, 40e6, -4e6};
    for (int i = 0; i < 11; ++i)
        defects.push_back({slopes[i], f01 + offs[i], vertices[i], 2e5, 4e6});
    MapSpec wide;
    wide.v_grid = linspace(-10.0, 10.0, 81);
    wide.f_grid = linspace(f01 - 60e6, f01 + 60e6, 241);
    FitReportConfig cfg;
    cfg.link.max_jump = 8e6;
    const FitReport eleven = fit_report(planted_map(defects, wide), cfg);
    if (eleven.trajectories.size() != 11) {
        detail = "11-defect map produced " + std::to_string(eleven.trajectories.size()) +
                 " trajectories";
        return false;
    }
    detail = msg.str() + "11-defect map -> 11 trajectories";
    return true;
}

// ---------------------------------------------------------------------------
// 4. Optimizer against the brute-force oracle
// ---------------------------------------------------------------------------
bool check_optimizer_oracle(std::string& detail) {
    const OptimizerConfig cfg = OptimizerConfig::defaults();
    double worst = 1.0;
    for (int k = 0; k < 50; ++k) {
        RandomStream draw(1000 + k);
        QubitSite site;
        site.f01 = 5e9;
        site.gamma0 = 1.0 / 60e-6;
        site.gamma_phi0 = 1e4;
        site.t_gate = 30e-9;
        std::vector<BathDefect> bath;
        const int n_def = 3 + k % 4;
        for (int j = 0; j < n_def; ++j) {
            BathDefect d;
            const double off = (3e6 + 37e6 * draw.uniform());
            d.tls.delta0 = site.f01 - off;
            const double eps_star = std::sqrt(site.f01 * site.f01 - d.tls.delta0 * d.tls.delta0);
            d.tls.eps0 = eps_star * (0.2 + 1.1 * draw.uniform()) *
                         (draw.uniform() < 0.5 ? -1.0 : 1.0);
            d.tls.sensitivity = {(25e6 + 45e6 * draw.uniform()) *
                                 (draw.uniform() < 0.5 ? -1.0 : 1.0)};
            d.tls.coupling_g = 3e4 + 4e4 * draw.uniform();
            d.tls.gamma1_tls = 1e4;
            d.tls.gamma2_tls = 0.7e6 + 1.3e6 * draw.uniform();
            bath.push_back(d);
        }
        DeviceModel device({site}, {bath}, {}, 9000 + static_cast<std::uint64_t>(k));
        OptimizerState state;
        const std::vector<double> base{0.0};
        const IterationResult res = run_iteration(device, 0, state, cfg, base);

        auto true_t1 = [&](double v) {
            const std::vector<double> vv{v};
            return 1.0 / device.relaxation_rate(0, vv, device.qubit_frequency(0, vv));
        };
        double best = 0.0;
        for (double v : cfg.v_grid) best = std::max(best, true_t1(v));
        const double achieved = true_t1(res.v_opt) / best;
        worst = std::min(worst, achieved);
        if (achieved < 0.98) {
            detail = "scenario " + std::to_string(k) + ": achieved " +
                     format_number(achieved * 100) + "% of the oracle optimum";
            return false;
        }
    }
    detail = "50 frozen baths, worst achieved " + format_number(worst * 100) + "% of oracle";
    return true;
}

// ---------------------------------------------------------------------------
// 5. Stability reproduction on the shipped single-qubit scenario
// ---------------------------------------------------------------------------
bool check_stability(std::string& detail) {
    const Scenario sc = load_scenario(kScenarioDir + "/single_qubit_stability.json");
    const RunSummary s = run_stability(sc);
    const QubitStats& q = s.qubits.at(0);
    std::ostringstream msg;
    msg << "rb-error ratio " << format_number(s.eps_ratio) << ", outlier frac dyn "
        << format_number(q.outlier_frac_dyn) << " stat " << format_number(q.outlier_frac_stat);
    detail = msg.str();
    if (!(s.eps_ratio >= 2.0)) return false;
    if (!(q.outlier_frac_dyn <= 0.05)) return false;
    if (!(q.outlier_frac_stat >= 0.20)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// 6. Multi-qubit reproduction on the shipped six-qubit scenario
// ---------------------------------------------------------------------------
bool check_multiqubit(std::string& detail) {
    const Scenario sc = load_scenario(kScenarioDir + "/six_qubit_parallel.json");
    const RunSummary s = run_multiqubit(sc);
    std::ostringstream msg;
    msg << "ge1 dyn " << format_number(s.frac_ge1_dyn) << " stat " << format_number(s.frac_ge1_stat)
        << ", ge2 dyn " << format_number(s.frac_ge2_dyn) << ", T1 ratio "
        << format_number(s.t1_ratio) << ", local " << format_number(s.local_device_mean_t1 * 1e6)
        << " us";
    detail = msg.str();
    if (!(s.frac_ge1_stat >= 4.0 * s.frac_ge1_dyn)) return false;
    if (!(s.frac_ge2_dyn == 0.0)) return false;
    if (!(s.t1_ratio >= 1.10)) return false;
    for (const BiasStats& b : s.bias_grid)
        if (!(s.local_device_mean_t1 >= b.mean_t1)) {
            detail = msg.str() + "; global bias " + format_number(b.v) + " beats local";
            return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// 7. Crosstalk scan on the planted scenario
// ---------------------------------------------------------------------------
bool check_crosstalk(std::string& detail) {
    const Scenario sc = load_scenario(kScenarioDir + "/planted_crosstalk.json");
    const CrosstalkReport report = run_crosstalk_scan(sc);
    int planted = 0, recovered = 0, false_pos = 0;
    for (std::size_t q = 0; q < sc.qubits.size(); ++q)
        for (std::size_t l = 0; l < sc.qubits.size(); ++l) {
            const bool expected = (q == l) || sc.crosstalk[q][l] != 0.0;
            if (expected && q != l) ++planted;
            if (report.flagged[q][l] && !expected) ++false_pos;
            if (report.flagged[q][l] && expected && q != l) ++recovered;
            if (expected != report.flagged[q][l]) {
                detail = "pair (" + std::to_string(q) + "," + std::to_string(l) +
                         ") flagged=" + (report.flagged[q][l] ? "1" : "0") + " expected " +
                         (expected ? "1" : "0");
                return false;
            }
        }
    detail = "recovered " + std::to_string(recovered) + "/" + std::to_string(planted) +
             " planted pairs, " + std::to_string(false_pos) + " false positives";
    return true;
}

// ---------------------------------------------------------------------------
// 8. Determinism of logs and reports
// ---------------------------------------------------------------------------
bool check_determinism(std::string& detail) {
    const auto dir = work_dir();
    Scenario sc = load_scenario(kScenarioDir + "/single_qubit_stability.json");
    sc.total_duration = 8.0 * sc.iteration_period;  // short rerun, same machinery

    std::vector<std::string> digests;
    for (const char* run : {"da", "db"}) {
        const std::string out = (dir / run).string();
        std::filesystem::create_directories(out);
        RunLogWriter log(out + "/runlog.jsonl", sc.name, sc.seed, "stability");
        const RunSummary s = run_stability(sc, &log);
        export_summary_files(s, out);
        std::string all;
        for (const char* f : {"/runlog.jsonl", "/summary.json", "/timeline.csv", "/cdf_t1.csv",
                              "/cdf_rb_error.csv", "/outlier_counts.csv"})
            all += file_bytes(out + f);
        digests.push_back(all);
    }
    if (digests[0] != digests[1] || digests[0].empty()) {
        detail = "stability rerun outputs differ";
        return false;
    }

    const Scenario ct = load_scenario(kScenarioDir + "/planted_crosstalk.json");
    std::vector<std::string> ct_bytes;
    for (const char* run : {"ca", "cb"}) {
        const std::string out = (dir / run).string();
        std::filesystem::create_directories(out);
        RunLogWriter log(out + "/runlog.jsonl", ct.name, ct.seed, "crosstalk");
        const CrosstalkReport rep = run_crosstalk_scan(ct, &log);
        export_crosstalk_csv(rep, out + "/crosstalk_matrix.csv");
        ct_bytes.push_back(file_bytes(out + "/runlog.jsonl") +
                           file_bytes(out + "/crosstalk_matrix.csv"));
    }
    if (ct_bytes[0] != ct_bytes[1] || ct_bytes[0].empty()) {
        detail = "crosstalk rerun outputs differ";
        return false;
    }
    detail = "byte-identical logs and reports across reruns";
    return true;
}

}  // namespace

int main() {
    const std::vector<Check> checks = {
        {1, "circuit correctness", 10.0, check_circuit},
        {2, "stm correctness", 5.0, check_stm},
        {3, "fitter recovery", 60.0, check_fitter},
        {4, "optimizer vs oracle", 60.0, check_optimizer_oracle},
        {5, "stability reproduction", 300.0, check_stability},
        {6, "multi-qubit reproduction", 900.0, check_multiqubit},
        {7, "crosstalk scan", 60.0, check_crosstalk},
        {8, "determinism", 300.0, check_determinism},
    };

    int failures = 0;
    for (const Check& c : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > c.limit_s) {
            ok = false;
            detail += " [exceeded " + format_number(c.limit_s) + " s budget]";
        }
        std::printf("[%s] criterion %d: %s (%.2f s) - %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), elapsed, detail.c_str());
        if (!ok) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", checks.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
