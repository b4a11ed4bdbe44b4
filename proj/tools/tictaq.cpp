// Command-line front end: scenario-driven simulation, optimization runs,
// spectroscopy fitting, crosstalk scans, circuit design sweeps and report
// export. All randomness derives from the scenario seed; reruns with the
// same seed are byte-identical.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tictaq/circuit.hpp"
#include "tictaq/csvio.hpp"
#include "tictaq/harness.hpp"
#include "tictaq/quantity.hpp"
#include "tictaq/runlog.hpp"
#include "tictaq/scenario.hpp"

namespace {

using namespace tictaq;

struct GlobalOpts {
    std::string scenario_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir = "out";
};

Scenario load(const GlobalOpts& g) {
    if (g.scenario_path.empty()) throw CLI::ValidationError("--scenario is required");
    Scenario sc = load_scenario(g.scenario_path);
    if (g.seed_override) sc.seed = *g.seed_override;
    return sc;
}

int cmd_simulate(const GlobalOpts& g, int qubit) {
    const Scenario sc = load(g);
    std::filesystem::create_directories(g.out_dir);
    RunLogWriter log(g.out_dir + "/runlog.jsonl", sc.name, sc.seed, "simulate");
    DeviceModel device = sc.build_device();
    double cost = 0.0;
    device.set_record_sink([&](const MeasurementRecord& rec) {
        cost += rec.duration;
        log.write(rec);
    });
    const std::vector<double> v_grid = linspace(sc.optimizer.v_min, sc.optimizer.v_max,
                                                static_cast<std::size_t>(sc.map_scan.v_points));
    const std::vector<double> base = sc.baseline_voltages();
    for (std::size_t q = 0; q < sc.qubits.size(); ++q) {
        if (qubit >= 0 && static_cast<std::size_t>(qubit) != q) continue;
        const std::vector<double> f_grid =
            linspace(sc.qubits[q].f01 - sc.map_scan.f_halfwidth,
                     sc.qubits[q].f01 + sc.map_scan.f_halfwidth,
                     static_cast<std::size_t>(sc.map_scan.f_points));
        const SpectroscopyMap map = device.acquire_map(q, v_grid, f_grid, sc.optimizer.t_delay,
                                                       sc.optimizer.shots, base, "map_scan");
        write_map_csv(map, g.out_dir + "/map_q" + std::to_string(q) + ".csv");
        std::cout << "wrote " << g.out_dir << "/map_q" << q << ".csv\n";
    }
    log.write_end(device.clock(), cost, 0.0);
    return 0;
}

int cmd_optimize(const GlobalOpts& g, std::string mode, int grid_biases) {
    const Scenario sc = load(g);
    std::filesystem::create_directories(g.out_dir);
    if (mode == "auto") mode = (sc.qubits.size() > 1) ? "multiqubit" : "stability";
    RunLogWriter log(g.out_dir + "/runlog.jsonl", sc.name, sc.seed, mode);
    RunSummary summary;
    if (mode == "stability") {
        summary = run_stability(sc, &log);
    } else if (mode == "static-grid") {
        summary = run_static_grid(sc, grid_biases, &log);
    } else if (mode == "multiqubit") {
        summary = run_multiqubit(sc, &log);
    } else {
        throw CLI::ValidationError("--mode must be stability, static-grid, multiqubit or auto");
    }
    export_summary_files(summary, g.out_dir);
    std::cout << "mode " << mode << ": mean T1 dynamic "
              << format_number(summary.device_mean_t1_dyn) << " s, static "
              << format_number(summary.device_mean_t1_stat) << " s; rb-error ratio "
              << format_number(summary.eps_ratio) << "\n"
              << "reports in " << g.out_dir << "\n";
    return 0;
}

int cmd_fit(const std::string& map_path, const std::string& out_path,
            const std::vector<std::string>& exclude, const std::string& max_jump) {
    const SpectroscopyMap map = read_map_csv(map_path);
    FitReportConfig cfg;
    for (const std::string& span : exclude) {
        const auto colon = span.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--exclude expects lo:hi in volts, e.g. 9:13.65");
        cfg.excluded.emplace_back(std::stod(span.substr(0, colon)),
                                  std::stod(span.substr(colon + 1)));
    }
    if (!max_jump.empty())
        cfg.link.max_jump = parse_quantity(max_jump, Dimension::frequency, "--max-jump");
    const FitReport report = fit_report(map, cfg);
    write_fit_report_csv(report, out_path);
    std::cout << "fitted " << report.fits.size() << " trajectories -> " << out_path << "\n";
    return 0;
}

int cmd_crosstalk(const GlobalOpts& g) {
    const Scenario sc = load(g);
    std::filesystem::create_directories(g.out_dir);
    RunLogWriter log(g.out_dir + "/runlog.jsonl", sc.name, sc.seed, "crosstalk");
    const CrosstalkReport report = run_crosstalk_scan(sc, &log);
    export_crosstalk_csv(report, g.out_dir + "/crosstalk_matrix.csv");
    int flagged = 0, off_diagonal = 0;
    for (std::size_t q = 0; q < report.flagged.size(); ++q)
        for (std::size_t l = 0; l < report.flagged[q].size(); ++l)
            if (report.flagged[q][l]) {
                ++flagged;
                if (q != l) ++off_diagonal;
            }
    std::cout << "flagged " << flagged << " pairs (" << off_diagonal
              << " off-diagonal) -> " << g.out_dir << "/crosstalk_matrix.csv\n";
    return 0;
}

int cmd_circuit_sweep(const GlobalOpts& g, double delta_min, double delta_max, int delta_points,
                      const std::string& freq) {
    const Scenario sc = load(g);
    if (!sc.circuit) throw CLI::ValidationError("scenario has no circuit block");
    std::filesystem::create_directories(g.out_dir);
    const double omega = kTwoPi * parse_quantity(freq, Dimension::frequency, "--freq");
    const ControlLineCircuit& base = *sc.circuit;
    const double c_c = 0.5 * (base.c_c1 + base.c_c2);
    CsvWriter csv(g.out_dir + "/circuit_sweep.csv", {"delta", "omega", "gamma", "q_factor"});
    for (double delta : linspace(delta_min, delta_max, static_cast<std::size_t>(delta_points))) {
        ControlLineCircuit c = base;
        c.c_c1 = c_c * (1.0 + delta);
        c.c_c2 = c_c * (1.0 - delta);
        const PurcellResult r = purcell_rate(c, omega);
        csv.row(std::vector<double>{delta, omega, r.gamma, r.q_factor});
    }
    std::cout << "wrote " << g.out_dir << "/circuit_sweep.csv\n";
    return 0;
}

int cmd_export(const GlobalOpts& g, const std::string& log_path) {
    const Scenario sc = load(g);
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("cannot open '" + log_path + "'");
    std::string header_line;
    std::getline(in, header_line);
    const json header = json::parse(header_line);
    const std::string kind = header.value("kind", "stability");
    in.close();
    const RunSummary summary = summary_from_log(sc, kind, log_path);
    export_summary_files(summary, g.out_dir);
    std::cout << "rebuilt " << kind << " summary from " << log_path << " -> " << g.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voltage-tunable TLS bath simulator and control toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--scenario", g.scenario_path, "Scenario JSON file")->envname("TICTAQ_SCENARIO");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the scenario seed");
    app.add_option("--out", g.out_dir, "Output directory (default: out)");

    auto* simulate = app.add_subcommand("simulate", "Acquire full spectroscopy maps");
    int sim_qubit = -1;
    simulate->add_option("--qubit", sim_qubit, "Only this qubit (default: all)");

    auto* optimize = app.add_subcommand("optimize", "Run the optimization protocols");
    std::string mode = "auto";
    optimize->add_option("--mode", mode, "stability | static-grid | multiqubit | auto");
    int grid_biases = 51;
    optimize->add_option("--grid-biases", grid_biases, "Static biases for static-grid mode");

    auto* fit = app.add_subcommand("fit", "Fit TLS tuning curves in a map CSV");
    std::string map_path, fit_out = "fit_report.csv", max_jump;
    std::vector<std::string> exclude;
    fit->add_option("--map", map_path, "Input map CSV")->required();
    fit->add_option("--report", fit_out, "Output report CSV");
    fit->add_option("--exclude", exclude, "Voltage interval lo:hi to exclude (repeatable)");
    fit->add_option("--max-jump", max_jump, "Trajectory linking jump limit, e.g. '8 MHz'");

    auto* crosstalk = app.add_subcommand("crosstalk", "Per-line crosstalk scan");

    auto* circuit = app.add_subcommand("circuit-sweep", "Purcell rate versus coupling asymmetry");
    double delta_min = 0.0, delta_max = 0.1;
    int delta_points = 51;
    std::string freq = "5 GHz";
    circuit->add_option("--delta-min", delta_min, "Smallest asymmetry");
    circuit->add_option("--delta-max", delta_max, "Largest asymmetry");
    circuit->add_option("--delta-points", delta_points, "Sweep points");
    circuit->add_option("--freq", freq, "Qubit frequency, e.g. '5 GHz'");

    auto* exportc = app.add_subcommand("export", "Rebuild reports from a run log");
    std::string log_path;
    exportc->add_option("--log", log_path, "runlog.jsonl produced by a previous run")->required();

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) g.seed_override = seed_value;

    try {
        if (simulate->parsed()) return cmd_simulate(g, sim_qubit);
        if (optimize->parsed()) return cmd_optimize(g, mode, grid_biases);
        if (fit->parsed()) return cmd_fit(map_path, fit_out, exclude, max_jump);
        if (crosstalk->parsed()) return cmd_crosstalk(g);
        if (circuit->parsed())
            return cmd_circuit_sweep(g, delta_min, delta_max, delta_points, freq);
        if (exportc->parsed()) return cmd_export(g, log_path);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::ordered_json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
