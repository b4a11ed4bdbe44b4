#ifndef TICTAQ_SCENARIO_HPP
#define TICTAQ_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tictaq/bath.hpp"
#include "tictaq/circuit.hpp"
#include "tictaq/optimizer.hpp"
#include "tictaq/quantity.hpp"

namespace tictaq {

using json = nlohmann::ordered_json;

// Frequency window and grid for full-map acquisition (the wide analogue of the
// optimizer's narrow scan window).
struct MapScanConfig {
    double f_halfwidth = 50e6;
    int f_points = 201;
    int v_points = 51;
};

struct CrosstalkScanConfig {
    double movement_threshold = 1e6;  // dip movement that flags a pair (Hz)
    bool noiseless = true;
    int v_points = 21;
};

struct GlobalSweepConfig {
    int bias_points = 51;
    int eval_repetitions = 25;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<QubitSite> qubits;
    std::vector<std::vector<BathDefect>> baths;
    std::vector<std::vector<double>> crosstalk;  // empty -> identity
    OptimizerConfig optimizer = OptimizerConfig::defaults();
    double iteration_period = 900.0;   // s
    double total_duration = 136800.0;  // s
    double baseline_voltage = 0.0;     // V
    MeasurementCosts costs;
    NoiseParams noise;
    MapScanConfig map_scan;
    CrosstalkScanConfig crosstalk_scan;
    GlobalSweepConfig global_sweep;
    std::optional<ControlLineCircuit> circuit;

    void validate() const {
        if (qubits.empty()) throw std::invalid_argument("scenario: no qubits");
        if (!(total_duration >= iteration_period))
            throw std::invalid_argument("scenario: total_duration must cover one iteration period");
        optimizer.validate();
    }

    DeviceModel build_device() const {
        return DeviceModel(qubits, baths, crosstalk, seed, costs, noise);
    }

    std::vector<double> baseline_voltages() const {
        return std::vector<double>(qubits.size(), baseline_voltage);
    }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument("scenario: unknown key '" + key + "' in " + where);
}

inline const json& require_key(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw std::invalid_argument("scenario: missing key '" + key + "' in " + where);
    return obj.at(key);
}

inline double quantity_field(const json& obj, const std::string& key, Dimension dim,
                             const std::string& where) {
    const json& v = require_key(obj, key, where);
    if (!v.is_string())
        throw std::invalid_argument("scenario: " + where + "." + key +
                                    " must be a string with an explicit unit");
    return parse_quantity(v.get<std::string>(), dim, where + "." + key);
}

inline double quantity_field_or(const json& obj, const std::string& key, Dimension dim,
                                const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    return quantity_field(obj, key, dim, where);
}

inline DriftParams parse_drift(const json& obj, const std::string& where) {
    reject_unknown_keys(obj, {"theta", "sigma", "scramble_rate", "scramble_scale"}, where);
    DriftParams p;
    p.theta = quantity_field(obj, "theta", Dimension::rate, where);
    p.sigma = quantity_field(obj, "sigma", Dimension::diffusion, where);
    p.scramble_rate = quantity_field(obj, "scramble_rate", Dimension::rate, where);
    p.scramble_scale = quantity_field(obj, "scramble_scale", Dimension::frequency, where);
    p.validate();
    return p;
}

inline BathDefect parse_defect(const json& obj, const std::string& where) {
    reject_unknown_keys(obj,
                        {"delta0", "eps0", "sensitivity", "coupling_g", "gamma1_tls", "gamma2_tls",
                         "drift"},
                        where);
    BathDefect d;
    d.tls.delta0 = quantity_field(obj, "delta0", Dimension::frequency, where);
    d.tls.eps0 = quantity_field(obj, "eps0", Dimension::frequency, where);
    const json& sens = require_key(obj, "sensitivity", where);
    if (!sens.is_array())
        throw std::invalid_argument("scenario: " + where + ".sensitivity must be an array");
    for (std::size_t i = 0; i < sens.size(); ++i) {
        if (!sens[i].is_string())
            throw std::invalid_argument("scenario: " + where + ".sensitivity entries need units");
        d.tls.sensitivity.push_back(parse_quantity(sens[i].get<std::string>(),
                                                   Dimension::sensitivity,
                                                   where + ".sensitivity"));
    }
    d.tls.coupling_g = quantity_field(obj, "coupling_g", Dimension::frequency, where);
    d.tls.gamma1_tls = quantity_field(obj, "gamma1_tls", Dimension::rate, where);
    d.tls.gamma2_tls = quantity_field(obj, "gamma2_tls", Dimension::rate, where);
    if (obj.contains("drift") && !obj.at("drift").is_null())
        d.drift = parse_drift(obj.at("drift"), where + ".drift");
    d.tls.validate();
    return d;
}

}  // namespace detail

inline Scenario scenario_from_json(const json& root) {
    using detail::quantity_field;
    using detail::quantity_field_or;
    using detail::reject_unknown_keys;
    using detail::require_key;

    reject_unknown_keys(root,
                        {"schema", "name", "seed", "device", "optimizer", "schedule", "costs",
                         "noise", "map_scan", "crosstalk_scan", "global_sweep", "circuit"},
                        "top level");
    const std::string schema = require_key(root, "schema", "top level").get<std::string>();
    if (schema != "tictaq-scenario/1")
        throw std::invalid_argument("scenario: unsupported schema '" + schema + "'");

    Scenario s;
    s.name = require_key(root, "name", "top level").get<std::string>();
    s.seed = require_key(root, "seed", "top level").get<std::uint64_t>();

    const json& device = require_key(root, "device", "top level");
    reject_unknown_keys(device, {"qubits", "crosstalk"}, "device");
    const json& qubits = require_key(device, "qubits", "device");
    for (std::size_t qi = 0; qi < qubits.size(); ++qi) {
        const json& q = qubits[qi];
        const std::string where = "device.qubits[" + std::to_string(qi) + "]";
        reject_unknown_keys(q, {"f01", "gamma0", "gamma_phi0", "t_gate", "bath"}, where);
        QubitSite site;
        site.f01 = quantity_field(q, "f01", Dimension::frequency, where);
        site.gamma0 = quantity_field(q, "gamma0", Dimension::rate, where);
        site.gamma_phi0 = quantity_field(q, "gamma_phi0", Dimension::rate, where);
        site.t_gate = quantity_field(q, "t_gate", Dimension::time, where);
        s.qubits.push_back(site);
        std::vector<BathDefect> bath;
        if (q.contains("bath"))
            for (std::size_t di = 0; di < q.at("bath").size(); ++di)
                bath.push_back(detail::parse_defect(q.at("bath")[di],
                                                    where + ".bath[" + std::to_string(di) + "]"));
        s.baths.push_back(std::move(bath));
    }
    if (device.contains("crosstalk")) {
        for (const auto& row : device.at("crosstalk"))
            s.crosstalk.push_back(row.get<std::vector<double>>());
    }

    if (root.contains("optimizer")) {
        const json& o = root.at("optimizer");
        reject_unknown_keys(o,
                            {"v_min", "v_max", "v_points", "f_window", "f_points", "tau",
                             "refine_window", "refine_points", "t_delay", "shots"},
                            "optimizer");
        OptimizerConfig& cfg = s.optimizer;
        cfg.v_min = quantity_field_or(o, "v_min", Dimension::voltage, "optimizer", cfg.v_min);
        cfg.v_max = quantity_field_or(o, "v_max", Dimension::voltage, "optimizer", cfg.v_max);
        const int v_points = o.contains("v_points") ? o.at("v_points").get<int>() : 51;
        cfg.v_grid = linspace(cfg.v_min, cfg.v_max, static_cast<std::size_t>(v_points));
        cfg.f_halfwidth =
            quantity_field_or(o, "f_window", Dimension::frequency, "optimizer", cfg.f_halfwidth);
        if (o.contains("f_points")) cfg.f_points = o.at("f_points").get<int>();
        cfg.tau = quantity_field_or(o, "tau", Dimension::time, "optimizer", cfg.tau);
        cfg.refine_halfwidth = quantity_field_or(o, "refine_window", Dimension::voltage,
                                                 "optimizer", cfg.refine_halfwidth);
        if (o.contains("refine_points")) cfg.refine_points = o.at("refine_points").get<int>();
        cfg.t_delay = quantity_field_or(o, "t_delay", Dimension::time, "optimizer", cfg.t_delay);
        if (o.contains("shots")) cfg.shots = o.at("shots").get<int>();
    }

    const json& sched = require_key(root, "schedule", "top level");
    reject_unknown_keys(sched, {"iteration_period", "total_duration", "baseline_voltage"},
                        "schedule");
    s.iteration_period = quantity_field(sched, "iteration_period", Dimension::time, "schedule");
    s.total_duration = quantity_field(sched, "total_duration", Dimension::time, "schedule");
    s.baseline_voltage =
        quantity_field_or(sched, "baseline_voltage", Dimension::voltage, "schedule", 0.0);

    if (root.contains("costs")) {
        const json& c = root.at("costs");
        reject_unknown_keys(c, {"spectroscopy_point", "t1", "rb", "t2e", "ramsey"}, "costs");
        s.costs.spectroscopy_point = quantity_field_or(c, "spectroscopy_point", Dimension::time,
                                                       "costs", s.costs.spectroscopy_point);
        s.costs.t1 = quantity_field_or(c, "t1", Dimension::time, "costs", s.costs.t1);
        s.costs.rb = quantity_field_or(c, "rb", Dimension::time, "costs", s.costs.rb);
        s.costs.t2e = quantity_field_or(c, "t2e", Dimension::time, "costs", s.costs.t2e);
        s.costs.ramsey = quantity_field_or(c, "ramsey", Dimension::time, "costs", s.costs.ramsey);
    }

    if (root.contains("noise")) {
        const json& n = root.at("noise");
        reject_unknown_keys(n, {"t1_rel", "rb_rel", "t2e_rel", "ramsey_abs", "noiseless"}, "noise");
        if (n.contains("t1_rel")) s.noise.t1_rel = n.at("t1_rel").get<double>();
        if (n.contains("rb_rel")) s.noise.rb_rel = n.at("rb_rel").get<double>();
        if (n.contains("t2e_rel")) s.noise.t2e_rel = n.at("t2e_rel").get<double>();
        s.noise.ramsey_abs =
            quantity_field_or(n, "ramsey_abs", Dimension::frequency, "noise", s.noise.ramsey_abs);
        if (n.contains("noiseless")) s.noise.noiseless = n.at("noiseless").get<bool>();
    }

    if (root.contains("map_scan")) {
        const json& m = root.at("map_scan");
        reject_unknown_keys(m, {"f_window", "f_points", "v_points"}, "map_scan");
        s.map_scan.f_halfwidth =
            quantity_field_or(m, "f_window", Dimension::frequency, "map_scan", 50e6);
        if (m.contains("f_points")) s.map_scan.f_points = m.at("f_points").get<int>();
        if (m.contains("v_points")) s.map_scan.v_points = m.at("v_points").get<int>();
    }

    if (root.contains("crosstalk_scan")) {
        const json& c = root.at("crosstalk_scan");
        reject_unknown_keys(c, {"movement_threshold", "noiseless", "v_points"}, "crosstalk_scan");
        s.crosstalk_scan.movement_threshold = quantity_field_or(
            c, "movement_threshold", Dimension::frequency, "crosstalk_scan", 1e6);
        if (c.contains("noiseless"))
            s.crosstalk_scan.noiseless = c.at("noiseless").get<bool>();
        if (c.contains("v_points")) s.crosstalk_scan.v_points = c.at("v_points").get<int>();
    }

    if (root.contains("global_sweep")) {
        const json& g = root.at("global_sweep");
        reject_unknown_keys(g, {"bias_points", "eval_repetitions"}, "global_sweep");
        if (g.contains("bias_points")) s.global_sweep.bias_points = g.at("bias_points").get<int>();
        if (g.contains("eval_repetitions"))
            s.global_sweep.eval_repetitions = g.at("eval_repetitions").get<int>();
    }

    if (root.contains("circuit")) {
        const json& c = root.at("circuit");
        reject_unknown_keys(c, {"c_q", "c_c1", "c_c2", "c_g1", "c_g2", "c_gc", "z0"}, "circuit");
        ControlLineCircuit cc;
        cc.c_q = quantity_field(c, "c_q", Dimension::capacitance, "circuit");
        cc.c_c1 = quantity_field(c, "c_c1", Dimension::capacitance, "circuit");
        cc.c_c2 = quantity_field(c, "c_c2", Dimension::capacitance, "circuit");
        cc.c_g1 = quantity_field(c, "c_g1", Dimension::capacitance, "circuit");
        cc.c_g2 = quantity_field(c, "c_g2", Dimension::capacitance, "circuit");
        cc.c_gc = quantity_field(c, "c_gc", Dimension::capacitance, "circuit");
        cc.z0 = quantity_field(c, "z0", Dimension::resistance, "circuit");
        cc.validate();
        s.circuit = cc;
    }

    s.validate();
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("scenario: JSON parse error in '" + path + "': " + e.what());
    }
    return scenario_from_json(root);
}

}  // namespace tictaq

#endif
