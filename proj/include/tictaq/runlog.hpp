#ifndef TICTAQ_RUNLOG_HPP
#define TICTAQ_RUNLOG_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tictaq/bath.hpp"
#include "tictaq/optimizer.hpp"

namespace tictaq {

// JSON-lines run log: a versioned header line, then one object per
// measurement or optimizer iteration. Output is byte-stable for a fixed
// scenario and seed.
class RunLogWriter {
  public:
    RunLogWriter() = default;

    RunLogWriter(const std::string& path, const std::string& scenario_name, std::uint64_t seed,
                 const std::string& kind) {
        open(path, scenario_name, seed, kind);
    }

    void open(const std::string& path, const std::string& scenario_name, std::uint64_t seed,
              const std::string& kind) {
        out_.open(path, std::ios::trunc);
        if (!out_) throw std::runtime_error("runlog: cannot open '" + path + "'");
        nlohmann::ordered_json header;
        header["schema"] = "tictaq-runlog/1";
        header["scenario"] = scenario_name;
        header["seed"] = seed;
        header["kind"] = kind;
        out_ << header.dump() << "\n";
    }

    bool is_open() const { return out_.is_open(); }

    void write(const MeasurementRecord& rec) {
        if (!out_.is_open()) return;
        nlohmann::ordered_json line;
        line["type"] = "measurement";
        line["kind"] = to_string(rec.kind);
        line["qubit"] = rec.qubit;
        line["t"] = rec.time;
        line["duration"] = rec.duration;
        line["v"] = rec.voltages;
        if (!rec.frequencies.empty()) line["f"] = rec.frequencies;
        line["values"] = rec.values;
        line["noise_counter"] = rec.noise_counter;
        if (!rec.tag.empty()) line["tag"] = rec.tag;
        out_ << line.dump() << "\n";
    }

    void write_iteration(int qubit, const IterationResult& res) {
        if (!out_.is_open()) return;
        nlohmann::ordered_json line;
        line["type"] = "iteration";
        line["qubit"] = qubit;
        line["t"] = res.t_start;
        line["duration"] = res.duration;
        line["v_star"] = res.v_star;
        line["v_opt"] = res.v_opt;
        line["loss"] = res.loss;
        line["refine_v"] = res.refine_grid;
        line["refine_t1"] = res.refine_t1;
        out_ << line.dump() << "\n";
    }

    void write_end(double clock, double measurement_cost, double idle) {
        if (!out_.is_open()) return;
        nlohmann::ordered_json line;
        line["type"] = "end";
        line["clock"] = clock;
        line["measurement_cost"] = measurement_cost;
        line["idle"] = idle;
        out_ << line.dump() << "\n";
        out_.flush();
    }

  private:
    std::ofstream out_;
};

}  // namespace tictaq

#endif
