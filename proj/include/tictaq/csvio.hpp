#ifndef TICTAQ_CSVIO_HPP
#define TICTAQ_CSVIO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tictaq/fitting.hpp"
#include "tictaq/spectroscopy.hpp"

namespace tictaq {

// Numbers are printed with %.12g everywhere so reports are byte-stable and
// round-trip at full working precision.
inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path, std::ios::trunc) {
        if (!out_) throw std::runtime_error("csv: cannot open '" + path + "'");
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << format_number(cells[i]);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace detail

// Spectroscopy map CSV: "# key value" metadata comments, a header line, then
// one row per (voltage, frequency) sample.
inline void write_map_csv(const SpectroscopyMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "'");
    out << "# qubit " << map.qubit << "\n";
    out << "# t_delay " << format_number(map.t_delay) << "\n";
    out << "# shots " << map.shots << "\n";
    out << "voltage,frequency,p1\n";
    for (std::size_t i = 0; i < map.v_grid.size(); ++i)
        for (std::size_t j = 0; j < map.f_grid.size(); ++j)
            out << format_number(map.v_grid[i]) << "," << format_number(map.f_grid[j]) << ","
                << format_number(map.p1[i][j]) << "\n";
}

inline SpectroscopyMap read_map_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
    SpectroscopyMap map;
    std::string line;
    bool header_seen = false;
    double prev_v = 0.0;
    bool have_v = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string key;
            ss >> key;
            if (key == "qubit") ss >> map.qubit;
            if (key == "t_delay") ss >> map.t_delay;
            if (key == "shots") ss >> map.shots;
            continue;
        }
        if (!header_seen) {
            if (line != "voltage,frequency,p1")
                throw std::invalid_argument("map csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3) throw std::invalid_argument("map csv: malformed row '" + line + "'");
        const double v = std::stod(cells[0]);
        const double f = std::stod(cells[1]);
        const double p = std::stod(cells[2]);
        if (!have_v || v != prev_v) {
            map.v_grid.push_back(v);
            map.p1.emplace_back();
            prev_v = v;
            have_v = true;
        }
        if (map.v_grid.size() == 1) map.f_grid.push_back(f);
        map.p1.back().push_back(p);
    }
    map.validate();
    return map;
}

// Fit report CSV, one row per fitted trajectory.
inline void write_fit_report_csv(const FitReport& report, const std::string& path) {
    CsvWriter csv(path, {"traj_id", "gamma_e_hz_per_v", "delta0_hz", "v0_v", "slope_sign",
                         "sigma_gamma_e", "sigma_delta0", "sigma_v0", "n_points", "low_confidence"});
    for (std::size_t i = 0; i < report.fits.size(); ++i) {
        const HyperbolaFit& f = report.fits[i];
        csv.row(std::vector<std::string>{
            std::to_string(i), format_number(f.gamma_e), format_number(f.delta0),
            format_number(f.v0), std::to_string(f.slope_sign), format_number(f.sigma_gamma_e),
            format_number(f.sigma_delta0), format_number(f.sigma_v0), std::to_string(f.n_points),
            f.low_confidence ? "1" : "0"});
    }
}

inline std::vector<HyperbolaFit> read_fit_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
    std::vector<HyperbolaFit> fits;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 10)
            throw std::invalid_argument("fit csv: malformed row '" + line + "'");
        HyperbolaFit f;
        f.gamma_e = std::stod(cells[1]);
        f.delta0 = std::stod(cells[2]);
        f.v0 = std::stod(cells[3]);
        f.slope_sign = std::stoi(cells[4]);
        f.sigma_gamma_e = std::stod(cells[5]);
        f.sigma_delta0 = std::stod(cells[6]);
        f.sigma_v0 = std::stod(cells[7]);
        f.n_points = static_cast<std::size_t>(std::stoul(cells[8]));
        f.low_confidence = cells[9] == "1";
        fits.push_back(f);
    }
    return fits;
}

}  // namespace tictaq

#endif
