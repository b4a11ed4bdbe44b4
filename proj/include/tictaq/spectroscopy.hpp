#ifndef TICTAQ_SPECTROSCOPY_HPP
#define TICTAQ_SPECTROSCOPY_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tictaq {

// P1 values on a (voltage x frequency) grid plus acquisition metadata.
struct SpectroscopyMap {
    std::vector<double> v_grid;               // volts, sorted ascending
    std::vector<double> f_grid;               // Hz, sorted ascending
    std::vector<std::vector<double>> p1;      // p1[iv][if] in [0,1]
    int qubit = -1;
    double t_delay = 0.0;                     // s
    int shots = 0;                            // 0 means noiseless acquisition
    double t_start = 0.0;                     // virtual time of first slice (s)
    double t_end = 0.0;                       // virtual time after last slice (s)

    void validate() const {
        if (p1.size() != v_grid.size())
            throw std::invalid_argument("SpectroscopyMap: row count does not match v_grid");
        for (std::size_t i = 0; i + 1 < v_grid.size(); ++i)
            if (!(v_grid[i] < v_grid[i + 1]))
                throw std::invalid_argument("SpectroscopyMap: v_grid must be strictly increasing");
        for (std::size_t i = 0; i + 1 < f_grid.size(); ++i)
            if (!(f_grid[i] < f_grid[i + 1]))
                throw std::invalid_argument("SpectroscopyMap: f_grid must be strictly increasing");
        for (const auto& row : p1) {
            if (row.size() != f_grid.size())
                throw std::invalid_argument("SpectroscopyMap: column count does not match f_grid");
            for (double p : row)
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("SpectroscopyMap: p1 outside [0,1]");
        }
    }
};

}  // namespace tictaq

#endif
