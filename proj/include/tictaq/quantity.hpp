#ifndef TICTAQ_QUANTITY_HPP
#define TICTAQ_QUANTITY_HPP

#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>

namespace tictaq {

// Scenario files carry an explicit unit on every physical quantity
// ("4 MHz/V", "20 us", "0.5 fF"); a bare number is accepted only for
// dimensionless values. Unknown or mismatched units are configuration errors.
enum class Dimension {
    frequency,
    time,
    voltage,
    rate,              // 1/s
    sensitivity,       // Hz/V
    diffusion,         // Hz/sqrt(s)
    capacitance,
    resistance,
};

inline const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::frequency: return "frequency";
        case Dimension::time: return "time";
        case Dimension::voltage: return "voltage";
        case Dimension::rate: return "rate";
        case Dimension::sensitivity: return "sensitivity";
        case Dimension::diffusion: return "diffusion";
        case Dimension::capacitance: return "capacitance";
        case Dimension::resistance: return "resistance";
    }
    return "?";
}

inline const std::map<std::string, double>& unit_table(Dimension d) {
    static const std::map<std::string, double> frequency{
        {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    static const std::map<std::string, double> time{
        {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}, {"min", 60.0}, {"h", 3600.0}};
    static const std::map<std::string, double> voltage{{"mV", 1e-3}, {"V", 1.0}};
    static const std::map<std::string, double> rate{
        {"/s", 1.0}, {"/ms", 1e3}, {"/us", 1e6}, {"/min", 1.0 / 60.0}, {"/h", 1.0 / 3600.0}};
    static const std::map<std::string, double> sensitivity{
        {"Hz/V", 1.0}, {"kHz/V", 1e3}, {"MHz/V", 1e6}, {"GHz/V", 1e9}};
    static const std::map<std::string, double> diffusion{
        {"Hz/sqrt(s)", 1.0}, {"kHz/sqrt(s)", 1e3}, {"MHz/sqrt(s)", 1e6}};
    static const std::map<std::string, double> capacitance{
        {"aF", 1e-18}, {"fF", 1e-15}, {"pF", 1e-12}, {"nF", 1e-9}, {"F", 1.0}};
    static const std::map<std::string, double> resistance{{"Ohm", 1.0}, {"kOhm", 1e3}};
    switch (d) {
        case Dimension::frequency: return frequency;
        case Dimension::time: return time;
        case Dimension::voltage: return voltage;
        case Dimension::rate: return rate;
        case Dimension::sensitivity: return sensitivity;
        case Dimension::diffusion: return diffusion;
        case Dimension::capacitance: return capacitance;
        case Dimension::resistance: return resistance;
    }
    return frequency;
}

// Parse "<number> <unit>" into SI base units for the given dimension.
inline double parse_quantity(const std::string& text, Dimension dim, const std::string& where) {
    const auto split = text.find_first_of(" \t");
    if (split == std::string::npos)
        throw std::invalid_argument(where + ": missing unit on '" + text + "' (expected a " +
                                    dimension_name(dim) + ")");
    const std::string num = text.substr(0, split);
    std::string unit = text.substr(split);
    unit.erase(0, unit.find_first_not_of(" \t"));

    char* end = nullptr;
    const double value = std::strtod(num.c_str(), &end);
    if (end == num.c_str() || *end != '\0')
        throw std::invalid_argument(where + ": cannot parse number in '" + text + "'");

    const auto& table = unit_table(dim);
    const auto it = table.find(unit);
    if (it == table.end())
        throw std::invalid_argument(where + ": unit '" + unit + "' is not a " +
                                    dimension_name(dim) + " unit");
    return value * it->second;
}

}  // namespace tictaq

#endif
