#ifndef TICTAQ_STM_HPP
#define TICTAQ_STM_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tictaq/common.hpp"

namespace tictaq {

// One double-well defect. All energies are stored as frequencies (Hz), so no
// hbar bookkeeping is needed anywhere downstream; unit conversions appear only
// in sensitivity_from_dipole below.
struct TlsDefect {
    double delta0 = 0.0;                  // tunneling energy (Hz), > 0
    double eps0 = 0.0;                    // static asymmetry offset (Hz)
    std::vector<double> sensitivity;      // per-line asymmetry shift (Hz/V), signed
    double coupling_g = 0.0;              // qubit-TLS coupling (Hz), >= 0
    double gamma1_tls = 0.0;              // defect relaxation rate (1/s)
    double gamma2_tls = 0.0;              // defect decoherence rate (1/s)

    void validate() const {
        if (!(delta0 > 0.0)) throw std::invalid_argument("TlsDefect: delta0 must be > 0");
        if (!(gamma1_tls > 0.0)) throw std::invalid_argument("TlsDefect: gamma1_tls must be > 0");
        if (!(gamma2_tls >= 0.5 * gamma1_tls))
            throw std::invalid_argument("TlsDefect: gamma2_tls must be >= gamma1_tls/2");
        if (coupling_g < 0.0) throw std::invalid_argument("TlsDefect: coupling_g must be >= 0");
    }
};

// Electric field environment of a candidate defect location.
struct FieldSample {
    double dipole = 0.0;           // electric dipole magnitude (debye)
    double field_per_volt = 0.0;   // |E| at the defect per applied volt (V/m per V)
    double qubit_field = 0.0;      // qubit zero-point |E| at the defect (V/m)
};

// Asymmetry energy under an applied voltage vector: eps0 + sum_l s_l * v_l.
inline double asymmetry(const TlsDefect& tls, std::span<const double> v) {
    if (v.size() != tls.sensitivity.size())
        throw std::invalid_argument("asymmetry: voltage vector length does not match sensitivity count");
    double eps = tls.eps0;
    for (std::size_t l = 0; l < v.size(); ++l) eps += tls.sensitivity[l] * v[l];
    return eps;
}

// Transition frequency sqrt(eps^2 + delta0^2); never below delta0.
inline double tls_frequency(const TlsDefect& tls, std::span<const double> v) {
    return std::hypot(asymmetry(tls, v), tls.delta0);
}

// d f_TLS / d v_line = (eps / f) * s_line. Zero at the hyperbola vertex,
// approaching +-s_line on the asymptotes.
inline double tuning_slope(const TlsDefect& tls, std::span<const double> v, std::size_t line) {
    if (line >= tls.sensitivity.size()) throw std::out_of_range("tuning_slope: line index out of range");
    const double eps = asymmetry(tls, v);
    return eps / std::hypot(eps, tls.delta0) * tls.sensitivity[line];
}

// Tuning sensitivity gamma_E = 2 p E / h for a dipole given in debye.
inline double sensitivity_from_dipole(const FieldSample& fs) {
    if (fs.dipole < 0.0 || fs.field_per_volt < 0.0)
        throw std::invalid_argument("sensitivity_from_dipole: magnitudes must be >= 0");
    return 2.0 * (fs.dipole * kDebye) * fs.field_per_volt / kPlanck;
}

// gamma_E / g_TLS for p parallel to E_q; the dipole magnitude cancels,
// leaving 2 E_per_volt / E_q in 1/V.
inline double normalized_tuning_strength(const FieldSample& fs) {
    if (!(fs.qubit_field > 0.0))
        throw std::invalid_argument("normalized_tuning_strength: qubit_field must be > 0");
    return 2.0 * fs.field_per_volt / fs.qubit_field;
}

}  // namespace tictaq

#endif
