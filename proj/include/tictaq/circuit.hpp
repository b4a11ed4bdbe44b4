#ifndef TICTAQ_CIRCUIT_HPP
#define TICTAQ_CIRCUIT_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace tictaq {

// Lumped-element model of the qubit / control-line network. The control line
// is a semi-infinite transmission line of impedance z0 terminated by c_gc to
// ground; the floating qubit pads couple to it through c_c1, c_c2 and to
// ground through c_g1, c_g2. Readout-resonator capacitances are assumed to be
// folded into renormalized c_g1, c_g2 by the caller.
struct ControlLineCircuit {
    double c_q = 0.0;    // pad-to-pad capacitance (F)
    double c_c1 = 0.0;   // pad 1 to control line (F)
    double c_c2 = 0.0;   // pad 2 to control line (F)
    double c_g1 = 0.0;   // pad 1 to ground (F)
    double c_g2 = 0.0;   // pad 2 to ground (F)
    double c_gc = 0.0;   // control-line end to ground (F)
    double z0 = 0.0;     // line characteristic impedance (Ohm)

    void validate() const {
        if (!(c_q > 0.0 && c_gc > 0.0 && z0 > 0.0))
            throw std::invalid_argument("ControlLineCircuit: c_q, c_gc, z0 must be > 0");
        if (c_c1 < 0.0 || c_c2 < 0.0 || c_g1 < 0.0 || c_g2 < 0.0)
            throw std::invalid_argument("ControlLineCircuit: capacitances must be >= 0");
    }
};

// Delta equivalent of the control-line star (pad1 - line node - pad2, with the
// line node loaded by Z_env). z_env_prime bridges the pads; z_a and z_b are
// the pad-to-ground branches carrying c_c2 and c_c1 respectively.
struct ReducedNetwork {
    std::complex<double> z_a;
    std::complex<double> z_b;
    std::complex<double> z_env_prime;
    double omega = 0.0;
};

inline void require_positive_omega(double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("circuit: omega must be > 0");
}

// Z_env = z0 + 1/(i w c_gc): the line resistance in series with the
// termination capacitance.
inline std::complex<double> environment_impedance(const ControlLineCircuit& c, double omega) {
    require_positive_omega(omega);
    return {c.z0, -1.0 / (omega * c.c_gc)};
}

inline ReducedNetwork y_delta(const ControlLineCircuit& c, double omega) {
    require_positive_omega(omega);
    const std::complex<double> j(0.0, 1.0);
    const std::complex<double> z_env = environment_impedance(c, omega);
    const std::complex<double> common = 1.0 + j * omega * z_env * (c.c_c1 + c.c_c2);
    constexpr double inf = std::numeric_limits<double>::infinity();

    ReducedNetwork out;
    out.omega = omega;
    out.z_a = (c.c_c2 > 0.0) ? common / (j * omega * c.c_c2) : std::complex<double>(inf, inf);
    out.z_b = (c.c_c1 > 0.0) ? common / (j * omega * c.c_c1) : std::complex<double>(inf, inf);
    out.z_env_prime = (c.c_c1 > 0.0 && c.c_c2 > 0.0)
                          ? common / (-omega * omega * z_env * c.c_c1 * c.c_c2)
                          : std::complex<double>(inf, inf);
    return out;
}

// Admittance shunting the junction after reducing the delta network with the
// ground capacitances (c_q excluded). Composed in admittance form so that
// zero-valued coupling capacitances behave as open branches.
inline std::complex<double> effective_admittance(const ControlLineCircuit& c, double omega) {
    require_positive_omega(omega);
    const std::complex<double> j(0.0, 1.0);
    const std::complex<double> z_env = environment_impedance(c, omega);
    const std::complex<double> common = 1.0 + j * omega * z_env * (c.c_c1 + c.c_c2);
    if (common == std::complex<double>(0.0, 0.0))
        throw std::invalid_argument("effective_admittance: degenerate circuit parameters");

    // Delta branch admittances (reciprocals of the y_delta impedances).
    const std::complex<double> y_bridge = -omega * omega * z_env * c.c_c1 * c.c_c2 / common;
    const std::complex<double> y_pad1 = j * omega * c.c_c1 / common;
    const std::complex<double> y_pad2 = j * omega * c.c_c2 / common;

    const std::complex<double> y1 = j * omega * c.c_g1 + y_pad1;
    const std::complex<double> y2 = j * omega * c.c_g2 + y_pad2;
    const std::complex<double> ysum = y1 + y2;
    const std::complex<double> series =
        (ysum == std::complex<double>(0.0, 0.0)) ? std::complex<double>(0.0, 0.0) : y1 * y2 / ysum;
    return y_bridge + series;
}

// C_sigma = c_q + d Im(Y_eff)/d omega, by central finite difference with
// relative step 1e-6.
inline double shunt_capacitance(const ControlLineCircuit& c, double omega) {
    require_positive_omega(omega);
    const double h = 1e-6 * omega;
    const double up = effective_admittance(c, omega + h).imag();
    const double dn = effective_admittance(c, omega - h).imag();
    return c.c_q + (up - dn) / (2.0 * h);
}

struct PurcellResult {
    double gamma = 0.0;      // relaxation rate through the control line (1/s)
    double q_factor = 0.0;   // omega / gamma
    double c_sigma = 0.0;    // effective shunt capacitance (F)
};

// Gamma = Re(Y_eff) / C_sigma; Q = omega / Gamma.
inline PurcellResult purcell_rate(const ControlLineCircuit& c, double omega) {
    require_positive_omega(omega);
    PurcellResult out;
    out.c_sigma = shunt_capacitance(c, omega);
    if (!(out.c_sigma > 0.0))
        throw std::invalid_argument("purcell_rate: non-positive shunt capacitance");
    out.gamma = effective_admittance(c, omega).real() / out.c_sigma;
    out.q_factor = omega / out.gamma;
    return out;
}

// Closed form for equal ground capacitances, exact at leading order in the
// coupling asymmetry delta = (c_c1 - c_c2)/(c_c1 + c_c2):
//
//   Gamma = (1/C_sigma) * delta^2 w^2 Cg^2 Re(Z_env) / |1 + Cg/Cc + 2 i w Cg Z_env|^2
//
// The squared modulus in the denominator carries an Im(Z_env) cross term that
// vanishes when the environment is purely resistive.
inline double symmetric_purcell_rate(double delta, double c_c, double c_g, double c_sigma,
                                     double omega, std::complex<double> z_env) {
    if (std::abs(delta) > 1.0)
        throw std::invalid_argument("symmetric_purcell_rate: |delta| must be <= 1");
    if (!(c_c > 0.0 && c_g > 0.0 && c_sigma > 0.0))
        throw std::invalid_argument("symmetric_purcell_rate: capacitances must be > 0");
    require_positive_omega(omega);
    const std::complex<double> den = 1.0 + c_g / c_c + std::complex<double>(0.0, 2.0 * omega * c_g) * z_env;
    return delta * delta * omega * omega * c_g * c_g * z_env.real() / (std::norm(den) * c_sigma);
}

}  // namespace tictaq

#endif
