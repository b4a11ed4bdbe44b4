#ifndef TICTAQ_BATH_HPP
#define TICTAQ_BATH_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tictaq/common.hpp"
#include "tictaq/rng.hpp"
#include "tictaq/spectroscopy.hpp"
#include "tictaq/stm.hpp"

namespace tictaq {

struct QubitSite {
    double f01 = 0.0;         // fundamental transition frequency (Hz)
    double gamma0 = 0.0;      // baseline relaxation rate (1/s)
    double gamma_phi0 = 0.0;  // baseline pure dephasing rate (1/s)
    double t_gate = 0.0;      // single-qubit gate duration (s)
    // Stable identifier for this qubit's noise streams; defaults to the index
    // within the device so an isolated copy reproduces the same draws.
    std::uint64_t seed_tag = 0;

    void validate() const {
        if (!(f01 > 0.0 && gamma0 > 0.0 && t_gate > 0.0))
            throw std::invalid_argument("QubitSite: f01, gamma0, t_gate must be > 0");
        if (gamma_phi0 < 0.0) throw std::invalid_argument("QubitSite: gamma_phi0 must be >= 0");
    }
};

// Spectral diffusion of one defect: Ornstein-Uhlenbeck wandering of eps0 about
// zero plus Poisson-timed scrambling events that resample eps0 outright.
struct DriftParams {
    double theta = 0.0;           // mean-reversion rate (1/s), > 0
    double sigma = 0.0;           // diffusion strength (Hz/sqrt(s))
    double scramble_rate = 0.0;   // events per second
    double scramble_scale = 0.0;  // resampling width of eps0 (Hz)

    void validate() const {
        if (!(theta > 0.0)) throw std::invalid_argument("DriftParams: theta must be > 0");
        if (sigma < 0.0 || scramble_rate < 0.0 || scramble_scale < 0.0)
            throw std::invalid_argument("DriftParams: rates and scales must be >= 0");
    }
};

// A defect in a qubit's bath; drift absent means the defect is frozen.
struct BathDefect {
    TlsDefect tls;
    std::optional<DriftParams> drift;
};

// Virtual wall-clock cost per measurement kind (seconds).
struct MeasurementCosts {
    double spectroscopy_point = 0.36;
    double t1 = 5.0;
    double rb = 10.0;
    double t2e = 10.0;
    double ramsey = 5.0;
};

struct NoiseParams {
    double t1_rel = 0.05;
    double rb_rel = 0.05;
    double t2e_rel = 0.05;
    double ramsey_abs = 1e3;   // Hz
    bool noiseless = false;    // disables all sampling noise when true
};

enum class MeasurementKind { t1, spectroscopy, ramsey, rb, t2e };

inline const char* to_string(MeasurementKind k) {
    switch (k) {
        case MeasurementKind::t1: return "t1";
        case MeasurementKind::spectroscopy: return "spectroscopy";
        case MeasurementKind::ramsey: return "ramsey";
        case MeasurementKind::rb: return "rb";
        case MeasurementKind::t2e: return "t2e";
    }
    return "?";
}

struct MeasurementRecord {
    MeasurementKind kind = MeasurementKind::t1;
    int qubit = -1;
    std::vector<double> voltages;      // applied line voltages
    double time = 0.0;                 // virtual timestamp at measurement start (s)
    double duration = 0.0;             // virtual cost (s)
    std::vector<double> frequencies;   // probe frequencies (spectroscopy only)
    std::vector<double> values;        // raw result(s)
    std::uint64_t noise_counter = 0;   // qubit stream draw count before the measurement
    std::string tag;                   // harness context, e.g. "scan" or "eval_static"
};

// A multi-qubit device under voltage control: per-qubit TLS baths, crosstalk
// between lines, drift processes and a virtual clock. One line per qubit.
//
// Instances are single-writer: measurements and advance_time mutate the clock
// and RNG streams and must be serialized per instance. Distinct instances are
// independent.
class DeviceModel {
  public:
    using RecordSink = std::function<void(const MeasurementRecord&)>;

    DeviceModel(std::vector<QubitSite> qubits, std::vector<std::vector<BathDefect>> baths,
                std::vector<std::vector<double>> crosstalk, std::uint64_t seed,
                MeasurementCosts costs = {}, NoiseParams noise = {})
        : qubits_(std::move(qubits)),
          baths_(std::move(baths)),
          crosstalk_(std::move(crosstalk)),
          costs_(costs),
          noise_(noise),
          seed_(seed) {
        const std::size_t q_count = qubits_.size();
        if (q_count == 0) throw std::invalid_argument("DeviceModel: no qubits");
        if (baths_.size() != q_count)
            throw std::invalid_argument("DeviceModel: bath count does not match qubit count");
        if (crosstalk_.empty()) {
            crosstalk_.assign(q_count, std::vector<double>(q_count, 0.0));
            for (std::size_t q = 0; q < q_count; ++q) crosstalk_[q][q] = 1.0;
        }
        if (crosstalk_.size() != q_count)
            throw std::invalid_argument("DeviceModel: crosstalk row count does not match qubit count");
        for (std::size_t q = 0; q < q_count; ++q) {
            if (crosstalk_[q].size() != q_count)
                throw std::invalid_argument("DeviceModel: crosstalk matrix must be QxQ");
            if (crosstalk_[q][q] != 1.0)
                throw std::invalid_argument("DeviceModel: crosstalk diagonal must be 1");
            for (std::size_t l = 0; l < q_count; ++l)
                if (std::abs(crosstalk_[q][l]) > 1.0)
                    throw std::invalid_argument("DeviceModel: |crosstalk| entries must be <= 1");
            qubits_[q].validate();
            if (qubits_[q].seed_tag == 0) qubits_[q].seed_tag = q + 1;
            for (const auto& d : baths_[q]) {
                d.tls.validate();
                if (d.tls.sensitivity.size() != q_count)
                    throw std::invalid_argument(
                        "DeviceModel: defect sensitivity length must equal control-line count");
                if (d.drift) d.drift->validate();
            }
        }
        for (std::size_t q = 0; q < q_count; ++q) {
            meas_.emplace_back(derive_seed(seed_, 1, qubits_[q].seed_tag));
            drift_.emplace_back(derive_seed(seed_, 2, qubits_[q].seed_tag));
        }
        // Default calibration point: all lines at zero bias.
        const std::vector<double> zeros(q_count, 0.0);
        f_cal_.resize(q_count);
        for (std::size_t q = 0; q < q_count; ++q) f_cal_[q] = qubit_frequency(q, zeros);
    }

    std::size_t qubit_count() const { return qubits_.size(); }
    std::size_t line_count() const { return qubits_.size(); }
    double clock() const { return clock_; }
    const QubitSite& qubit(std::size_t q) const { return qubits_.at(q); }
    const std::vector<std::vector<BathDefect>>& baths() const { return baths_; }
    std::vector<std::vector<BathDefect>>& baths() { return baths_; }
    const std::vector<std::vector<double>>& crosstalk() const { return crosstalk_; }
    const MeasurementCosts& costs() const { return costs_; }
    const NoiseParams& noise() const { return noise_; }
    void set_record_sink(RecordSink sink) { sink_ = std::move(sink); }

    // Effective voltage vector u = M v seen by the defect baths.
    std::vector<double> effective_voltages(std::span<const double> v) const {
        if (v.size() != line_count())
            throw std::invalid_argument("DeviceModel: voltage vector length does not match line count");
        std::vector<double> u(line_count(), 0.0);
        for (std::size_t q = 0; q < line_count(); ++q)
            for (std::size_t l = 0; l < line_count(); ++l) u[q] += crosstalk_[q][l] * v[l];
        return u;
    }

    // Relaxation rate of qubit q at probe frequency f: the baseline plus a
    // weak-coupling Lorentzian per bath defect,
    //   2 (2 pi g)^2 gamma2 / (gamma2^2 + (2 pi (f - f_TLS))^2).
    double relaxation_rate(std::size_t q, std::span<const double> v, double f) const {
        if (!(f > 0.0)) throw std::invalid_argument("relaxation_rate: f must be > 0");
        return rate_at(q, defect_frequencies(q, effective_voltages(v)), f);
    }

    // Dressed qubit frequency: f01 plus per-defect dispersive shifts g^2/Delta
    // clamped to +-g to avoid the on-resonance divergence.
    double qubit_frequency(std::size_t q, std::span<const double> v) const {
        const std::vector<double> u = effective_voltages(v);
        double f = qubits_.at(q).f01;
        for (const auto& d : baths_[q]) {
            const double det = qubits_[q].f01 - tls_frequency(d.tls, u);
            const double g = d.tls.coupling_g;
            if (det == 0.0 || g == 0.0) continue;
            const double shift = g * g / det;
            f += std::clamp(shift, -g, g);
        }
        return f;
    }

    void calibrate(std::size_t q, std::span<const double> v) { f_cal_.at(q) = qubit_frequency(q, v); }
    double calibrated_frequency(std::size_t q) const { return f_cal_.at(q); }

    // Advance the virtual clock; every defect's eps0 takes an exact OU step
    //   eps0 <- eps0 e^{-theta dt} + N(0, sigma^2 (1 - e^{-2 theta dt})/(2 theta))
    // followed by Poisson-counted scrambling events that resample eps0 from
    // N(0, scramble_scale^2).
    void advance_time(double dt) {
        if (dt < 0.0) throw std::invalid_argument("advance_time: dt must be >= 0");
        if (dt == 0.0) return;
        for (std::size_t q = 0; q < qubits_.size(); ++q) {
            for (auto& d : baths_[q]) {
                if (!d.drift) continue;
                const DriftParams& p = *d.drift;
                const double decay = std::exp(-p.theta * dt);
                const double var = p.sigma * p.sigma * (1.0 - decay * decay) / (2.0 * p.theta);
                d.tls.eps0 = d.tls.eps0 * decay + drift_[q].normal(0.0, std::sqrt(var));
                const std::uint64_t events = drift_[q].poisson(p.scramble_rate * dt);
                for (std::uint64_t e = 0; e < events; ++e)
                    d.tls.eps0 = drift_[q].normal(0.0, p.scramble_scale);
            }
        }
        clock_ += dt;
    }

    // T1 = (1/Gamma(f_q)) * (1 + xi), xi ~ N(0, noise_rel^2).
    double measure_t1(std::size_t q, std::span<const double> v, double noise_rel,
                      const std::string& tag = {}) {
        if (noise_rel < 0.0) throw std::invalid_argument("measure_t1: noise_rel must be >= 0");
        MeasurementRecord rec = begin_record(MeasurementKind::t1, q, v, costs_.t1, tag);
        const double truth = 1.0 / relaxation_rate(q, v, qubit_frequency(q, v));
        const double value = apply_rel_noise(q, truth, noise_rel);
        rec.values.push_back(value);
        finish_record(std::move(rec));
        return value;
    }
    double measure_t1(std::size_t q, std::span<const double> v, const std::string& tag = {}) {
        return measure_t1(q, v, noise_.t1_rel, tag);
    }

    // P1(f) = exp(-Gamma(f) t_delay) sampled as Binomial(shots, P1)/shots.
    // shots == 0 requests the noiseless probabilities.
    std::vector<double> stark_spectroscopy(std::size_t q, std::span<const double> v,
                                           std::span<const double> f_list, double t_delay, int shots,
                                           const std::string& tag = {}) {
        if (!(t_delay > 0.0)) throw std::invalid_argument("stark_spectroscopy: t_delay must be > 0");
        if (shots < 0) throw std::invalid_argument("stark_spectroscopy: shots must be >= 0");
        if (f_list.empty()) throw std::invalid_argument("stark_spectroscopy: empty frequency list");
        MeasurementRecord rec = begin_record(MeasurementKind::spectroscopy, q, v,
                                             costs_.spectroscopy_point * static_cast<double>(f_list.size()), tag);
        rec.frequencies.assign(f_list.begin(), f_list.end());
        rec.values.reserve(f_list.size());
        const std::vector<double> f_tls = defect_frequencies(q, effective_voltages(v));
        for (double f : f_list) {
            const double p_true = std::exp(-rate_at(q, f_tls, f) * t_delay);
            double p = p_true;
            if (!noise_.noiseless && shots > 0)
                p = static_cast<double>(meas_[q].binomial(static_cast<std::uint64_t>(shots), p_true)) /
                    static_cast<double>(shots);
            rec.values.push_back(p);
        }
        std::vector<double> out = rec.values;
        finish_record(std::move(rec));
        return out;
    }

    // Error per Clifford: coherence floor plus a coherent term from the
    // TLS-induced shift away from the calibrated frequency,
    //   eps_P = (t_gate/3)(Gamma + gamma_phi0) + (pi df t_gate)^2 / 2.
    double measure_rb_error(std::size_t q, std::span<const double> v, double noise_rel,
                            const std::string& tag = {}) {
        MeasurementRecord rec = begin_record(MeasurementKind::rb, q, v, costs_.rb, tag);
        const double f_q = qubit_frequency(q, v);
        const double gamma = relaxation_rate(q, v, f_q);
        const double df = f_q - f_cal_[q];
        const double t_gate = qubits_[q].t_gate;
        const double coherent = std::pow(std::numbers::pi * df * t_gate, 2) / 2.0;
        const double truth = t_gate / 3.0 * (gamma + qubits_[q].gamma_phi0) + coherent;
        const double value = apply_rel_noise(q, truth, noise_rel);
        rec.values.push_back(value);
        finish_record(std::move(rec));
        return value;
    }
    double measure_rb_error(std::size_t q, std::span<const double> v, const std::string& tag = {}) {
        return measure_rb_error(q, v, noise_.rb_rel, tag);
    }

    // T2e = 1 / (Gamma(f_q)/2 + gamma_phi0).
    double measure_t2echo(std::size_t q, std::span<const double> v, double noise_rel,
                          const std::string& tag = {}) {
        MeasurementRecord rec = begin_record(MeasurementKind::t2e, q, v, costs_.t2e, tag);
        const double gamma = relaxation_rate(q, v, qubit_frequency(q, v));
        const double truth = 1.0 / (0.5 * gamma + qubits_[q].gamma_phi0);
        const double value = apply_rel_noise(q, truth, noise_rel);
        rec.values.push_back(value);
        finish_record(std::move(rec));
        return value;
    }
    double measure_t2echo(std::size_t q, std::span<const double> v, const std::string& tag = {}) {
        return measure_t2echo(q, v, noise_.t2e_rel, tag);
    }

    // Ramsey estimate of the dressed qubit frequency with additive noise.
    double measure_ramsey(std::size_t q, std::span<const double> v, const std::string& tag = {}) {
        MeasurementRecord rec = begin_record(MeasurementKind::ramsey, q, v, costs_.ramsey, tag);
        double value = qubit_frequency(q, v);
        if (!noise_.noiseless && noise_.ramsey_abs > 0.0) value += meas_[q].normal(0.0, noise_.ramsey_abs);
        rec.values.push_back(value);
        finish_record(std::move(rec));
        return value;
    }

    // Acquire a full spectroscopy map: for each grid voltage on line q (other
    // lines held at base), one frequency slice. Drift advances slice by slice.
    SpectroscopyMap acquire_map(std::size_t q, std::span<const double> v_grid,
                                std::span<const double> f_grid, double t_delay, int shots,
                                std::span<const double> base, const std::string& tag = {}) {
        SpectroscopyMap map;
        map.v_grid.assign(v_grid.begin(), v_grid.end());
        map.f_grid.assign(f_grid.begin(), f_grid.end());
        map.qubit = static_cast<int>(q);
        map.t_delay = t_delay;
        map.shots = noise_.noiseless ? 0 : shots;
        map.t_start = clock_;
        std::vector<double> v(base.begin(), base.end());
        if (v.size() != line_count())
            throw std::invalid_argument("acquire_map: base voltage length does not match line count");
        for (double vq : v_grid) {
            v[q] = vq;
            map.p1.push_back(stark_spectroscopy(q, v, f_grid, t_delay, shots, tag));
        }
        map.t_end = clock_;
        return map;
    }

    // Single-qubit device holding qubit q's current bath state, with noise
    // streams re-derived from the master seed and q's seed_tag (identical to
    // the streams a freshly built device would give that qubit). Sensitivities
    // and crosstalk are projected onto line q.
    DeviceModel isolate(std::size_t q) const {
        std::vector<QubitSite> qs{qubits_.at(q)};
        std::vector<std::vector<BathDefect>> bs{baths_.at(q)};
        for (auto& d : bs[0]) d.tls.sensitivity = {d.tls.sensitivity.at(q)};
        DeviceModel out(std::move(qs), std::move(bs), {{1.0}}, seed_, costs_, noise_);
        out.f_cal_[0] = f_cal_.at(q);
        out.clock_ = clock_;
        return out;
    }

  private:
    std::vector<double> defect_frequencies(std::size_t q, const std::vector<double>& u) const {
        std::vector<double> out;
        out.reserve(baths_.at(q).size());
        for (const auto& d : baths_[q]) out.push_back(tls_frequency(d.tls, u));
        return out;
    }

    double rate_at(std::size_t q, const std::vector<double>& f_tls, double f) const {
        double rate = qubits_.at(q).gamma0;
        for (std::size_t j = 0; j < baths_[q].size(); ++j) {
            const TlsDefect& tls = baths_[q][j].tls;
            const double g_rad = kTwoPi * tls.coupling_g;
            const double det_rad = kTwoPi * (f - f_tls[j]);
            rate += 2.0 * g_rad * g_rad * tls.gamma2_tls /
                    (tls.gamma2_tls * tls.gamma2_tls + det_rad * det_rad);
        }
        return rate;
    }

    MeasurementRecord begin_record(MeasurementKind kind, std::size_t q, std::span<const double> v,
                                   double cost, const std::string& tag) {
        MeasurementRecord rec;
        rec.kind = kind;
        rec.qubit = static_cast<int>(q);
        rec.voltages.assign(v.begin(), v.end());
        rec.time = clock_;
        rec.duration = cost;
        rec.noise_counter = meas_.at(q).draw_count();
        rec.tag = tag;
        return rec;
    }

    void finish_record(MeasurementRecord rec) {
        advance_time(rec.duration);
        if (sink_) sink_(rec);
    }

    double apply_rel_noise(std::size_t q, double truth, double noise_rel) {
        if (noise_.noiseless || noise_rel == 0.0) return truth;
        return truth * (1.0 + meas_[q].normal(0.0, noise_rel));
    }

    std::vector<QubitSite> qubits_;
    std::vector<std::vector<BathDefect>> baths_;
    std::vector<std::vector<double>> crosstalk_;
    MeasurementCosts costs_;
    NoiseParams noise_;
    std::uint64_t seed_;
    std::vector<RandomStream> meas_;
    std::vector<RandomStream> drift_;
    std::vector<double> f_cal_;
    double clock_ = 0.0;
    RecordSink sink_;
};

}  // namespace tictaq

#endif
