#include "vbakf/simulator.hpp"

#include "vbakf/distributions.hpp"
#include "vbakf/error.hpp"
#include "vbakf/linalg.hpp"
#include "vbakf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vbakf {

namespace {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ConfigError(std::string(name) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_spd(const Matrix& m, const std::string& name) {
    if (!is_positive_definite(m)) throw ConfigError(name + " is not symmetric positive definite");
}

void require_rate(double r, const std::string& name) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(name + " must lie in [0,1], got " + std::to_string(r));
}

} // namespace

bool operator==(const RegimeSegment& a, const RegimeSegment& b) {
    return a.start_k == b.start_k && a.end_k == b.end_k && a.q_true == b.q_true && a.r_true == b.r_true &&
           a.dropout_rate == b.dropout_rate && a.corruption_rate == b.corruption_rate;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.d_x == b.d_x && a.d_y == b.d_y && a.f == b.f && a.h == b.h && a.e == b.e &&
           a.n_sensors == b.n_sensors && a.horizon == b.horizon && a.segments == b.segments &&
           a.x0_mean == b.x0_mean && a.x0_cov == b.x0_cov;
}

void ScenarioConfig::validate() const {
    if (d_x == 0 || d_y == 0) throw ConfigError("d_x and d_y must be positive");
    if (n_sensors == 0) throw ConfigError("n_sensors must be positive");
    if (horizon == 0) throw ConfigError("horizon must be positive");
    require_shape(f, d_x, d_x, "f");
    require_shape(h, d_y, d_x, "h");
    require_shape(e, d_y, d_y, "e");
    require_spd(e, "e");
    if (x0_mean.dim() != d_x) throw ConfigError("x0_mean must have dimension d_x");
    require_shape(x0_cov, d_x, d_x, "x0_cov");
    require_spd(x0_cov, "x0_cov");

    if (segments.empty()) throw ConfigError("segments must cover [0, horizon)");
    std::size_t expected_start = 0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const RegimeSegment& seg = segments[s];
        const std::string where = "segments[" + std::to_string(s) + "]";
        if (seg.start_k != expected_start) {
            throw ConfigError(where + " starts at " + std::to_string(seg.start_k) + ", expected " +
                              std::to_string(expected_start) + " (gap or overlap)");
        }
        if (seg.end_k <= seg.start_k) throw ConfigError(where + " is empty");
        if (seg.end_k > horizon) throw ConfigError(where + " extends past the horizon");
        require_shape(seg.q_true, d_x, d_x, (where + ".q_true").c_str());
        require_shape(seg.r_true, d_y, d_y, (where + ".r_true").c_str());
        require_spd(seg.q_true, where + ".q_true");
        require_spd(seg.r_true, where + ".r_true");
        require_rate(seg.dropout_rate, where + ".dropout_rate");
        require_rate(seg.corruption_rate, where + ".corruption_rate");
        expected_start = seg.end_k;
    }
    if (expected_start != horizon) {
        throw ConfigError("segments end at " + std::to_string(expected_start) + " but horizon is " +
                          std::to_string(horizon));
    }
}

const RegimeSegment& regime_at(const ScenarioConfig& config, std::size_t k) {
    auto it = std::find_if(config.segments.begin(), config.segments.end(),
                           [k](const RegimeSegment& s) { return s.start_k <= k && k < s.end_k; });
    if (it == config.segments.end() || k >= config.horizon) {
        throw ConfigError("time index " + std::to_string(k) + " is not covered by any segment");
    }
    return *it;
}

// ---------------------------------------------------------------- ObservationSet

ObservationSet::ObservationSet(std::size_t n_sensors, std::size_t horizon, std::size_t d_y)
    : n_sensors_(n_sensors), horizon_(horizon), d_y_(d_y), y_(n_sensors * horizon) {}

std::size_t ObservationSet::received_count(std::size_t k) const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < n_sensors_; ++i) m += received(k, i) ? 1 : 0;
    return m;
}

void ObservationSet::set(std::size_t k, std::size_t sensor, Vector y) {
    if (y.dim() != d_y_) throw DimensionMismatch("observation has dimension " + std::to_string(y.dim()));
    y_[index(k, sensor)] = std::move(y);
}

void ObservationSet::drop(std::size_t k, std::size_t sensor) { y_[index(k, sensor)].reset(); }

// ---------------------------------------------------------------- SensorDataset

SensorDataset::SensorDataset(ScenarioConfig config, std::uint64_t seed, std::vector<Vector> x_true,
                             ObservationSet observations, std::vector<std::uint8_t> clean_mask)
    : config_(std::move(config)), seed_(seed), x_true_(std::move(x_true)), observations_(std::move(observations)),
      clean_mask_(std::move(clean_mask)) {}

SensorDataset generate(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t T = config.horizon;
    const std::size_t N = config.n_sensors;

    // Cholesky factors per segment, computed once.
    std::vector<Matrix> q_chol, r_chol;
    for (const auto& seg : config.segments) {
        q_chol.push_back(cholesky(seg.q_true));
        r_chol.push_back(cholesky(seg.r_true));
    }
    const Matrix e_chol = cholesky(config.e);
    auto segment_index = [&](std::size_t k) {
        return static_cast<std::size_t>(&regime_at(config, k) - config.segments.data());
    };

    Rng state_rng(derive_seed(seed, "state"));
    std::vector<Vector> x_true;
    x_true.reserve(T);
    Vector x = gaussian_sample({config.x0_mean, config.x0_cov}, state_rng);
    for (std::size_t k = 0; k < T; ++k) {
        x = config.f * x + q_chol[segment_index(k)] * standard_normal_vector(config.d_x, state_rng);
        x_true.push_back(x);
    }

    ObservationSet obs(N, T, config.d_y);
    std::vector<std::uint8_t> clean(N * T, 1);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
        Rng rng(derive_seed(seed, "sensor", i));
        for (std::size_t k = 0; k < T; ++k) {
            const std::size_t s = segment_index(k);
            const RegimeSegment& seg = config.segments[s];
            const double u_gamma = uniform(rng);
            const double u_clean = uniform(rng);
            const Vector v = r_chol[s] * standard_normal_vector(config.d_y, rng);
            const Vector eps = e_chol * standard_normal_vector(config.d_y, rng);

            const bool received = u_gamma >= seg.dropout_rate;
            const bool is_clean = u_clean >= seg.corruption_rate;
            clean[k * N + i] = is_clean ? 1 : 0;
            if (!received) continue;
            Vector y = config.h * x_true[k] + v;
            if (!is_clean) y += eps;
            obs.set(k, i, std::move(y));
        }
    }
    return SensorDataset(config, seed, std::move(x_true), std::move(obs), std::move(clean));
}

} // namespace vbakf
