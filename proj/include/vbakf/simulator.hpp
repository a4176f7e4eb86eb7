#pragma once

// Generative model for N sensors observing one linear-Gaussian trajectory:
//
//   x_k     = F x_{k-1} + w_k,                         w_k ~ N(0, Q_k)
//   y_{i,k} = H x_k + v_{i,k} + (1 - z_{i,k}) eps,     v ~ N(0, R_k), eps ~ N(0, E)
//
// received only when gamma_{i,k} = 1. gamma ~ Bernoulli(1 - dropout_rate(k))
// is observable; z ~ Bernoulli(1 - corruption_rate(k)) is latent and kept
// for evaluation only. Time indices are 0-based: k = 0 is the first step
// after the initial state x_0.

#include "vbakf/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vbakf {

struct RegimeSegment {
    std::size_t start_k = 0;  ///< inclusive
    std::size_t end_k = 0;    ///< exclusive
    Matrix q_true;
    Matrix r_true;
    double dropout_rate = 0.0;     ///< 1 - rho_k
    double corruption_rate = 0.0;  ///< 1 - beta_k
};

struct ScenarioConfig {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    Matrix f;
    Matrix h;
    Matrix e;  ///< corruption covariance E
    std::size_t n_sensors = 1;
    std::size_t horizon = 1;
    std::vector<RegimeSegment> segments;
    Vector x0_mean;
    Matrix x0_cov;

    /// Throws ConfigError on inconsistent dimensions, non-SPD covariances,
    /// rates outside [0,1], or segments that do not partition [0, horizon).
    void validate() const;
};

/// The segment containing k; ConfigError when k is not covered.
const RegimeSegment& regime_at(const ScenarioConfig& config, std::size_t k);

/// What a filter is allowed to see: received observations and the dropout mask.
class ObservationSet {
public:
    ObservationSet() = default;
    ObservationSet(std::size_t n_sensors, std::size_t horizon, std::size_t d_y);

    std::size_t n_sensors() const { return n_sensors_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t d_y() const { return d_y_; }

    bool received(std::size_t k, std::size_t sensor) const { return y_[index(k, sensor)].has_value(); }
    /// Absent when gamma = 0.
    const std::optional<Vector>& y(std::size_t k, std::size_t sensor) const { return y_[index(k, sensor)]; }
    std::size_t received_count(std::size_t k) const;
    /// All sensors' entries at time k, in sensor order.
    std::span<const std::optional<Vector>> step(std::size_t k) const {
        return {y_.data() + k * n_sensors_, n_sensors_};
    }

    /// Marks (k, sensor) received with the given observation.
    void set(std::size_t k, std::size_t sensor, Vector y);
    /// Marks (k, sensor) dropped.
    void drop(std::size_t k, std::size_t sensor);

    bool operator==(const ObservationSet&) const = default;

private:
    std::size_t index(std::size_t k, std::size_t sensor) const { return k * n_sensors_ + sensor; }

    std::size_t n_sensors_ = 0;
    std::size_t horizon_ = 0;
    std::size_t d_y_ = 0;
    std::vector<std::optional<Vector>> y_;
};

class SensorDataset {
public:
    SensorDataset(ScenarioConfig config, std::uint64_t seed, std::vector<Vector> x_true, ObservationSet observations,
                  std::vector<std::uint8_t> clean_mask);

    const ScenarioConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Vector>& x_true() const { return x_true_; }
    const ObservationSet& observations() const { return observations_; }

    /// Latent z_{i,k} (1 = clean), indexed [k * N + i]. Evaluation code only:
    /// filters receive observations(), which carries no corruption information.
    const std::vector<std::uint8_t>& evaluation_clean_mask() const { return clean_mask_; }

    bool operator==(const SensorDataset&) const = default;

private:
    ScenarioConfig config_;
    std::uint64_t seed_;
    std::vector<Vector> x_true_;
    ObservationSet observations_;
    std::vector<std::uint8_t> clean_mask_;
};

/// Samples a dataset. Deterministic in (config, seed): the state process and
/// each sensor draw from their own derived streams, and every sensor consumes
/// the same number of draws per step whatever the rates.
SensorDataset generate(const ScenarioConfig& config, std::uint64_t seed);

bool operator==(const RegimeSegment& a, const RegimeSegment& b);
bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

} // namespace vbakf
