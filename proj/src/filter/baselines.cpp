#include "vbakf/error.hpp"
#include "vbakf/filter.hpp"
#include "vbakf/linalg.hpp"

namespace vbakf {

std::vector<GaussianBelief> kalman_sequential(const ObservationSet& observations, const Matrix& f, const Matrix& h,
                                              std::span<const Matrix> q_schedule, std::span<const Matrix> r_schedule,
                                              const GaussianBelief& x0) {
    const std::size_t T = observations.horizon();
    if (q_schedule.size() != T || r_schedule.size() != T) {
        throw LengthMismatch("kalman_sequential: noise schedules must have one entry per time step");
    }
    x0.validate();
    const Matrix ht = h.transpose();
    const Matrix eye = Matrix::identity(f.rows());

    std::vector<GaussianBelief> out;
    out.reserve(T);
    GaussianBelief belief = x0;
    for (std::size_t k = 0; k < T; ++k) {
        belief.mean = f * belief.mean;
        belief.cov = symmetrize(sandwich(f, belief.cov) + q_schedule[k]);
        for (std::size_t i = 0; i < observations.n_sensors(); ++i) {
            const auto& y = observations.y(k, i);
            if (!y) continue;
            const Matrix pht = belief.cov * ht;
            const Matrix gain = pht * spd_inverse(h * pht + r_schedule[k]);
            belief.mean += gain * (*y - h * belief.mean);
            belief.cov = symmetrize((eye - gain * h) * belief.cov);
        }
        out.push_back(belief);
    }
    return out;
}

std::vector<Matrix> true_q_schedule(const ScenarioConfig& config) {
    std::vector<Matrix> out;
    out.reserve(config.horizon);
    for (std::size_t k = 0; k < config.horizon; ++k) out.push_back(regime_at(config, k).q_true);
    return out;
}

std::vector<Matrix> true_r_schedule(const ScenarioConfig& config) {
    std::vector<Matrix> out;
    out.reserve(config.horizon);
    for (std::size_t k = 0; k < config.horizon; ++k) out.push_back(regime_at(config, k).r_true);
    return out;
}

std::vector<GaussianBelief> kalman_oracle(const SensorDataset& dataset, const GaussianBelief& x0) {
    const ScenarioConfig& c = dataset.config();
    return kalman_sequential(dataset.observations(), c.f, c.h, true_q_schedule(c), true_r_schedule(c), x0);
}

std::vector<GaussianBelief> kalman_static(const SensorDataset& dataset, const Matrix& q_nominal, const Matrix& r_nominal,
                                          const GaussianBelief& x0) {
    const ScenarioConfig& c = dataset.config();
    const std::vector<Matrix> q(c.horizon, q_nominal);
    const std::vector<Matrix> r(c.horizon, r_nominal);
    return kalman_sequential(dataset.observations(), c.f, c.h, q, r, x0);
}

} // namespace vbakf
