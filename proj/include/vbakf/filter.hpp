#pragma once

// Variational Bayesian adaptive Kalman filter for N sensors with packet
// dropouts and corrupted observations.
//
// Per time step: the survival-rate posterior is formed from the received
// count, then J variational sweeps run
//   predict -> responsibilities at the predictive belief -> gated sequential
//   fusion over sensors -> clean-rate, R and Q conjugate updates -> refresh
//   of E[Q^-1], E[R^-1].
// Priors for Q, R, rho, beta re-anchor at the static hyper-priors every step;
// only the state belief threads through time.

#include "vbakf/distributions.hpp"
#include "vbakf/kernels.hpp"
#include "vbakf/matrix.hpp"
#include "vbakf/simulator.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vbakf {

struct VbHyperParams {
    InverseWishartParams q_prior;  ///< (nu_0, V_0)
    InverseWishartParams r_prior;  ///< (u_0, U_0)
    BetaParams rho_prior;          ///< survival rate prior
    BetaParams beta_prior;         ///< clean rate prior
    Matrix e;                      ///< known corruption covariance E
    std::size_t n_iters = 20;      ///< J
    /// When false the corrupted branch is switched off: every received
    /// observation gets responsibility 1.
    bool model_corruption = true;

    /// Throws ConfigError: r_prior.dof > d_y + 1, q_prior.dof > d_x - 1,
    /// n_iters >= 1, SPD scales, E SPD and d_y x d_y.
    void validate(std::size_t d_x, std::size_t d_y) const;
};

/// Quantities carried between the variational sweeps of one time step.
struct IterationState {
    Matrix eq_inv;  ///< E[Q^-1]
    Matrix er_inv;  ///< E[R^-1]
    InverseWishartParams q_post;
    InverseWishartParams r_post;
    BetaParams beta_post;
    std::vector<double> pi;  ///< meaningful where gamma = 1; 0 elsewhere
};

struct VbPosterior {
    GaussianBelief belief;  ///< (x_{k|k}, P_{k|k})
    InverseWishartParams q_post;
    InverseWishartParams r_post;
    BetaParams rho_post;
    BetaParams beta_post;
    std::vector<double> pi;
    double dropout_rate_est = 0.0;     ///< E[1 - rho_k]
    double corruption_rate_est = 0.0;  ///< E[1 - beta_k]
    Matrix eq_inv;
    Matrix er_inv;
    /// Sweeps in which P_{k|k-1} could not be inverted and the smoother
    /// cross term was dropped from the Q update.
    std::size_t cross_term_fallbacks = 0;
};

enum class FusionPath {
    automatic,  ///< batched kernels when d_y = 1, matrix path otherwise
    generic,    ///< per-sensor matrix operations only
};

struct VbOptions {
    /// Pin E[Q^-1] / E[R^-1] instead of refreshing them from the posteriors.
    std::optional<Matrix> frozen_q_precision;
    std::optional<Matrix> frozen_r_precision;
    FusionPath path = FusionPath::automatic;
    /// Kernel variant for the batched path; nullptr selects kernels::active().
    const kernels::KernelTable* kernels = nullptr;
};

// ------------------------------------------------------------ building blocks

/// mean = F m, cov = sym(F P F^T + E[Q^-1]^-1).
GaussianBelief predict(const GaussianBelief& prev, const Matrix& f, const Matrix& eq_inv);

/// Clean-branch log evidence (up to a constant) of one observation, evaluated
/// at the predictive belief:
///   E[ln beta] - ln|R|/2 - r^T E[R^-1] r / 2 - tr(E[R^-1] H P H^T) / 2.
double delta_clean(const Vector& y, const GaussianBelief& pred, const Matrix& h, const Matrix& er_inv,
                   double e_logdet_r, double e_log_beta);

/// Corrupted-branch counterpart with (E[R] + E) plug-ins.
double delta_corrupt(const Vector& y, const GaussianBelief& pred, const Matrix& h, const Matrix& r_mean_plus_e_inv,
                     double logdet_r_plus_e, double e_log_1mbeta);

/// exp(d1) / (exp(d1) + exp(d0)), shifted by max(d1, d0).
double responsibility(double d1, double d0);

/// pi E[R^-1] + (1 - pi)(E[R] + E)^-1, symmetrized.
Matrix effective_precision(double pi, const Matrix& er_inv, const Matrix& r_plus_e_inv);

/// Gain K = gamma P H^T (omega^-1 + H P H^T)^-1. With gamma = 0 the belief is
/// returned unchanged and y is never read.
GaussianBelief gated_update(const GaussianBelief& inter, const std::optional<Vector>& y, bool gamma,
                            const Matrix& omega, const Matrix& h);

/// Beta(a + M, b + N - M).
BetaParams update_rho(const BetaParams& prior, std::size_t received, std::size_t n_sensors);

/// Beta(a + sum gamma pi, b + sum gamma (1 - pi)).
BetaParams update_beta(const BetaParams& prior, std::span<const std::uint8_t> gamma, std::span<const double> pi);

/// u = u_0 + sum gamma pi,
/// U = U_0 + sum gamma pi [(y - H x)(y - H x)^T + H P H^T] at the fused posterior.
InverseWishartParams update_r(const InverseWishartParams& prior, const GaussianBelief& post,
                              std::span<const std::optional<Vector>> ys, std::span<const std::uint8_t> gamma,
                              std::span<const double> pi, const Matrix& h);

/// nu = nu_0 + 1,
/// V = V_0 + (x_k - F x_{k-1})(.)^T + P_k + F P_{k-1} F^T - (F C^T + C F^T),
/// with the one-lag smoother cross covariance C = P_k P_{k|k-1}^-1 F P_{k-1}.
/// If P_{k|k-1} cannot be inverted the cross term is dropped and
/// *cross_term_dropped (when given) is set.
InverseWishartParams update_q(const InverseWishartParams& prior, const GaussianBelief& post,
                              const GaussianBelief& prev, const Matrix& pred_cov, const Matrix& f,
                              bool* cross_term_dropped = nullptr);

// ------------------------------------------------------------ filter

/// One time step. `ys` holds one entry per sensor; an empty optional is a
/// dropped packet. `step` only labels errors.
VbPosterior vb_step(const GaussianBelief& prev, std::span<const std::optional<Vector>> ys, const VbHyperParams& hyper,
                    const Matrix& f, const Matrix& h, const VbOptions& options = {}, long step = -1);

/// Runs vb_step over the whole horizon.
std::vector<VbPosterior> run_filter(const ObservationSet& observations, const VbHyperParams& hyper,
                                    const GaussianBelief& x0, const Matrix& f, const Matrix& h,
                                    const VbOptions& options = {});

/// Uses the dataset's F and H. Only observations() is handed to the filter.
std::vector<VbPosterior> run_filter(const SensorDataset& dataset, const VbHyperParams& hyper, const GaussianBelief& x0,
                                    const VbOptions& options = {});

// ------------------------------------------------------------ baselines

/// Sequential-update Kalman filter over received observations with the
/// given per-step Q_k and R_k (one entry per time step).
std::vector<GaussianBelief> kalman_sequential(const ObservationSet& observations, const Matrix& f, const Matrix& h,
                                              std::span<const Matrix> q_schedule, std::span<const Matrix> r_schedule,
                                              const GaussianBelief& x0);

/// True Q_k / R_k schedules of a scenario, one matrix per time step.
std::vector<Matrix> true_q_schedule(const ScenarioConfig& config);
std::vector<Matrix> true_r_schedule(const ScenarioConfig& config);

/// Kalman filter with full knowledge of the true noise schedules.
std::vector<GaussianBelief> kalman_oracle(const SensorDataset& dataset, const GaussianBelief& x0);

/// Kalman filter with fixed nominal Q and R.
std::vector<GaussianBelief> kalman_static(const SensorDataset& dataset, const Matrix& q_nominal, const Matrix& r_nominal,
                                          const GaussianBelief& x0);

} // namespace vbakf
