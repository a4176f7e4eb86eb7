#include "vbakf/error.hpp"
#include "vbakf/filter.hpp"
#include "vbakf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vbakf {

void VbHyperParams::validate(std::size_t d_x, std::size_t d_y) const {
    try {
        q_prior.validate();
        r_prior.validate();
        rho_prior.validate();
        beta_prior.validate();
    } catch (const DomainError& err) {
        throw ConfigError(std::string("hyper-parameters: ") + err.what());
    }
    if (q_prior.dim() != d_x) throw ConfigError("q_prior scale must be d_x x d_x");
    if (r_prior.dim() != d_y) throw ConfigError("r_prior scale must be d_y x d_y");
    if (!(r_prior.dof > static_cast<double>(d_y) + 1.0)) {
        throw ConfigError("r_prior dof must exceed d_y + 1 so that the plug-in mean of R exists");
    }
    if (e.rows() != d_y || e.cols() != d_y) throw ConfigError("e must be d_y x d_y");
    if (!is_positive_definite(e)) throw ConfigError("e is not symmetric positive definite");
    if (n_iters < 1) throw ConfigError("n_iters must be at least 1");
}

GaussianBelief predict(const GaussianBelief& prev, const Matrix& f, const Matrix& eq_inv) {
    return {f * prev.mean, symmetrize(sandwich(f, prev.cov) + spd_inverse(eq_inv))};
}

namespace {

// r^T A r + tr(A H P H^T) for symmetric A.
double expected_quadratic(const Vector& y, const GaussianBelief& pred, const Matrix& h, const Matrix& precision) {
    const Vector r = y - h * pred.mean;
    const Matrix hph = sandwich(h, pred.cov);
    return r.dot(precision * r) + (precision * hph).trace();
}

} // namespace

double delta_clean(const Vector& y, const GaussianBelief& pred, const Matrix& h, const Matrix& er_inv,
                   double e_logdet_r, double e_log_beta) {
    return e_log_beta - 0.5 * e_logdet_r - 0.5 * expected_quadratic(y, pred, h, er_inv);
}

double delta_corrupt(const Vector& y, const GaussianBelief& pred, const Matrix& h, const Matrix& r_mean_plus_e_inv,
                     double logdet_r_plus_e, double e_log_1mbeta) {
    return e_log_1mbeta - 0.5 * logdet_r_plus_e - 0.5 * expected_quadratic(y, pred, h, r_mean_plus_e_inv);
}

double responsibility(double d1, double d0) {
    const double m = std::max(d1, d0);
    const double clean = std::exp(d1 - m);
    const double corrupt = std::exp(d0 - m);
    return clean / (clean + corrupt);
}

Matrix effective_precision(double pi, const Matrix& er_inv, const Matrix& r_plus_e_inv) {
    if (pi == 1.0) return er_inv;
    if (pi == 0.0) return r_plus_e_inv;
    return symmetrize(er_inv * pi + r_plus_e_inv * (1.0 - pi));
}

GaussianBelief gated_update(const GaussianBelief& inter, const std::optional<Vector>& y, bool gamma,
                            const Matrix& omega, const Matrix& h) {
    if (!gamma) return inter;
    if (!y) throw DomainError("gated_update: gamma = 1 but the observation is absent");
    const Matrix pht = inter.cov * h.transpose();
    const Matrix innovation_cov = spd_inverse(omega) + h * pht;
    const Matrix gain = pht * spd_inverse(innovation_cov);
    GaussianBelief out;
    out.mean = inter.mean + gain * (*y - h * inter.mean);
    out.cov = symmetrize((Matrix::identity(inter.dim()) - gain * h) * inter.cov);
    return out;
}

BetaParams update_rho(const BetaParams& prior, std::size_t received, std::size_t n_sensors) {
    if (received > n_sensors) throw DomainError("update_rho: received count exceeds sensor count");
    return beta_posterior(prior, static_cast<double>(received), static_cast<double>(n_sensors - received));
}

BetaParams update_beta(const BetaParams& prior, std::span<const std::uint8_t> gamma, std::span<const double> pi) {
    if (gamma.size() != pi.size()) throw LengthMismatch("update_beta: gamma and pi lengths differ");
    double clean = 0.0;
    double corrupt = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (!gamma[i]) continue;
        clean += pi[i];
        corrupt += 1.0 - pi[i];
    }
    return beta_posterior(prior, clean, corrupt);
}

InverseWishartParams update_r(const InverseWishartParams& prior, const GaussianBelief& post,
                              std::span<const std::optional<Vector>> ys, std::span<const std::uint8_t> gamma,
                              std::span<const double> pi, const Matrix& h) {
    if (ys.size() != gamma.size() || ys.size() != pi.size()) {
        throw LengthMismatch("update_r: ys, gamma and pi lengths differ");
    }
    const Vector predicted_y = h * post.mean;
    const Matrix hph = sandwich(h, post.cov);
    InverseWishartParams out = prior;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!gamma[i] || pi[i] == 0.0) continue;
        if (!ys[i]) throw DomainError("update_r: gamma = 1 but the observation is absent");
        const Vector r = *ys[i] - predicted_y;
        out.dof += pi[i];
        out.scale += (Matrix::outer(r, r) + hph) * pi[i];
    }
    out.scale = symmetrize(out.scale);
    return out;
}

InverseWishartParams update_q(const InverseWishartParams& prior, const GaussianBelief& post,
                              const GaussianBelief& prev, const Matrix& pred_cov, const Matrix& f,
                              bool* cross_term_dropped) {
    const Vector jump = post.mean - f * prev.mean;
    Matrix scale = prior.scale + Matrix::outer(jump, jump) + post.cov + sandwich(f, prev.cov);

    bool dropped = false;
    try {
        const Matrix cross = post.cov * spd_inverse(pred_cov) * f * prev.cov;
        const Matrix f_cross_t = f * cross.transpose();
        scale -= f_cross_t + f_cross_t.transpose();
    } catch (const NotPositiveDefinite&) {
        dropped = true;
    }
    if (cross_term_dropped) *cross_term_dropped = dropped;

    scale = symmetrize(scale);
    cholesky(scale);  // SPD check with the jitter policy; throws NotPositiveDefinite
    return {prior.dof + 1.0, std::move(scale)};
}

} // namespace vbakf
