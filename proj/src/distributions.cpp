#include "vbakf/distributions.hpp"

#include "vbakf/error.hpp"
#include "vbakf/linalg.hpp"
#include "vbakf/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vbakf {

void InverseWishartParams::validate() const {
    if (!scale.is_square() || scale.empty()) {
        throw DomainError("inverse-Wishart scale must be a non-empty square matrix");
    }
    const double d = static_cast<double>(dim());
    if (!std::isfinite(dof) || !(dof > d - 1.0)) {
        throw DomainError("inverse-Wishart dof must exceed dim - 1 (dof=" + std::to_string(dof) +
                          ", dim=" + std::to_string(dim()) + ")");
    }
    if (!is_positive_definite(scale)) throw DomainError("inverse-Wishart scale is not SPD");
}

void BetaParams::validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("Beta parameters must be positive (a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
    }
}

void GaussianBelief::validate() const {
    if (cov.rows() != mean.dim() || cov.cols() != mean.dim()) {
        throw DimensionMismatch("Gaussian belief: covariance does not match mean dimension");
    }
    if (!is_positive_definite(cov)) throw NotPositiveDefinite("Gaussian belief covariance is not SPD");
}

Matrix iw_mean(const InverseWishartParams& p) {
    const double d = static_cast<double>(p.dim());
    const double denom = p.dof - d - 1.0;
    if (!(denom > 0.0)) {
        throw MeanUndefined("inverse-Wishart mean needs dof > dim + 1 (dof=" + std::to_string(p.dof) +
                            ", dim=" + std::to_string(p.dim()) + ")");
    }
    return p.scale * (1.0 / denom);
}

Matrix iw_mean_precision(const InverseWishartParams& p) { return spd_inverse(p.scale) * p.dof; }

double iw_expected_logdet(const InverseWishartParams& p) {
    const std::size_t d = p.dim();
    double acc = logdet_spd(p.scale) - static_cast<double>(d) * std::numbers::ln2;
    for (std::size_t j = 1; j <= d; ++j) {
        acc -= digamma(0.5 * (p.dof + 1.0 - static_cast<double>(j)));
    }
    return acc;
}

double beta_mean(const BetaParams& p) { return p.a / (p.a + p.b); }

double beta_expected_log(const BetaParams& p) { return digamma(p.a) - digamma(p.a + p.b); }

double beta_expected_log_complement(const BetaParams& p) { return digamma(p.b) - digamma(p.a + p.b); }

BetaParams beta_posterior(const BetaParams& prior, double successes, double failures) {
    if (!(successes >= 0.0) || !(failures >= 0.0)) {
        throw DomainError("Beta evidence counts must be non-negative");
    }
    return {prior.a + successes, prior.b + failures};
}

Vector standard_normal_vector(std::size_t dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(dim);
    for (std::size_t i = 0; i < dim; ++i) z[i] = normal(rng);
    return z;
}

Vector gaussian_sample(const GaussianBelief& belief, Rng& rng) {
    const Matrix l = cholesky(belief.cov);
    return belief.mean + l * standard_normal_vector(belief.dim(), rng);
}

} // namespace vbakf
