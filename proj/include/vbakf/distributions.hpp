#pragma once

// Conjugate-family containers and the posterior expectations consumed by the
// variational updates.
//
// Inverse-Wishart convention: R ~ IW(dof, scale) means R^-1 ~ Wishart(dof,
// scale^-1), so
//   E[R^-1]   = dof * scale^-1
//   E[R]      = scale / (dof - d - 1)            (dof > d + 1)
//   E[ln|R|]  = ln|scale| - d ln 2 - sum_j psi((dof + 1 - j) / 2)

#include "vbakf/matrix.hpp"
#include "vbakf/rng.hpp"

namespace vbakf {

struct InverseWishartParams {
    double dof = 0.0;
    Matrix scale;

    std::size_t dim() const { return scale.rows(); }
    /// Throws DomainError unless scale is SPD and dof > dim - 1.
    void validate() const;
};

struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    /// Throws DomainError unless a > 0 and b > 0 (finite).
    void validate() const;
};

struct GaussianBelief {
    Vector mean;
    Matrix cov;

    std::size_t dim() const { return mean.dim(); }
    /// Throws DimensionMismatch / NotPositiveDefinite.
    void validate() const;
};

/// scale / (dof - d - 1); MeanUndefined when dof <= d + 1.
Matrix iw_mean(const InverseWishartParams& p);

/// dof * scale^-1.
Matrix iw_mean_precision(const InverseWishartParams& p);

double iw_expected_logdet(const InverseWishartParams& p);

double beta_mean(const BetaParams& p);

/// E[ln beta] = psi(a) - psi(a + b).
double beta_expected_log(const BetaParams& p);

/// E[ln(1 - beta)] = psi(b) - psi(a + b).
double beta_expected_log_complement(const BetaParams& p);

/// (a + successes, b + failures). Counts may be fractional.
BetaParams beta_posterior(const BetaParams& prior, double successes, double failures);

/// mean + L z with L = cholesky(cov), z standard normal.
Vector gaussian_sample(const GaussianBelief& belief, Rng& rng);

/// z ~ N(0, I_dim).
Vector standard_normal_vector(std::size_t dim, Rng& rng);

} // namespace vbakf
