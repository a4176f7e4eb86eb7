#pragma once

#include "vbakf/matrix.hpp"

namespace vbakf {

/// Relative asymmetry admitted by cholesky().
inline constexpr double kSymmetryTolerance = 1e-10;
/// Scale of the single jitter retry: a*(1+j) + j*trace(a)/n*I.
inline constexpr double kCholeskyJitter = 1e-12;

/// Lower-triangular L with L*L^T = a. On a non-positive pivot, retries once
/// with the jittered matrix before throwing NotPositiveDefinite.
/// Throws DomainError for non-square or asymmetric input.
Matrix cholesky(const Matrix& a);

/// Strict check (no jitter): true when the factorization of `a` succeeds.
bool is_positive_definite(const Matrix& a);

/// Inverse of an SPD matrix via its Cholesky factor, symmetrized.
Matrix spd_inverse(const Matrix& a);

/// ln|a| = sum 2 ln L_ii.
double logdet_spd(const Matrix& a);

/// (a + a^T) / 2.
Matrix symmetrize(const Matrix& a);

/// Solves a*x = b for SPD a.
Vector spd_solve(const Matrix& a, const Vector& b);

} // namespace vbakf
