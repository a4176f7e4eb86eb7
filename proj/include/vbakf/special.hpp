#pragma once

namespace vbakf {

/// psi(x) = d/dx ln Gamma(x) for x > 0; throws DomainError otherwise.
/// Shifts x up to >= 6 with psi(x) = psi(x+1) - 1/x, then applies the
/// asymptotic expansion. Absolute error < 1e-10 on [1e-3, 1e6].
double digamma(double x);

} // namespace vbakf
