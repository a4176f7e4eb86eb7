#include "vbakf/linalg.hpp"

#include "vbakf/error.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace vbakf {

namespace {

void require_symmetric(const Matrix& a) {
    if (!a.is_square()) {
        throw DomainError("cholesky: matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    require_finite(a.values(), "cholesky");
    const double scale = a.max_abs();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = r + 1; c < a.cols(); ++c) {
            if (std::abs(a(r, c) - a(c, r)) > kSymmetryTolerance * scale) {
                throw DomainError("cholesky: matrix is not symmetric at (" + std::to_string(r) + "," +
                                  std::to_string(c) + ")");
            }
        }
    }
}

// Plain Cholesky-Banachiewicz on the lower triangle; nullopt on a bad pivot.
std::optional<Matrix> factor(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Matrix jittered(const Matrix& a) {
    const double n = static_cast<double>(a.rows());
    Matrix out = a * (1.0 + kCholeskyJitter);
    const double shift = kCholeskyJitter * a.trace() / n;
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, i) += shift;
    return out;
}

// L^-1 b by forward substitution.
Vector forward(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

// L^-T b by back substitution.
Vector backward(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

} // namespace

Matrix cholesky(const Matrix& a) {
    require_symmetric(a);
    if (auto l = factor(a)) return *std::move(l);
    if (auto l = factor(jittered(a))) return *std::move(l);
    throw NotPositiveDefinite("cholesky: matrix of size " + std::to_string(a.rows()) +
                              " is not positive definite");
}

bool is_positive_definite(const Matrix& a) {
    if (!a.is_square() || a.empty()) return false;
    for (double v : a.values())
        if (!std::isfinite(v)) return false;
    return factor(symmetrize(a)).has_value();
}

Matrix spd_inverse(const Matrix& a) {
    const Matrix l = cholesky(a);
    const std::size_t n = a.rows();
    if (n == 1) return Matrix::scalar(1.0 / (l(0, 0) * l(0, 0)));
    Matrix inv(n, n);
    Vector e(n);
    for (std::size_t c = 0; c < n; ++c) {
        e[c] = 1.0;
        const Vector col = backward(l, forward(l, e));
        for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
        e[c] = 0.0;
    }
    return symmetrize(inv);
}

double logdet_spd(const Matrix& a) {
    const Matrix l = cholesky(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < l.rows(); ++i) acc += 2.0 * std::log(l(i, i));
    return acc;
}

Matrix symmetrize(const Matrix& a) {
    if (!a.is_square()) throw DimensionMismatch("symmetrize: non-square matrix");
    Matrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = 0.5 * (a(r, c) + a(c, r));
    return out;
}

Vector spd_solve(const Matrix& a, const Vector& b) {
    if (a.rows() != b.dim()) throw DimensionMismatch("spd_solve: dimension mismatch");
    const Matrix l = cholesky(a);
    return backward(l, forward(l, b));
}

} // namespace vbakf
