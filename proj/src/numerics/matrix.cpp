#include "vbakf/matrix.hpp"

#include "vbakf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vbakf {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError(std::string(what) + ": non-finite entry");
        }
    }
}

namespace {

void require_same_dim(const Vector& a, const Vector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("vector dimensions differ: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
    }
}

void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("matrix shapes differ: " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
    }
}

} // namespace

// ---------------------------------------------------------------- Vector

Vector::Vector(std::size_t dim) : data_(dim, 0.0) {}

Vector::Vector(std::initializer_list<double> values) : data_(values.begin(), values.end()) {
    require_finite(this->values(), "Vector");
}

Vector Vector::from(std::span<const double> values) {
    Vector v(values.size());
    std::copy(values.begin(), values.end(), v.data_.begin());
    require_finite(v.values(), "Vector");
    return v;
}

Vector Vector::constant(std::size_t dim, double value) {
    require_finite({&value, 1}, "Vector");
    Vector v(dim);
    std::fill(v.data_.begin(), v.data_.end(), value);
    return v;
}

Vector& Vector::operator+=(const Vector& other) {
    require_same_dim(*this, other);
    for (std::size_t i = 0; i < dim(); ++i) data_[i] += other.data_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& other) {
    require_same_dim(*this, other);
    for (std::size_t i = 0; i < dim(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Vector& Vector::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Vector::dot(const Vector& other) const {
    require_same_dim(*this, other);
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += data_[i] * other.data_[i];
    return acc;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(Vector a, double s) { return a *= s; }
Vector operator*(double s, Vector a) { return a *= s; }

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
    : rows_(rows), cols_(cols), data_(values.begin(), values.end()) {
    if (data_.size() != rows * cols) {
        throw DimensionMismatch("Matrix: expected " + std::to_string(rows * cols) + " entries, got " +
                                std::to_string(data_.size()));
    }
    require_finite(this->values(), "Matrix");
}

Matrix Matrix::from_row_major(std::size_t rows, std::size_t cols, std::span<const double> values) {
    if (values.size() != rows * cols) {
        throw DimensionMismatch("Matrix: expected " + std::to_string(rows * cols) + " entries, got " +
                                std::to_string(values.size()));
    }
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data_.begin());
    require_finite(m.values(), "Matrix");
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw DimensionMismatch("Matrix: empty row list");
    }
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw DimensionMismatch("Matrix: ragged rows (row " + std::to_string(r) + ")");
        }
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    require_finite(m.values(), "Matrix");
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    require_finite(diag, "Matrix");
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> diag) {
    return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

Matrix Matrix::scalar(double value) {
    require_finite({&value, 1}, "Matrix");
    Matrix m(1, 1);
    m(0, 0) = value;
    return m;
}

Matrix Matrix::outer(const Vector& a, const Vector& b) {
    Matrix m(a.dim(), b.dim());
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < b.dim(); ++c) m(r, c) = a[r] * b[c];
    return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c);
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

double Matrix::trace() const {
    if (!is_square()) throw DimensionMismatch("trace of non-square matrix");
    double acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += (*this)(i, i);
    return acc;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return std::sqrt(acc);
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matrix product: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
        }
    }
    return out;
}

Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols() != x.dim()) {
        throw DimensionMismatch("matrix-vector product: " + std::to_string(a.cols()) + " columns vs dim " +
                                std::to_string(x.dim()));
    }
    Vector out(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
        out[r] = acc;
    }
    return out;
}

Matrix sandwich(const Matrix& a, const Matrix& b) { return a * b * a.transpose(); }

} // namespace vbakf
