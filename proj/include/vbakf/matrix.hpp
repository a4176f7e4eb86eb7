#pragma once

// Dense real vectors and row-major matrices sized for state-estimation
// problems (dimension <= ~6). Storage is inline up to 16 entries so the
// per-sensor hot loop does not touch the heap in the common low-dimension case.

#include <boost/container/small_vector.hpp>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace vbakf {

class Vector {
public:
    using Storage = boost::container::small_vector<double, 8>;

    Vector() = default;
    /// Zero vector of the given dimension.
    explicit Vector(std::size_t dim);
    /// Throws DomainError on non-finite entries.
    Vector(std::initializer_list<double> values);

    static Vector from(std::span<const double> values);
    static Vector constant(std::size_t dim, double value);

    std::size_t dim() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    std::span<const double> values() const { return {data_.data(), data_.size()}; }
    std::span<double> values() { return {data_.data(), data_.size()}; }

    Vector& operator+=(const Vector& other);
    Vector& operator-=(const Vector& other);
    Vector& operator*=(double s);

    double dot(const Vector& other) const;
    double squared_norm() const { return dot(*this); }

    bool operator==(const Vector& other) const = default;

private:
    Storage data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(Vector a, double s);
Vector operator*(double s, Vector a);

class Matrix {
public:
    using Storage = boost::container::small_vector<double, 16>;

    Matrix() = default;
    /// Zero matrix.
    Matrix(std::size_t rows, std::size_t cols);
    /// Row-major values; throws DimensionMismatch on a count mismatch and
    /// DomainError on non-finite entries.
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    static Matrix from_row_major(std::size_t rows, std::size_t cols, std::span<const double> values);
    /// Nested rows; all rows must have equal length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    static Matrix diagonal(std::initializer_list<double> diag);
    /// 1x1 matrix.
    static Matrix scalar(double value);
    static Matrix outer(const Vector& a, const Vector& b);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> values() const { return {data_.data(), data_.size()}; }
    std::span<double> values() { return {data_.data(), data_.size()}; }
    std::vector<std::vector<double>> to_rows() const;

    Matrix transpose() const;
    double trace() const;
    double max_abs() const;
    double frobenius_norm() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Storage data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

/// a * b * a^T, the covariance propagation pattern.
Matrix sandwich(const Matrix& a, const Matrix& b);

/// Throws DomainError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

} // namespace vbakf
