// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace bdcest {

using Vector = std::vector<double>;

/// Dense row-major matrix. Only what the quasi-Newton loop needs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);
/// y += a * x
void axpy(double a, const Vector& x, Vector& y);
Vector matvec(const Matrix& m, const Vector& v);
/// max_ij |m_ij - m_ji|
double symmetry_error(const Matrix& m);

/// Cholesky factor L of an SPD matrix, L L^T = A.
class CholeskyFactor {
public:
    /// Throws NotPositiveDefinite when a pivot is not strictly positive.
    static CholeskyFactor compute(const Matrix& a);

    /// Solves A x = b via the two triangular systems.
    Vector solve(const Vector& b) const;

private:
    explicit CholeskyFactor(Matrix l) : l_(std::move(l)) {}
    Matrix l_;
};

/// Solves the 3x3 system a * x = b in place (Gaussian elimination with
/// partial pivoting). Throws NoConvergence on a singular pivot.
void solve3(double a[3][3], double b[3], double x[3]);

}  // namespace bdcest
