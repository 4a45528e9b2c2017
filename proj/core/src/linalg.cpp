// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/linalg.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>

#include "bdcest/errors.hpp"

namespace bdcest {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(const Vector& a, const Vector& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void axpy(double a, const Vector& x, Vector& y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vector matvec(const Matrix& m, const Vector& v) {
    assert(m.cols() == v.size());
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        const double* row = m.data() + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

double symmetry_error(const Matrix& m) {
    assert(m.rows() == m.cols());
    double e = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            e = std::max(e, std::abs(m(i, j) - m(j, i)));
    return e;
}

CholeskyFactor CholeskyFactor::compute(const Matrix& a) {
    assert(a.rows() == a.cols());
    const std::size_t n = a.rows();
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            throw NotPositiveDefinite("cholesky: non-positive pivot at row " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::solve(const Vector& b) const {
    const std::size_t n = l_.rows();
    assert(b.size() == n);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
        x[ii] = s / l_(ii, ii);
    }
    return x;
}

void solve3(double a[3][3], double b[3], double x[3]) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[pivot]][col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        const double p = a[perm[col]][col];
        if (p == 0.0 || !std::isfinite(p)) throw NoConvergence("solve3: singular Jacobian");
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[perm[r]][col] / p;
            a[perm[r]][col] = 0.0;
            for (int c = col + 1; c < 3; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
            b[perm[r]] -= f * b[perm[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = b[perm[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[perm[row]][c] * x[c];
        x[row] = s / a[perm[row]][row];
    }
}

}  // namespace bdcest
