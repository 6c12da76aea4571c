#pragma once

// Dense symmetric-matrix helpers for the small (d <= ~6) information
// matrices this library works with.  Jacobi eigendecomposition gives the
// inverse, the PSD check and the condition number in one pass; no external
// linear algebra dependency.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "proflik/errors.hpp"

namespace proflik {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors
};

// Cyclic Jacobi rotations; fine for the tiny matrices used here.
inline SymmetricEigen symmetric_eigen(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("symmetric_eigen: matrix must be square");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                off += a(i, j) * a(i, j);
        if (off < 1e-300) break;
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                norm += a(i, j) * a(i, j);
        if (off <= 1e-30 * norm) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen e;
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.values[i] = a(i, i);
    // Sort ascending, permuting eigenvector columns alongside.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (e.values[order[j]] < e.values[order[i]]) std::swap(order[i], order[j]);
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = e.values[order[c]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

// Condition number (ratio of extreme absolute eigenvalues) of a symmetric
// matrix; +inf when the smallest eigenvalue is zero.
inline double symmetric_condition(const SymmetricEigen& e) {
    double lo = std::fabs(e.values.front());
    double hi = std::fabs(e.values.front());
    for (double v : e.values) {
        lo = std::min(lo, std::fabs(v));
        hi = std::max(hi, std::fabs(v));
    }
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

// Inverse of a symmetric positive-definite matrix via its eigensystem.
// Throws singular_information_error when not PD or condition > cond_limit.
inline Matrix spd_inverse(const Matrix& m, double* condition_out = nullptr,
                          double cond_limit = 1e10) {
    SymmetricEigen e = symmetric_eigen(m);
    double cond = symmetric_condition(e);
    if (condition_out) *condition_out = cond;
    const std::size_t n = m.rows();
    for (double v : e.values)
        if (!(v > 0.0))
            throw singular_information_error(
                "matrix is not positive definite (eigenvalue <= 0)");
    if (!(cond < cond_limit))
        throw singular_information_error(
            "matrix is numerically singular (condition number above limit)");
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += e.vectors(i, k) * e.vectors(j, k) / e.values[k];
            inv(i, j) = s;
        }
    return inv;
}

// x^T A y for symmetric A.
inline double quadratic_form(const Matrix& a, const std::vector<double>& x,
                             const std::vector<double>& y) {
    if (a.rows() != x.size() || a.cols() != y.size())
        throw std::invalid_argument("quadratic_form: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            s += x[i] * a(i, j) * y[j];
    return s;
}

} // namespace proflik
