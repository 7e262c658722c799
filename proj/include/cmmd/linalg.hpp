#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "cmmd/errors.hpp"

namespace cmmd {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Mini-batch gram matrices top out around
/// 300x300, so a plain contiguous buffer is all that is needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> vals)
        : rows_(rows), cols_(cols), data_(vals) {
        if (data_.size() != rows * cols)
            throw DimensionMismatch("Matrix: initializer size does not match shape");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    // ikj order keeps the inner loop contiguous
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// Tr(a*b) without materializing the product.
inline double trace_product(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows() || b.cols() != a.rows())
        throw DimensionMismatch("trace_product: shapes not conformable for a square product");
    double tr = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) tr += ai[k] * b(k, i);
    }
    return tr;
}

/// Lower-triangular Cholesky factor of an SPD matrix.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Matrix& a) : l_(a) {
        const std::size_t n = a.rows();
        if (a.cols() != n) throw DimensionMismatch("cholesky: matrix not square");
        const double scale = a.max_abs();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::fabs(a(i, j) - a(j, i)) > 1e-9 * std::max(1.0, scale))
                    throw NotPositiveDefinite("cholesky: matrix not symmetric");
        for (std::size_t j = 0; j < n; ++j) {
            double d = l_(j, j);
            const double* lj = l_.row_ptr(j);
            for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
            if (!(d > 0.0) || !std::isfinite(d))
                throw NotPositiveDefinite("cholesky: non-positive pivot");
            const double ljj = std::sqrt(d);
            l_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = l_(i, j);
                const double* li = l_.row_ptr(i);
                for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
                l_(i, j) = s / ljj;
            }
            for (std::size_t k = j + 1; k < n; ++k) l_(j, k) = 0.0;
        }
    }

    std::size_t size() const { return l_.rows(); }

    /// Solves A*X = B with the stored factor (forward then back substitution).
    Matrix solve(const Matrix& b) const {
        const std::size_t n = size();
        if (b.rows() != n) throw DimensionMismatch("cholesky solve: rhs row count differs");
        Matrix x = b;
        const std::size_t m = b.cols();
        // L*Y = B
        for (std::size_t i = 0; i < n; ++i) {
            const double* li = l_.row_ptr(i);
            double* xi = x.row_ptr(i);
            for (std::size_t k = 0; k < i; ++k) {
                const double lik = li[k];
                const double* xk = x.row_ptr(k);
                for (std::size_t c = 0; c < m; ++c) xi[c] -= lik * xk[c];
            }
            for (std::size_t c = 0; c < m; ++c) xi[c] /= li[i];
        }
        // L^T*X = Y
        for (std::size_t ii = n; ii-- > 0;) {
            double* xi = x.row_ptr(ii);
            for (std::size_t k = ii + 1; k < n; ++k) {
                const double lki = l_(k, ii);
                const double* xk = x.row_ptr(k);
                for (std::size_t c = 0; c < m; ++c) xi[c] -= lki * xk[c];
            }
            const double lii = l_(ii, ii);
            for (std::size_t c = 0; c < m; ++c) xi[c] /= lii;
        }
        return x;
    }

private:
    Matrix l_;
};

/// Solves a*X = b for symmetric positive definite a via Cholesky.
inline Matrix spd_solve(const Matrix& a, const Matrix& b) {
    return CholeskyFactor(a).solve(b);
}

}  // namespace cmmd
