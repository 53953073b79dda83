/*
 * Copyright 2026 The treedetect Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.

*/
#pragma once

#include <treedetect/errors.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace treedetect {

using Complex       = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Dense row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionMismatch("matrix data length " + std::to_string(data_.size()) + " != " +
                                    std::to_string(rows_) + "x" + std::to_string(cols_));
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Complex&       operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const Complex> data() const noexcept { return data_; }
    std::span<Complex>       data() noexcept { return data_; }

    double frobenius_norm() const noexcept {
        double s = 0.0;
        for (const auto& v : data_) {
            s += std::norm(v);
        }
        return std::sqrt(s);
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t          rows_ = 0;
    std::size_t          cols_ = 0;
    std::vector<Complex> data_;
};

/// Exact operation counts for one detection.
struct OpCounters {
    std::uint64_t complex_mul_div  = 0;
    std::uint64_t real_comparisons = 0;
    std::uint64_t detection_nodes  = 0;

    OpCounters& operator+=(const OpCounters& o) noexcept {
        complex_mul_div += o.complex_mul_div;
        real_comparisons += o.real_comparisons;
        detection_nodes += o.detection_nodes;
        return *this;
    }
    friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

/// Cost charged for |z|^2. It is one multiply of z by its conjugate.
inline constexpr std::uint64_t kSquaredMagnitudeCost = 1;

// Written out by hand: std::complex operator* routes through the C99 Annex G
// NaN-recovery path, which is slow and irrelevant for finite detector inputs.
inline Complex counted_mul(OpCounters& ctx, Complex a, Complex b) noexcept {
    ++ctx.complex_mul_div;
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// conj(a) * b, one multiply.
inline Complex counted_conj_mul(OpCounters& ctx, Complex a, Complex b) noexcept {
    ++ctx.complex_mul_div;
    return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

inline Complex counted_div(OpCounters& ctx, Complex a, Complex b) noexcept {
    ++ctx.complex_mul_div;
    const double d = b.real() * b.real() + b.imag() * b.imag();
    return {(a.real() * b.real() + a.imag() * b.imag()) / d, (a.imag() * b.real() - a.real() * b.imag()) / d};
}

inline double counted_norm(OpCounters& ctx, Complex a) noexcept {
    ctx.complex_mul_div += kSquaredMagnitudeCost;
    return a.real() * a.real() + a.imag() * a.imag();
}

/// Unmetered y = A x.
inline ComplexVector multiply(const ComplexMatrix& a, std::span<const Complex> x) {
    if (x.size() != a.cols()) {
        throw DimensionMismatch("multiply: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                                std::to_string(x.size()) + " entries");
    }
    ComplexVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * x[j];
        }
        y[i] = s;
    }
    return y;
}

/// Unmetered conjugate transpose.
inline ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix h(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            h(j, i) = std::conj(a(i, j));
        }
    }
    return h;
}

/// Unmetered matrix product.
inline ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("multiply: inner dimensions differ");
    }
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

struct QrFactors {
    ComplexMatrix q; ///< r x t, orthonormal columns
    ComplexMatrix r; ///< t x t, upper triangular, real positive diagonal
};

/**
 * Thin QR decomposition by Householder reflections.
 *
 * Each reflection maps the leading entry of the working column to
 * -e^{i arg(x0)} ||x||, which avoids cancellation. A final diagonal phase
 * correction makes every R(i,i) real and positive so the factorization is
 * unique. Entries below the diagonal of R are written as exact zeros.
 *
 * Not metered: the factorization is shared by all detectors.
 */
inline QrFactors qr_decompose(const ComplexMatrix& h) {
    const std::size_t m = h.rows();
    const std::size_t n = h.cols();
    if (n == 0 || m < n) {
        throw DimensionMismatch("qr_decompose: need rows >= cols >= 1, got " + std::to_string(m) + "x" +
                                std::to_string(n));
    }
    const double scale = h.frobenius_norm();

    ComplexMatrix a = h;
    ComplexMatrix q = ComplexMatrix::identity(m);
    std::vector<Complex> v(m);

    for (std::size_t k = 0; k < n; ++k) {
        double col_norm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            col_norm2 += std::norm(a(i, k));
        }
        const double col_norm = std::sqrt(col_norm2);
        if (col_norm == 0.0) {
            continue; // caught by the rank check below
        }
        const Complex x0    = a(k, k);
        const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
        const Complex alpha = -phase * col_norm;

        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = a(i, k);
        }
        v[k] -= alpha;
        for (std::size_t i = k; i < m; ++i) {
            vnorm2 += std::norm(v[i]);
        }
        if (vnorm2 == 0.0) {
            continue;
        }

        // A <- (I - 2 v v^H / |v|^2) A on the trailing block.
        for (std::size_t j = k; j < n; ++j) {
            Complex dot = 0.0;
            for (std::size_t i = k; i < m; ++i) {
                dot += std::conj(v[i]) * a(i, j);
            }
            const Complex f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < m; ++i) {
                a(i, j) -= f * v[i];
            }
        }
        // Q <- Q (I - 2 v v^H / |v|^2)
        for (std::size_t i = 0; i < m; ++i) {
            Complex dot = 0.0;
            for (std::size_t l = k; l < m; ++l) {
                dot += q(i, l) * v[l];
            }
            const Complex f = 2.0 * dot / vnorm2;
            for (std::size_t l = k; l < m; ++l) {
                q(i, l) -= f * std::conj(v[l]);
            }
        }
    }

    QrFactors out{ComplexMatrix(m, n), ComplexMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::abs(a(i, i));
        if (!(mag >= 1e-12 * scale) || mag == 0.0 || !std::isfinite(mag)) {
            throw RankDeficient("qr_decompose: |R(" + std::to_string(i) + "," + std::to_string(i) +
                                ")| below tolerance");
        }
        const Complex d = a(i, i) / mag; // R <- D^* R, Q <- Q D
        out.r(i, i)     = mag;
        for (std::size_t j = i + 1; j < n; ++j) {
            out.r(i, j) = std::conj(d) * a(i, j);
        }
        for (std::size_t row = 0; row < m; ++row) {
            out.q(row, i) = q(row, i) * d;
        }
    }
    return out;
}

/**
 * xi = Q^H y, keeping only the first t = cols(Q) components. The remaining
 * components of a full unitary extension do not depend on the transmitted
 * vector. Costs rows(Q) * cols(Q) metered multiplies.
 */
inline ComplexVector rotate_received(const ComplexMatrix& q, std::span<const Complex> y, OpCounters& ctx) {
    if (y.size() != q.rows()) {
        throw DimensionMismatch("rotate_received: Q has " + std::to_string(q.rows()) + " rows, y has " +
                                std::to_string(y.size()) + " entries");
    }
    ComplexVector xi(q.cols());
    for (std::size_t j = 0; j < q.cols(); ++j) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < q.rows(); ++i) {
            s += counted_conj_mul(ctx, q(i, j), y[i]);
        }
        xi[j] = s;
    }
    return xi;
}

} // namespace treedetect
