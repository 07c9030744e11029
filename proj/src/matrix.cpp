// SPDX-License-Identifier: Apache-2.0
#include "etaplab/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace etaplab {

namespace {

std::atomic<std::uint64_t> g_transpose_count{0};

void check_dims(std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("matrix dimensions must be >= 1, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
    }
}

struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // (0,1], cannot be 0 so log() below is safe
    double uniform01_open_at_zero() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = uniform01_open_at_zero();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }
};

// Round m >= 0 to the nearest integer, ties to even. Exact for m < 2^52.
double round_to_integer_even(double m) {
    const double f = std::floor(m);
    const double frac = m - f;
    if (frac > 0.5) return f + 1.0;
    if (frac < 0.5) return f;
    return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

template <typename T>
void gemm_kernel(const T* a, std::size_t lda, bool trans_a,
                 const T* b, std::size_t ldb, bool trans_b,
                 T* c, std::size_t m, std::size_t n, std::size_t k) {
    if (!trans_a && !trans_b) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t kk = 0; kk < k; ++kk) {
                const T aik = a[i * lda + kk];
                const T* brow = b + kk * ldb;
                T* crow = c + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
            }
        }
    } else if (!trans_a && trans_b) {
        // row-by-row dot products, both operands contiguous
        for (std::size_t i = 0; i < m; ++i) {
            const T* arow = a + i * lda;
            for (std::size_t j = 0; j < n; ++j) {
                const T* brow = b + j * ldb;
                T acc = 0;
                for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
                c[i * n + j] = acc;
            }
        }
    } else if (trans_a && !trans_b) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const T* arow = a + kk * lda;
            const T* brow = b + kk * ldb;
            for (std::size_t i = 0; i < m; ++i) {
                const T aki = arow[i];
                T* crow = c + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                T acc = 0;
                for (std::size_t kk = 0; kk < k; ++kk)
                    acc += a[kk * lda + i] * b[j * ldb + kk];
                c[i * n + j] = acc;
            }
        }
    }
}

} // namespace

const char* to_string(Precision p) {
    switch (p) {
        case Precision::exact64: return "exact64";
        case Precision::fp32: return "fp32";
        case Precision::fp16emu: return "fp16emu";
    }
    return "unknown";
}

bool parse_precision(const std::string& s, Precision& out) {
    if (s == "exact64") { out = Precision::exact64; return true; }
    if (s == "fp32") { out = Precision::fp32; return true; }
    if (s == "fp16emu") { out = Precision::fp16emu; return true; }
    return false;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    check_dims(rows, cols);
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("matrix data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
}

Matrix Matrix::row_block(std::size_t r0, std::size_t n) const {
    if (r0 + n > rows_) throw std::invalid_argument("row_block out of range");
    Matrix out(n, cols_);
    std::copy(data_.begin() + r0 * cols_, data_.begin() + (r0 + n) * cols_, out.data());
    return out;
}

Matrix Matrix::col_block(std::size_t c0, std::size_t n) const {
    if (c0 + n > cols_) throw std::invalid_argument("col_block out of range");
    Matrix out(rows_, n);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < n; ++c) out.at(r, c) = at(r, c0 + c);
    return out;
}

Matrix matrix_from_seed(std::size_t rows, std::size_t cols, std::uint64_t seed, Dist dist) {
    check_dims(rows, cols);
    Matrix out(rows, cols);
    SplitMix64 rng{seed};
    double* p = out.data();
    const std::size_t n = rows * cols;
    if (dist == Dist::uniform) {
        for (std::size_t i = 0; i < n; ++i) p[i] = 2.0 * rng.uniform01() - 1.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) p[i] = rng.normal();
    }
    return out;
}

double round_half(double x) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    const double ax = std::fabs(x);
    // 65520 is the midpoint between the max finite half (65504) and 2^16;
    // ties-to-even resolves toward the larger (even) significand, so >= 65520
    // overflows to infinity.
    if (ax >= 65520.0) return std::copysign(std::numeric_limits<double>::infinity(), x);
    if (ax == 0.0) return x;

    int e = 0;
    std::frexp(ax, &e);
    const int exp2 = e - 1; // floor(log2 ax)
    // binary16 quantum: 2^-24 below the normal range, 2^(exp2-10) within it
    const int q = exp2 < -14 ? -24 : exp2 - 10;
    const double scaled = std::ldexp(ax, -q);        // exact power-of-two scaling
    const double rounded = round_to_integer_even(scaled);
    return std::copysign(std::ldexp(rounded, q), x);
}

double quantize(double x, Precision p) {
    switch (p) {
        case Precision::exact64: return x;
        case Precision::fp32: return static_cast<double>(static_cast<float>(x));
        case Precision::fp16emu: return round_half(x);
    }
    return x;
}

Matrix quantize(const Matrix& m, Precision p) {
    if (p == Precision::exact64) return m;
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = quantize(m.data()[i], p);
    return out;
}

double accum_round(double x, Precision p) {
    return p == Precision::exact64 ? x : static_cast<double>(static_cast<float>(x));
}

Matrix gemm(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b, Precision p) {
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t ka = trans_a ? a.rows() : a.cols();
    const std::size_t kb = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (ka != kb) {
        throw std::invalid_argument("gemm inner dimensions disagree: " + std::to_string(ka) +
                                    " vs " + std::to_string(kb));
    }

    Matrix out(m, n);
    if (p == Precision::exact64) {
        gemm_kernel<double>(a.data(), a.cols(), trans_a, b.data(), b.cols(), trans_b,
                            out.data(), m, n, ka);
        return out;
    }

    // Emulated path: quantized binary32 copies of the operands, binary32 sums.
    std::vector<float> af(a.size()), bf(b.size()), cf(m * n, 0.0f);
    for (std::size_t i = 0; i < a.size(); ++i)
        af[i] = static_cast<float>(quantize(a.data()[i], p));
    for (std::size_t i = 0; i < b.size(); ++i)
        bf[i] = static_cast<float>(quantize(b.data()[i], p));
    gemm_kernel<float>(af.data(), a.cols(), trans_a, bf.data(), b.cols(), trans_b,
                       cf.data(), m, n, ka);
    for (std::size_t i = 0; i < cf.size(); ++i) out.data()[i] = static_cast<double>(cf[i]);
    return out;
}

double rmse(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("rmse shape mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

Matrix transpose(const Matrix& m) {
    g_transpose_count.fetch_add(1, std::memory_order_relaxed);
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out.at(c, r) = m.at(r, c);
    return out;
}

std::uint64_t transpose_count() {
    return g_transpose_count.load(std::memory_order_relaxed);
}

void reset_transpose_count() {
    g_transpose_count.store(0, std::memory_order_relaxed);
}

} // namespace etaplab
