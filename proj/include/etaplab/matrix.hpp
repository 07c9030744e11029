// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace etaplab {

// Precision emulation mode. The scalar carrier is always binary64; narrower
// modes round at defined points:
//
//   mode     | GEMM operand rounding | accumulation rounding
//   exact64  | none                  | none
//   fp32     | binary32              | binary32
//   fp16emu  | binary16              | binary32
//
// fp16emu mirrors tensor-core FP16-multiply / FP32-accumulate: operands are
// rounded to binary16 before each product and every partial sum is rounded
// to binary32.
enum class Precision { exact64, fp32, fp16emu };

enum class Dist { normal, uniform }; // normal(0,1) or uniform(-1,1)

const char* to_string(Precision p);
bool parse_precision(const std::string& s, Precision& out);

// Dense row-major matrix of binary64 scalars. Dimensions are fixed at
// construction and always >= 1.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols); // zero-filled
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    // Contiguous sub-block of whole rows [r0, r0+n).
    Matrix row_block(std::size_t r0, std::size_t n) const;
    // Sub-block of whole columns [c0, c0+n).
    Matrix col_block(std::size_t c0, std::size_t n) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Deterministic seeded generation. The stream is splitmix64 (Steele/Vigna);
// uniform(-1,1) maps each draw u64 to 2*((u64 >> 11) * 2^-53) - 1, and
// normal(0,1) is Box-Muller, z = sqrt(-2 ln u1) * cos(2 pi u2) with
// u1 = ((u64 >> 11) + 1) * 2^-53 in (0,1], one element per pair of draws.
// The algorithm is fixed; goldens depend on it and must never change.
Matrix matrix_from_seed(std::size_t rows, std::size_t cols, std::uint64_t seed, Dist dist);

// IEEE-754 binary16 round-to-nearest-even of x, widened back to binary64.
// NaN stays NaN, overflow saturates to +/-inf, subnormals are exact.
double round_half(double x);

// Storage rounding for the given mode (see the Precision table above).
double quantize(double x, Precision p);
Matrix quantize(const Matrix& m, Precision p);

// Accumulation rounding: identity in exact64, binary32 otherwise.
double accum_round(double x, Precision p);

// C = op(A) * op(B) with op = transpose when the flag is set. exact64
// accumulates in binary64; fp32/fp16emu round operands per the mode and
// accumulate in binary32 with one binary32 value per output element.
Matrix gemm(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b,
            Precision p = Precision::exact64);

// sqrt(mean((a - b)^2)) over all entries; shapes must match.
double rmse(const Matrix& a, const Matrix& b);

// Materialized transpose. Calls are counted so tests can assert how many
// transposes a pipeline performs; the counter is process-global and atomic.
Matrix transpose(const Matrix& m);
std::uint64_t transpose_count();
void reset_transpose_count();

} // namespace etaplab
