// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "etaplab/matrix.hpp"

namespace etaplab {

// One fused (batch * head-folded) decode attention instance. Q/K/V are stored
// already rounded to the problem's precision; pipelines and the oracle all
// read the same stored operands, so precision comparisons measure computation
// error, not input rounding.
struct AttentionProblem {
    std::size_t n_q = 0;   // query length, tokens*heads folded
    std::size_t n_kv = 0;  // KV context length
    std::size_t d_qk = 0;  // query/key head dimension
    std::size_t d_v = 0;   // value head dimension
    double scale = 1.0;    // softmax logit multiplier
    Precision precision = Precision::exact64;
    Matrix q; // n_q x d_qk
    Matrix k; // n_kv x d_qk
    Matrix v; // n_kv x d_v
};

struct AttentionOutput {
    Matrix o;              // n_q x d_v
    std::vector<double> l; // per-query logsumexp, length n_q
};

// Validating constructor: checks shape consistency and scale >= 0, rounds
// Q/K/V to the requested precision. scale = 0 is allowed (uniform attention);
// negative or non-finite scale is rejected.
AttentionProblem make_problem(Matrix q, Matrix k, Matrix v, double scale,
                              Precision precision = Precision::exact64);

// Seeded instance with Q/K/V drawn from dist; scale < 0 means 1/sqrt(d_qk).
AttentionProblem make_problem(std::uint64_t seed, std::size_t n_q, std::size_t n_kv,
                              std::size_t d_qk, std::size_t d_v, double scale = -1.0,
                              Precision precision = Precision::exact64,
                              Dist dist = Dist::normal);

// Full-precision naive reference: O = softmax(scale * Q K^T) V computed
// row-wise in binary64 with max subtraction, L[i] = max_j s_ij +
// log sum_j exp(s_ij - max). Ignores problem.precision by design; it is the
// ground truth the emulated pipelines are measured against.
AttentionOutput attention_ref(const AttentionProblem& problem);

} // namespace etaplab
