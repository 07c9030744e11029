// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "etaplab/attention.hpp"

namespace etaplab {

struct TileConfig {
    std::size_t b_r = 64;    // query block size
    std::size_t b_c = 64;    // KV block size
    std::size_t stages = 2;  // circular buffer depth (scheduling only, no numerics)
};

// ceil(n_kv / b_c)
std::size_t kv_block_count(std::size_t n_kv, std::size_t b_c);

// Per-query online softmax statistics: running max m (starts at -inf, monotone
// nondecreasing across block steps) and running sum l (starts at 0, strictly
// positive after the first processed block).
struct SoftmaxState {
    std::vector<double> m;
    std::vector<double> l;
};

SoftmaxState make_softmax_state(std::size_t n);

// Snapshot handed to the observer after each KV block step. References are
// only valid during the call.
struct BlockStepInfo {
    std::size_t query_block;
    std::size_t kv_block;
    const std::vector<double>& m_old;
    const SoftmaxState& state;          // after the update
    const std::vector<double>& rescale; // exp(m_old - m_new) per query
};

using BlockHook = std::function<void(const BlockStepInfo&)>;

// Query-major blocked online-softmax attention (the FlashAttention-2/3
// computation order). Per query block, KV blocks are streamed in order:
//   S = scale * Q_i K_j^T,  m_new = max(m, rowmax S),  P = exp(S - m_new),
//   acc = diag(exp(m_old - m_new)) acc + P V_j,  l = exp(m_old - m_new) l + rowsum P
// with the epilogue dividing by l and emitting L = m + log l. The final
// partial KV block runs at its natural size; nothing is padded.
AttentionOutput run_standard(const AttentionProblem& problem, const TileConfig& tiles,
                             const BlockHook& hook = {});

} // namespace etaplab
