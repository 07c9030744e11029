// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "etaplab/tiled_standard.hpp"

namespace etaplab {

// KV-major transposed attention state for one query block. The output
// accumulator lives transposed (d_v x b_r) and is split along the head
// dimension into two halves that share one softmax state, mirroring the
// warpgroup0/warpgroup1 accumulator split:
//   o_lower: ceil(d_v/2) x r   (head dims [0, ceil(d_v/2)))
//   o_upper: floor(d_v/2) x r  (head dims [ceil(d_v/2), d_v))
// For odd d_v the lower half carries the extra row. Queries are columns;
// both halves are rescaled by identical per-column factors at every step.
struct EtapAccumulator {
    Matrix o_lower;
    Matrix o_upper;
    SoftmaxState state;
};

EtapAccumulator make_etap_accumulator(std::size_t d_v, std::size_t block_rows);

// One KV block step of the transposed pipeline:
//   S^T = scale * K_j Q_i^T                          (b x r, queries as columns)
//   m_new = max(m_old, per-column max of S^T)
//   P = exp(S^T - m_new per column)
//   l = exp(m_old - m_new) l + per-column sum of P
//   o_half = colscale(o_half, exp(m_old - m_new)) + V_half^T P
// The rescale is applied as column scaling of the d x r accumulator, the
// mathematically consistent form of the diagonal rescale.
EtapAccumulator etap_block_update(const EtapAccumulator& acc, const Matrix& k_j,
                                  const Matrix& v_j, const Matrix& q_i, double scale,
                                  Precision precision);

// Fault injection for the verifier's negative control: flips the sign of the
// accumulator rescale factor, which breaks oracle equivalence on any run with
// more than one KV block.
struct EtapFaults {
    bool negate_rescale = false;
};

// Full transposed pipeline: streams KV blocks through etap_block_update, then
// normalizes by diag(l)^-1, transposes the d_v x r accumulator once per query
// block (counted by the transpose primitive) and emits L = m + log l.
// In exact64 this equals attention_ref and run_standard up to summation order.
AttentionOutput run_etap(const AttentionProblem& problem, const TileConfig& tiles,
                         const BlockHook& hook = {}, const EtapFaults& faults = {});

} // namespace etaplab
