// SPDX-License-Identifier: Apache-2.0
#include "etaplab/tiled_standard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace etaplab {

namespace {

void check_tiles(const TileConfig& t) {
    if (t.b_r < 1 || t.b_c < 1 || t.stages < 1) {
        throw std::invalid_argument("tile config fields must be >= 1");
    }
}

} // namespace

std::size_t kv_block_count(std::size_t n_kv, std::size_t b_c) {
    return (n_kv + b_c - 1) / b_c;
}

SoftmaxState make_softmax_state(std::size_t n) {
    SoftmaxState s;
    s.m.assign(n, -std::numeric_limits<double>::infinity());
    s.l.assign(n, 0.0);
    return s;
}

AttentionOutput run_standard(const AttentionProblem& problem, const TileConfig& tiles,
                             const BlockHook& hook) {
    check_tiles(tiles);
    const Precision prec = problem.precision;
    const std::size_t t_c = kv_block_count(problem.n_kv, tiles.b_c);

    AttentionOutput out;
    out.o = Matrix(problem.n_q, problem.d_v);
    out.l.assign(problem.n_q, 0.0);

    for (std::size_t i0 = 0, qb = 0; i0 < problem.n_q; i0 += tiles.b_r, ++qb) {
        const std::size_t r = std::min(tiles.b_r, problem.n_q - i0);
        const Matrix q_i = problem.q.row_block(i0, r);

        SoftmaxState state = make_softmax_state(r);
        Matrix acc(r, problem.d_v);
        std::vector<double> m_old(r), rescale(r);

        for (std::size_t j = 0; j < t_c; ++j) {
            const std::size_t k0 = j * tiles.b_c;
            const std::size_t b = std::min(tiles.b_c, problem.n_kv - k0);
            const Matrix k_j = problem.k.row_block(k0, b);
            const Matrix v_j = problem.v.row_block(k0, b);

            Matrix s = gemm(q_i, k_j, false, true, prec); // r x b
            for (std::size_t e = 0; e < s.size(); ++e)
                s.data()[e] = accum_round(problem.scale * s.data()[e], prec);

            // statistics update precedes the accumulator rescale
            for (std::size_t row = 0; row < r; ++row) {
                m_old[row] = state.m[row];
                double mx = state.m[row];
                for (std::size_t c = 0; c < b; ++c) mx = std::max(mx, s.at(row, c));
                state.m[row] = mx;
                // exp(-inf) is exactly 0 on the first touched block
                rescale[row] = accum_round(std::exp(m_old[row] - mx), prec);
            }

            Matrix p(r, b);
            for (std::size_t row = 0; row < r; ++row) {
                double rowsum = 0.0;
                for (std::size_t c = 0; c < b; ++c) {
                    const double e =
                        quantize(accum_round(std::exp(s.at(row, c) - state.m[row]), prec), prec);
                    p.at(row, c) = e;
                    rowsum = accum_round(rowsum + e, prec);
                }
                state.l[row] = accum_round(rescale[row] * state.l[row] + rowsum, prec);
            }

            const Matrix pv = gemm(p, v_j, false, false, prec); // r x d_v
            for (std::size_t row = 0; row < r; ++row) {
                for (std::size_t c = 0; c < problem.d_v; ++c) {
                    acc.at(row, c) =
                        accum_round(rescale[row] * acc.at(row, c) + pv.at(row, c), prec);
                }
            }

            if (hook) hook(BlockStepInfo{qb, j, m_old, state, rescale});
        }

        for (std::size_t row = 0; row < r; ++row) {
            for (std::size_t c = 0; c < problem.d_v; ++c) {
                out.o.at(i0 + row, c) = accum_round(acc.at(row, c) / state.l[row], prec);
            }
            out.l[i0 + row] = accum_round(state.m[row] + std::log(state.l[row]), prec);
        }
    }
    return out;
}

} // namespace etaplab
