// SPDX-License-Identifier: Apache-2.0
#include "etaplab/etap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace etaplab {

namespace {

// Shared by the public op and run_etap; negate flips the accumulator rescale
// sign (fault injection only).
EtapAccumulator block_update_impl(const EtapAccumulator& acc, const Matrix& k_j,
                                  const Matrix& v_j, const Matrix& q_i, double scale,
                                  Precision prec, bool negate_rescale,
                                  std::vector<double>* m_old_out,
                                  std::vector<double>* rescale_out) {
    const std::size_t b = k_j.rows();
    const std::size_t r = q_i.rows();
    const std::size_t d_v = v_j.cols();
    const std::size_t d_lower = acc.o_lower.rows();
    if (v_j.rows() != b) throw std::invalid_argument("K_j/V_j row counts disagree");
    if (k_j.cols() != q_i.cols()) throw std::invalid_argument("K_j/Q_i head dims disagree");
    if (acc.o_lower.cols() != r || acc.state.m.size() != r ||
        (acc.o_upper.size() > 0 && acc.o_upper.cols() != r)) {
        throw std::invalid_argument("accumulator width does not match query block");
    }
    if (d_lower + acc.o_upper.rows() != d_v) {
        throw std::invalid_argument("accumulator halves do not cover d_v");
    }

    EtapAccumulator next = acc;

    Matrix s_t = gemm(k_j, q_i, false, true, prec); // b x r
    for (std::size_t e = 0; e < s_t.size(); ++e)
        s_t.data()[e] = accum_round(scale * s_t.data()[e], prec);

    std::vector<double> m_old(r), rescale(r);
    for (std::size_t c = 0; c < r; ++c) {
        m_old[c] = acc.state.m[c];
        double mx = m_old[c];
        for (std::size_t row = 0; row < b; ++row) mx = std::max(mx, s_t.at(row, c));
        next.state.m[c] = mx;
        rescale[c] = accum_round(std::exp(m_old[c] - mx), prec);
    }

    Matrix p(b, r);
    std::vector<double> colsum(r, 0.0);
    for (std::size_t row = 0; row < b; ++row) {
        for (std::size_t c = 0; c < r; ++c) {
            const double e =
                quantize(accum_round(std::exp(s_t.at(row, c) - next.state.m[c]), prec), prec);
            p.at(row, c) = e;
            colsum[c] = accum_round(colsum[c] + e, prec);
        }
    }
    for (std::size_t c = 0; c < r; ++c)
        next.state.l[c] = accum_round(rescale[c] * acc.state.l[c] + colsum[c], prec);

    const double sign = negate_rescale ? -1.0 : 1.0;
    const auto update_half = [&](Matrix& half, std::size_t c0, std::size_t nd) {
        const Matrix v_half = v_j.col_block(c0, nd); // b x nd
        const Matrix vp = gemm(v_half, p, true, false, prec); // nd x r
        for (std::size_t row = 0; row < nd; ++row) {
            for (std::size_t c = 0; c < r; ++c) {
                half.at(row, c) =
                    accum_round(sign * rescale[c] * half.at(row, c) + vp.at(row, c), prec);
            }
        }
    };
    update_half(next.o_lower, 0, d_lower);
    if (d_v > d_lower) update_half(next.o_upper, d_lower, d_v - d_lower);

    if (m_old_out) *m_old_out = std::move(m_old);
    if (rescale_out) *rescale_out = std::move(rescale);
    return next;
}

} // namespace

EtapAccumulator make_etap_accumulator(std::size_t d_v, std::size_t block_rows) {
    if (d_v < 1 || block_rows < 1) {
        throw std::invalid_argument("accumulator dimensions must be >= 1");
    }
    const std::size_t d_lower = (d_v + 1) / 2;
    EtapAccumulator acc;
    acc.o_lower = Matrix(d_lower, block_rows);
    // d_v == 1 degenerates to a single half; the upper stays empty
    acc.o_upper = d_v > d_lower ? Matrix(d_v - d_lower, block_rows) : Matrix();
    acc.state = make_softmax_state(block_rows);
    return acc;
}

EtapAccumulator etap_block_update(const EtapAccumulator& acc, const Matrix& k_j,
                                  const Matrix& v_j, const Matrix& q_i, double scale,
                                  Precision precision) {
    return block_update_impl(acc, k_j, v_j, q_i, scale, precision, false, nullptr, nullptr);
}

AttentionOutput run_etap(const AttentionProblem& problem, const TileConfig& tiles,
                         const BlockHook& hook, const EtapFaults& faults) {
    if (tiles.b_r < 1 || tiles.b_c < 1 || tiles.stages < 1) {
        throw std::invalid_argument("tile config fields must be >= 1");
    }
    const Precision prec = problem.precision;
    const std::size_t t_c = kv_block_count(problem.n_kv, tiles.b_c);
    const std::size_t d_lower = (problem.d_v + 1) / 2;

    AttentionOutput out;
    out.o = Matrix(problem.n_q, problem.d_v);
    out.l.assign(problem.n_q, 0.0);

    for (std::size_t i0 = 0, qb = 0; i0 < problem.n_q; i0 += tiles.b_r, ++qb) {
        const std::size_t r = std::min(tiles.b_r, problem.n_q - i0);
        const Matrix q_i = problem.q.row_block(i0, r);

        EtapAccumulator acc = make_etap_accumulator(problem.d_v, r);
        std::vector<double> m_old, rescale;

        for (std::size_t j = 0; j < t_c; ++j) {
            const std::size_t k0 = j * tiles.b_c;
            const std::size_t b = std::min(tiles.b_c, problem.n_kv - k0);
            acc = block_update_impl(acc, problem.k.row_block(k0, b), problem.v.row_block(k0, b),
                                    q_i, problem.scale, prec, faults.negate_rescale, &m_old,
                                    &rescale);
            if (hook) hook(BlockStepInfo{qb, j, m_old, acc.state, rescale});
        }

        // epilogue: normalize columns, then one transpose for the whole block
        Matrix o_t(problem.d_v, r);
        for (std::size_t row = 0; row < problem.d_v; ++row) {
            const Matrix& half = row < d_lower ? acc.o_lower : acc.o_upper;
            const std::size_t hrow = row < d_lower ? row : row - d_lower;
            for (std::size_t c = 0; c < r; ++c) {
                o_t.at(row, c) = accum_round(half.at(hrow, c) / acc.state.l[c], prec);
            }
        }
        const Matrix o_block = transpose(o_t); // r x d_v, once per query block
        for (std::size_t row = 0; row < r; ++row) {
            for (std::size_t c = 0; c < problem.d_v; ++c)
                out.o.at(i0 + row, c) = o_block.at(row, c);
            out.l[i0 + row] = accum_round(acc.state.m[row] + std::log(acc.state.l[row]), prec);
        }
    }
    return out;
}

} // namespace etaplab
