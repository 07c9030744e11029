// SPDX-License-Identifier: Apache-2.0
#include "etaplab/attention.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace etaplab {

AttentionProblem make_problem(Matrix q, Matrix k, Matrix v, double scale, Precision precision) {
    if (k.cols() != q.cols()) {
        throw std::invalid_argument("K head dimension does not match Q");
    }
    if (v.rows() != k.rows()) {
        throw std::invalid_argument("V context length does not match K");
    }
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("scale must be finite and >= 0");
    }
    AttentionProblem p;
    p.n_q = q.rows();
    p.n_kv = k.rows();
    p.d_qk = q.cols();
    p.d_v = v.cols();
    p.scale = scale;
    p.precision = precision;
    p.q = quantize(q, precision);
    p.k = quantize(k, precision);
    p.v = quantize(v, precision);
    return p;
}

AttentionProblem make_problem(std::uint64_t seed, std::size_t n_q, std::size_t n_kv,
                              std::size_t d_qk, std::size_t d_v, double scale,
                              Precision precision, Dist dist) {
    if (scale < 0.0) scale = 1.0 / std::sqrt(static_cast<double>(d_qk));
    // distinct sub-seeds per operand so Q/K/V are independent streams
    Matrix q = matrix_from_seed(n_q, d_qk, seed * 3 + 1, dist);
    Matrix k = matrix_from_seed(n_kv, d_qk, seed * 3 + 2, dist);
    Matrix v = matrix_from_seed(n_kv, d_v, seed * 3 + 3, dist);
    return make_problem(std::move(q), std::move(k), std::move(v), scale, precision);
}

AttentionOutput attention_ref(const AttentionProblem& problem) {
    const std::size_t n_q = problem.n_q;
    const std::size_t n_kv = problem.n_kv;
    const std::size_t d_qk = problem.d_qk;
    const std::size_t d_v = problem.d_v;

    AttentionOutput out;
    out.o = Matrix(n_q, d_v);
    out.l.assign(n_q, 0.0);

    std::vector<double> s(n_kv);
    for (std::size_t i = 0; i < n_q; ++i) {
        const double* qi = problem.q.data() + i * d_qk;
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_kv; ++j) {
            const double* kj = problem.k.data() + j * d_qk;
            double dot = 0.0;
            for (std::size_t c = 0; c < d_qk; ++c) dot += qi[c] * kj[c];
            s[j] = problem.scale * dot;
            if (s[j] > m) m = s[j];
        }
        double l = 0.0;
        double* oi = out.o.data() + i * d_v;
        for (std::size_t j = 0; j < n_kv; ++j) {
            const double p = std::exp(s[j] - m);
            l += p;
            const double* vj = problem.v.data() + j * d_v;
            for (std::size_t c = 0; c < d_v; ++c) oi[c] += p * vj[c];
        }
        for (std::size_t c = 0; c < d_v; ++c) oi[c] /= l;
        out.l[i] = m + std::log(l);
    }
    return out;
}

} // namespace etaplab
