// SPDX-License-Identifier: Apache-2.0
#include "etaplab/wgmma_model.hpp"

#include <stdexcept>

namespace etaplab {

namespace {

std::size_t round_up(std::size_t v, std::size_t step) {
    return (v + step - 1) / step * step;
}

void check_shape(const DecodeShape& s) {
    if (s.heads < 1 || s.q_tokens < 1 || s.kv_len < 1 || s.d_qk < 1 || s.d_v < 1 ||
        s.batch < 1) {
        throw std::invalid_argument("decode shape fields must be >= 1");
    }
}

void check_spec(const WgmmaSpec& s) {
    if (s.m_min < 1 || s.n_step < 1 || s.k_step < 1) {
        throw std::invalid_argument("wgmma steps must be >= 1");
    }
}

GemmPadding count_gemm(std::size_t m, std::size_t n, std::size_t k, std::uint64_t batch,
                       const WgmmaSpec& spec) {
    GemmPadding g;
    g.m_logical = m;
    g.m_padded = padded_extent(m, GemmAxis::M, spec);
    const std::uint64_t pn = padded_extent(n, GemmAxis::N, spec);
    const std::uint64_t pk = padded_extent(k, GemmAxis::K, spec);
    g.useful_macs = batch * static_cast<std::uint64_t>(m) * n * k;
    g.issued_macs = batch * static_cast<std::uint64_t>(g.m_padded) * pn * pk;
    return g;
}

} // namespace

const char* to_string(ComputeMode m) {
    return m == ComputeMode::original ? "original" : "etap";
}

std::size_t padded_extent(std::size_t logical, GemmAxis axis, const WgmmaSpec& spec) {
    if (logical < 1) throw std::invalid_argument("extent must be >= 1");
    check_spec(spec);
    switch (axis) {
        case GemmAxis::M: return round_up(logical, spec.m_min);
        case GemmAxis::N: return round_up(logical, spec.n_step);
        case GemmAxis::K: return round_up(logical, spec.k_step);
    }
    return logical;
}

UtilizationReport utilization(ComputeMode mode, const DecodeShape& shape,
                              const WgmmaSpec& spec) {
    check_shape(shape);
    check_spec(spec);
    const std::size_t q = shape.heads * shape.q_tokens;
    const std::uint64_t batch = shape.batch;

    UtilizationReport rep;
    if (mode == ComputeMode::original) {
        rep.qk = count_gemm(q, shape.kv_len, shape.d_qk, batch, spec); // M=q, N=kv, K=d_qk
        rep.pv = count_gemm(q, shape.d_v, shape.kv_len, batch, spec);  // M=q, N=d_v, K=kv
    } else {
        rep.qk = count_gemm(shape.kv_len, q, shape.d_qk, batch, spec); // M=kv, N=q, K=d_qk
        rep.pv = count_gemm(shape.d_v, q, shape.kv_len, batch, spec);  // M=d_v, N=q, K=kv
    }
    rep.useful_macs = rep.qk.useful_macs + rep.pv.useful_macs;
    rep.issued_macs = rep.qk.issued_macs + rep.pv.issued_macs;
    rep.utilization =
        static_cast<double>(rep.useful_macs) / static_cast<double>(rep.issued_macs);
    return rep;
}

double predicted_speedup(const DecodeShape& shape, const WgmmaSpec& spec) {
    const UtilizationReport orig = utilization(ComputeMode::original, shape, spec);
    const UtilizationReport etap = utilization(ComputeMode::etap, shape, spec);
    const std::uint64_t q = shape.heads * shape.q_tokens;
    const double transpose_macs =
        static_cast<double>(shape.batch) * static_cast<double>(shape.d_v) * q;
    return static_cast<double>(orig.issued_macs) /
           (static_cast<double>(etap.issued_macs) + transpose_macs);
}

} // namespace etaplab
