// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "etaplab/matrix.hpp"

namespace etaplab {

// Warpgroup MMA tile granularity. M tiles have a hard minimum extent (64 on
// Hopper); N and K extents round up to their step. n_step/k_step defaults are
// model assumptions, configurable because the instruction shape tables vary.
struct WgmmaSpec {
    std::size_t m_min = 64;
    std::size_t n_step = 8;
    std::size_t k_step = 16;
    double peak_tflops = 148.0; // H20 FP16/BF16 peak, for throughput translation
};

// Decode-step workload: q = heads * q_tokens queries folded together against
// a kv_len context, per batch element.
struct DecodeShape {
    std::size_t heads = 16;
    std::size_t q_tokens = 1;
    std::size_t kv_len = 4096;
    std::size_t d_qk = 576;
    std::size_t d_v = 512;
    std::size_t batch = 1;
};

// Which way the two attention GEMMs map onto WGMMA tiles:
//   original: M = folded queries for both GEMMs (query-major)
//   etap:     M = kv_len for QK^T and M = d_v for the PV product (KV-major)
enum class ComputeMode { original, etap };

const char* to_string(ComputeMode m);

enum class GemmAxis { M, N, K };

struct GemmPadding {
    std::uint64_t useful_macs = 0;
    std::uint64_t issued_macs = 0;
    std::size_t m_logical = 0;
    std::size_t m_padded = 0;

    double utilization() const {
        return static_cast<double>(useful_macs) / static_cast<double>(issued_macs);
    }
    double m_axis_utilization() const {
        return static_cast<double>(m_logical) / static_cast<double>(m_padded);
    }
};

struct UtilizationReport {
    std::uint64_t useful_macs = 0;
    std::uint64_t issued_macs = 0;
    double utilization = 0.0; // useful / issued, in (0, 1]
    GemmPadding qk;           // the S = QK^T (or S^T = KQ^T) product
    GemmPadding pv;           // the PV (or V^T P^T) product
};

// Least tile-aligned extent >= logical: M rounds up to a multiple of m_min
// (so at least m_min), N and K round up to n_step / k_step multiples.
std::size_t padded_extent(std::size_t logical, GemmAxis axis, const WgmmaSpec& spec);

// MAC counting only; memory traffic, softmax ALU work and barrier latency are
// out of model. KV tiles on the ETAP M axis are assumed b_c-sized with b_c a
// multiple of m_min, so only the final partial tile pads.
UtilizationReport utilization(ComputeMode mode, const DecodeShape& shape,
                              const WgmmaSpec& spec = {});

// issued(original) / (issued(etap) + one-time transpose cost of d_v * q MACs
// per batch element). Monotone nondecreasing in kv_len; for the 16-head
// decode config it approaches 4.0 as kv_len grows. This is an issued-work
// bound, not a wall-clock prediction.
double predicted_speedup(const DecodeShape& shape, const WgmmaSpec& spec = {});

} // namespace etaplab
