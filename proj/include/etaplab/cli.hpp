// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "etaplab/matrix.hpp"
#include "etaplab/pipeline_sim.hpp"

namespace etaplab::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

// Shapes above this KV length (or whose dense score matrix exceeds the byte
// budget) need --allow-large; the naive oracle is then skipped and the
// standard pipeline in exact64 becomes the reference.
inline constexpr std::size_t kNaiveKvCap = 16384;
inline constexpr std::size_t kNaiveScoreByteBudget = 128ull << 20;

struct VerifyOptions {
    std::uint64_t seed = 1; // grid uses {seed, seed+1, seed+2}
    std::vector<std::size_t> n_kv_list = {64, 257, 1024};
    std::vector<std::size_t> b_c_list = {16, 64, 100};
    std::size_t n_q = 16;
    std::size_t d_qk = 576;
    std::size_t d_v = 512;
    std::size_t b_r = 64;
    double scale = -1.0; // auto = 1/sqrt(d_qk)
    Precision precision = Precision::exact64;
    double tolerance = 1e-10;
    bool corrupt_rescale = false; // fault-injection negative control
};

struct BenchOptions {
    std::vector<std::string> modes = {"naive", "standard", "etap"};
    std::vector<std::size_t> seq_lens = {512, 1024, 2048, 4096, 8192, 16384};
    std::size_t batch = 1;
    std::size_t heads = 16;
    std::size_t q_tokens = 1;
    std::size_t d_qk = 576;
    std::size_t d_v = 512;
    std::size_t b_r = 64;
    std::size_t b_c = 64;
    std::size_t stages = 2;
    Precision precision = Precision::exact64;
    double scale = -1.0;
    std::uint64_t seed = 42;
    std::size_t repeats = 5;
    bool allow_large = false;
};

struct ModelOptions {
    std::vector<std::size_t> kv_lens = {512, 1024, 2048, 4096, 8192, 16384, 32768, 65536};
    std::size_t heads = 16;
    std::size_t q_tokens = 1;
    std::size_t batch = 1;
    std::size_t d_qk = 576;
    std::size_t d_v = 512;
    std::size_t m_min = 64;
    std::size_t n_step = 8;
    std::size_t k_step = 16;
    double peak_tflops = 148.0;
};

struct SimulateOptions {
    ScheduleConfig schedule;
};

// Runs the oracle/standard/ETAP equivalence and invariant suite over the
// seed x n_kv x b_c grid. The report is deterministic for fixed options;
// reruns are byte-identical. Returns kExitOk iff every check passes.
int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);

// One CSV row per (seq_len x mode); wall-time columns vary between runs,
// everything else is byte-stable for a fixed seed and config.
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

// Utilization and predicted-speedup rows for the decode shape grid.
int cmd_model(const ModelOptions& opts, std::ostream& out, std::ostream& err);

// Trace CSV to csv_out plus a one-line summary to summary_out.
int cmd_simulate(const SimulateOptions& opts, std::ostream& csv_out,
                 std::ostream& summary_out, std::ostream& err);

} // namespace etaplab::cli
