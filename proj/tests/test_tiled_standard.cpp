// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

#include "etaplab/tiled_standard.hpp"

using namespace etaplab;

namespace {

double max_abs(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("degenerate tiling equals the oracle") {
    const AttentionProblem p = make_problem(42, 4, 37, 8, 8);
    const AttentionOutput ref = attention_ref(p);
    const AttentionOutput got = run_standard(p, TileConfig{8, 64, 1}); // single block
    CHECK(max_abs(got.o, ref.o) <= 1e-12);
    CHECK(max_abs(got.l, ref.l) <= 1e-12);
}

TEST_CASE("blocked run equals the oracle") {
    const AttentionProblem p = make_problem(42, 4, 37, 8, 8);
    const AttentionOutput ref = attention_ref(p);
    const AttentionOutput got = run_standard(p, TileConfig{2, 16, 2});
    CHECK(max_abs(got.o, ref.o) <= 1e-10);
    CHECK(max_abs(got.l, ref.l) <= 1e-10);
}

TEST_CASE("block-partition invariance over b_c") {
    const AttentionProblem p = make_problem(42, 4, 37, 8, 8);
    const AttentionOutput a = run_standard(p, TileConfig{2, 5, 2});
    const AttentionOutput b = run_standard(p, TileConfig{2, 16, 2});
    const AttentionOutput c = run_standard(p, TileConfig{2, 37, 2});
    CHECK(max_abs(a.o, b.o) <= 1e-10);
    CHECK(max_abs(b.o, c.o) <= 1e-10);
    CHECK(max_abs(a.o, c.o) <= 1e-10);
}

TEST_CASE("softmax state stays legal at every block step") {
    const AttentionProblem p = make_problem(3, 7, 100, 16, 8);
    std::size_t steps = 0;
    const BlockHook hook = [&](const BlockStepInfo& info) {
        ++steps;
        for (std::size_t i = 0; i < info.m_old.size(); ++i) {
            const bool first = std::isinf(info.m_old[i]);
            CHECK(info.state.m[i] >= info.m_old[i]);
            CHECK(info.state.l[i] > 0.0);
            if (first) {
                CHECK(info.rescale[i] == 0.0); // exp(-inf) contributes exactly 0
            } else {
                CHECK(info.rescale[i] > 0.0);
                CHECK(info.rescale[i] <= 1.0);
            }
        }
    };
    run_standard(p, TileConfig{4, 13, 2}, hook);
    CHECK(steps == 2 * kv_block_count(100, 13)); // 2 query blocks x 8 kv blocks
}

TEST_CASE("kv_block_count rounds up") {
    CHECK(kv_block_count(64, 64) == 1);
    CHECK(kv_block_count(65, 64) == 2);
    CHECK(kv_block_count(1, 100) == 1);
    CHECK(kv_block_count(257, 64) == 5);
}

TEST_CASE("fp16emu run stays close to the exact oracle") {
    const AttentionProblem p = make_problem(42, 4, 128, 32, 32, -1.0, Precision::fp16emu);
    const AttentionOutput ref = attention_ref(p); // exact64 on the rounded inputs
    const AttentionOutput got = run_standard(p, TileConfig{2, 32, 2});
    const double err = rmse(got.o, ref.o);
    CHECK(err > 0.0);
    CHECK(err <= 1e-3);
}

TEST_CASE("fp32 run is much closer than fp16emu") {
    const AttentionProblem p16 = make_problem(42, 4, 128, 32, 32, -1.0, Precision::fp16emu);
    const AttentionProblem p32 = make_problem(42, 4, 128, 32, 32, -1.0, Precision::fp32);
    const double e16 = rmse(run_standard(p16, TileConfig{4, 32, 2}).o, attention_ref(p16).o);
    const double e32 = rmse(run_standard(p32, TileConfig{4, 32, 2}).o, attention_ref(p32).o);
    CHECK(e32 > 0.0);
    CHECK(e32 < e16);
    CHECK(e32 <= 1e-5);
}

TEST_CASE("invalid tile config is rejected") {
    const AttentionProblem p = make_problem(1, 2, 8, 4, 4);
    CHECK_THROWS_AS(run_standard(p, TileConfig{0, 8, 1}), std::invalid_argument);
    CHECK_THROWS_AS(run_standard(p, TileConfig{2, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(run_standard(p, TileConfig{2, 8, 0}), std::invalid_argument);
}
