// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "etaplab/attention.hpp"
#include "support/reference_impls.hpp"

using namespace etaplab;

namespace {

double max_abs(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

} // namespace

TEST_CASE("single-logit attention is a passthrough") {
    const Matrix q(1, 2, {1.0, 0.0});
    const Matrix k(1, 2, {1.0, 0.0});
    const Matrix v(1, 2, {3.0, 4.0});
    const AttentionProblem p = make_problem(q, k, v, 1.0);
    const AttentionOutput out = attention_ref(p);
    CHECK(out.o.at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(out.o.at(0, 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(out.l[0] == doctest::Approx(1.0).epsilon(1e-15)); // L = s = q.k
}

TEST_CASE("identical keys: output is the shared value, L = s + log 2") {
    const Matrix q(1, 2, {0.5, -0.25});
    const Matrix k(2, 2, {1.0, 2.0, 1.0, 2.0});
    const Matrix v(2, 3, {7.0, -1.0, 0.5, 7.0, -1.0, 0.5});
    const AttentionProblem p = make_problem(q, k, v, 1.0);
    const AttentionOutput out = attention_ref(p);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(out.o.at(0, c) == doctest::Approx(v.at(0, c)).epsilon(1e-14));
    const double s = 0.5 * 1.0 + (-0.25) * 2.0;
    CHECK(out.l[0] == doctest::Approx(s + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("matches the dense brute-force evaluation") {
    const AttentionProblem p = make_problem(42, 4, 37, 8, 8, 1.0 / std::sqrt(8.0));
    const AttentionOutput out = attention_ref(p);
    const testref::DenseAttention ref = testref::dense_attention(p);
    CHECK(max_abs(out.o, ref.o) <= 1e-12);
    for (std::size_t i = 0; i < p.n_q; ++i)
        CHECK(std::fabs(out.l[i] - ref.logsumexp[i]) <= 1e-12);
}

TEST_CASE("shift invariance: O unchanged, L shifts by c") {
    // append one coordinate: K gets a column of ones, Q row i gets c_i/scale,
    // which adds c_i to every logit of query i
    const double scale = 0.5;
    const std::vector<double> shifts = {0.0, 3.0, -2.0};
    const Matrix q0 = matrix_from_seed(3, 4, 5, Dist::normal);
    const Matrix k0 = matrix_from_seed(6, 4, 6, Dist::normal);
    const Matrix v = matrix_from_seed(6, 5, 7, Dist::normal);

    Matrix q1(3, 5), k1(6, 5);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t c = 0; c < 4; ++c) q1.at(i, c) = q0.at(i, c);
        q1.at(i, 4) = shifts[i] / scale;
    }
    for (std::size_t j = 0; j < 6; ++j) {
        for (std::size_t c = 0; c < 4; ++c) k1.at(j, c) = k0.at(j, c);
        k1.at(j, 4) = 1.0;
    }

    const AttentionOutput base = attention_ref(make_problem(q0, k0, v, scale));
    const AttentionOutput shifted = attention_ref(make_problem(q1, k1, v, scale));
    CHECK(max_abs(base.o, shifted.o) <= 1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(shifted.l[i] - base.l[i] == doctest::Approx(shifts[i]).epsilon(1e-12));
}

TEST_CASE("output rows stay in the convex hull of V rows") {
    const AttentionProblem p = make_problem(13, 5, 9, 6, 4);
    const AttentionOutput out = attention_ref(p);
    for (std::size_t c = 0; c < p.d_v; ++c) {
        double lo = p.v.at(0, c), hi = p.v.at(0, c);
        for (std::size_t j = 1; j < p.n_kv; ++j) {
            lo = std::min(lo, p.v.at(j, c));
            hi = std::max(hi, p.v.at(j, c));
        }
        for (std::size_t i = 0; i < p.n_q; ++i) {
            CHECK(out.o.at(i, c) >= lo - 1e-12);
            CHECK(out.o.at(i, c) <= hi + 1e-12);
        }
    }
}

TEST_CASE("scale zero averages the value rows") {
    const Matrix q = matrix_from_seed(3, 4, 1, Dist::normal);
    const Matrix k = matrix_from_seed(5, 4, 2, Dist::normal);
    const Matrix v = matrix_from_seed(5, 2, 3, Dist::normal);
    const AttentionOutput out = attention_ref(make_problem(q, k, v, 0.0));
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t j = 0; j < 5; ++j) mean += v.at(j, c);
        mean /= 5.0;
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(out.o.at(i, c) == doctest::Approx(mean).epsilon(1e-13));
    }
}

TEST_CASE("implied probability rows sum to one when recomputed from L") {
    // p_ij = exp(s_ij - L_i) must be a probability row
    const AttentionProblem p = make_problem(21, 4, 19, 8, 4);
    const AttentionOutput out = attention_ref(p);
    for (std::size_t i = 0; i < p.n_q; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p.n_kv; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < p.d_qk; ++c) dot += p.q.at(i, c) * p.k.at(j, c);
            sum += std::exp(p.scale * dot - out.l[i]);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::isfinite(out.l[i]));
    }
}

TEST_CASE("problem construction validates shapes and scale") {
    const Matrix q = matrix_from_seed(2, 4, 1, Dist::normal);
    const Matrix k = matrix_from_seed(3, 4, 2, Dist::normal);
    const Matrix v = matrix_from_seed(3, 2, 3, Dist::normal);
    CHECK_NOTHROW(make_problem(q, k, v, 1.0));
    CHECK_THROWS_AS(make_problem(q, matrix_from_seed(3, 5, 2, Dist::normal), v, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_problem(q, k, matrix_from_seed(4, 2, 3, Dist::normal), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_problem(q, k, v, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(q, k, v, std::nan("")), std::invalid_argument);
}

TEST_CASE("default scale is 1/sqrt(d_qk) and inputs are rounded per precision") {
    const AttentionProblem p = make_problem(9, 2, 3, 16, 4);
    CHECK(p.scale == doctest::Approx(0.25).epsilon(1e-15));

    const AttentionProblem ph = make_problem(9, 2, 3, 16, 4, -1.0, Precision::fp16emu);
    for (std::size_t i = 0; i < ph.q.size(); ++i) {
        CHECK(ph.q.data()[i] == round_half(ph.q.data()[i]));
    }
}
