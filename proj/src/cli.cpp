// SPDX-License-Identifier: Apache-2.0
#include "etaplab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "etaplab/attention.hpp"
#include "etaplab/etap.hpp"
#include "etaplab/tiled_standard.hpp"
#include "etaplab/wgmma_model.hpp"

namespace etaplab::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// Collects softmax-state invariant violations across block steps.
struct StateChecker {
    std::size_t violations = 0;
    std::string first_reason;

    BlockHook hook() {
        return [this](const BlockStepInfo& info) {
            for (std::size_t i = 0; i < info.m_old.size(); ++i) {
                const bool first_touch = std::isinf(info.m_old[i]) && info.m_old[i] < 0;
                if (info.state.m[i] < info.m_old[i]) {
                    note("m decreased", info);
                } else if (!(info.state.l[i] > 0.0)) {
                    note("l not positive", info);
                } else if (first_touch ? info.rescale[i] != 0.0
                                       : !(info.rescale[i] > 0.0 && info.rescale[i] <= 1.0)) {
                    note("rescale factor out of range", info);
                }
            }
        };
    }

    void note(const std::string& reason, const BlockStepInfo& info) {
        ++violations;
        if (first_reason.empty()) {
            first_reason = reason + " at query block " + std::to_string(info.query_block) +
                           ", kv block " + std::to_string(info.kv_block);
        }
    }
};

double wall_ms(const std::chrono::steady_clock::time_point& t0,
               const std::chrono::steady_clock::time_point& t1) {
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return std::max(ms, 1e-6); // wall time is reported strictly positive
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.n_kv_list.empty() || opts.b_c_list.empty()) {
        err << "verify: empty dimension grid\n";
        return kExitUsage;
    }
    if (!(opts.tolerance >= 0.0)) {
        err << "verify: tolerance must be >= 0\n";
        return kExitUsage;
    }

    const std::uint64_t seeds[3] = {opts.seed, opts.seed + 1, opts.seed + 2};
    std::size_t checks = 0, failures = 0;
    auto fail = [&](const std::string& name, const std::string& where, double value) {
        ++failures;
        out << "FAIL " << name << " (" << where << "): max error " << fmt(value)
            << " exceeds tolerance " << fmt(opts.tolerance) << "\n";
    };

    out << "verify grid: seeds {" << seeds[0] << "," << seeds[1] << "," << seeds[2]
        << "}, n_kv {";
    for (std::size_t i = 0; i < opts.n_kv_list.size(); ++i)
        out << (i ? "," : "") << opts.n_kv_list[i];
    out << "}, b_c {";
    for (std::size_t i = 0; i < opts.b_c_list.size(); ++i)
        out << (i ? "," : "") << opts.b_c_list[i];
    out << "}, n_q " << opts.n_q << ", d_qk " << opts.d_qk << ", d_v " << opts.d_v
        << ", precision " << to_string(opts.precision) << ", tolerance "
        << fmt(opts.tolerance) << "\n";

    const TileConfig base_tiles{opts.b_r, 64, 2};
    EtapFaults faults;
    faults.negate_rescale = opts.corrupt_rescale;

    for (std::uint64_t seed : seeds) {
        for (std::size_t n_kv : opts.n_kv_list) {
            const AttentionProblem problem = make_problem(
                seed, opts.n_q, n_kv, opts.d_qk, opts.d_v, opts.scale, opts.precision);
            const AttentionOutput ref = attention_ref(problem);
            const Matrix* prev_etap = nullptr;
            Matrix prev_etap_store(1, 1);
            std::size_t prev_b_c = 0;

            for (std::size_t b_c : opts.b_c_list) {
                TileConfig tiles = base_tiles;
                tiles.b_c = b_c;
                const std::string where = "seed=" + std::to_string(seed) +
                                          " n_kv=" + std::to_string(n_kv) +
                                          " b_c=" + std::to_string(b_c);

                StateChecker std_states, etap_states;
                const AttentionOutput std_out =
                    run_standard(problem, tiles, std_states.hook());
                const AttentionOutput etap_out =
                    run_etap(problem, tiles, etap_states.hook(), faults);

                const double e_std = max_abs_diff(std_out.o, ref.o);
                const double e_etap_ref = max_abs_diff(etap_out.o, ref.o);
                const double e_etap_std = max_abs_diff(etap_out.o, std_out.o);
                const double e_l = std::max(max_abs_diff(std_out.l, ref.l),
                                            max_abs_diff(etap_out.l, ref.l));

                ++checks;
                if (e_std > opts.tolerance) fail("standard-vs-oracle", where, e_std);
                ++checks;
                if (e_etap_ref > opts.tolerance || e_etap_std > opts.tolerance) {
                    fail("transposition-equivalence", where,
                         std::max(e_etap_ref, e_etap_std));
                }
                ++checks;
                if (e_l > opts.tolerance) fail("logsumexp", where, e_l);
                ++checks;
                if (std_states.violations + etap_states.violations > 0) {
                    ++failures;
                    out << "FAIL softmax-state (" << where << "): "
                        << (std_states.violations ? std_states.first_reason
                                                  : etap_states.first_reason)
                        << "\n";
                }
                ++checks;
                if (prev_etap) {
                    const double e_part = max_abs_diff(etap_out.o, *prev_etap);
                    if (e_part > opts.tolerance) {
                        fail("partition-invariance",
                             where + " vs b_c=" + std::to_string(prev_b_c), e_part);
                    }
                }
                prev_etap_store = etap_out.o;
                prev_etap = &prev_etap_store;
                prev_b_c = b_c;

                out << "case " << where << ": max_abs std/ref=" << fmt(e_std)
                    << " etap/ref=" << fmt(e_etap_ref) << " etap/std=" << fmt(e_etap_std)
                    << " L=" << fmt(e_l) << " rmse etap/ref=" << fmt(rmse(etap_out.o, ref.o))
                    << "\n";
            }
        }
    }

    out << "verify: " << (checks - failures) << "/" << checks << " checks passed\n";
    return failures == 0 ? kExitOk : kExitVerifyFailed;
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.modes.empty()) {
        err << "bench: mode list is empty\n";
        return kExitUsage;
    }
    for (const std::string& m : opts.modes) {
        if (m != "naive" && m != "standard" && m != "etap") {
            err << "bench: unknown mode '" << m << "'\n";
            return kExitUsage;
        }
    }
    if (opts.seq_lens.empty()) {
        err << "bench: sequence length list is empty\n";
        return kExitUsage;
    }
    if (opts.repeats < 1) {
        err << "bench: repeats must be >= 1\n";
        return kExitUsage;
    }

    const std::size_t n_q = opts.heads * opts.q_tokens;
    for (std::size_t n_kv : opts.seq_lens) {
        const bool over_cap =
            n_kv > kNaiveKvCap || n_q * n_kv * sizeof(double) > kNaiveScoreByteBudget;
        if (over_cap && !opts.allow_large) {
            err << "bench: n_kv=" << n_kv
                << " exceeds the desk-scale naive-oracle cap; rerun with --allow-large "
                   "(the naive reference is then replaced by the exact64 standard "
                   "pipeline)\n";
            return kExitUsage;
        }
    }

    out << "mode,n_q,n_kv,d_qk,d_v,batch,b_r,b_c,stages,precision,wall_time_ms_mean,"
           "wall_time_ms_median,achieved_gmacs_per_s,modeled_utilization,rmse_vs_oracle,"
           "repeats\n";

    const TileConfig tiles{opts.b_r, opts.b_c, opts.stages};
    for (std::size_t n_kv : opts.seq_lens) {
        const bool over_cap =
            n_kv > kNaiveKvCap || n_q * n_kv * sizeof(double) > kNaiveScoreByteBudget;

        std::vector<AttentionProblem> problems;
        problems.reserve(opts.batch);
        for (std::size_t inst = 0; inst < opts.batch; ++inst) {
            problems.push_back(make_problem(opts.seed + 7919 * inst, n_q, n_kv, opts.d_qk,
                                            opts.d_v, opts.scale, opts.precision));
        }

        // reference outputs in exact64 on the same (already rounded) operands
        std::vector<AttentionOutput> refs;
        refs.reserve(opts.batch);
        for (const AttentionProblem& p : problems) {
            AttentionProblem exact = p;
            exact.precision = Precision::exact64;
            refs.push_back(over_cap ? run_standard(exact, tiles) : attention_ref(exact));
        }

        const std::uint64_t useful_macs = static_cast<std::uint64_t>(opts.batch) * n_q *
                                          n_kv * (opts.d_qk + opts.d_v);
        DecodeShape shape;
        shape.heads = opts.heads;
        shape.q_tokens = opts.q_tokens;
        shape.kv_len = n_kv;
        shape.d_qk = opts.d_qk;
        shape.d_v = opts.d_v;
        shape.batch = opts.batch;

        for (const std::string& mode : opts.modes) {
            if (mode == "naive" && over_cap) {
                err << "bench: skipping naive mode at n_kv=" << n_kv
                    << " (over the desk-scale cap)\n";
                continue;
            }
            auto run_mode = [&](const AttentionProblem& p) -> AttentionOutput {
                if (mode == "naive") return attention_ref(p);
                if (mode == "standard") return run_standard(p, tiles);
                return run_etap(p, tiles);
            };

            std::vector<double> times;
            times.reserve(opts.repeats);
            double max_rmse = 0.0;
            for (std::size_t rep = 0; rep < opts.repeats; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                std::vector<AttentionOutput> outs;
                outs.reserve(opts.batch);
                for (const AttentionProblem& p : problems) outs.push_back(run_mode(p));
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(wall_ms(t0, t1));
                if (rep == 0) {
                    for (std::size_t i = 0; i < outs.size(); ++i)
                        max_rmse = std::max(max_rmse, rmse(outs[i].o, refs[i].o));
                }
            }

            const double med = median(times);
            const double gmacs =
                static_cast<double>(useful_macs) / 1e9 / (med / 1e3);
            const double model_util =
                utilization(mode == "etap" ? ComputeMode::etap : ComputeMode::original,
                            shape)
                    .utilization;

            out << mode << ',' << n_q << ',' << n_kv << ',' << opts.d_qk << ','
                << opts.d_v << ',' << opts.batch << ',' << opts.b_r << ',' << opts.b_c
                << ',' << opts.stages << ',' << to_string(opts.precision) << ','
                << fmt(mean(times)) << ',' << fmt(med) << ',' << fmt(gmacs) << ','
                << fmt(model_util) << ',' << fmt(max_rmse) << ',' << opts.repeats << "\n";
        }
    }
    return kExitOk;
}

int cmd_model(const ModelOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.kv_lens.empty()) {
        err << "model: kv length list is empty\n";
        return kExitUsage;
    }
    WgmmaSpec spec;
    spec.m_min = opts.m_min;
    spec.n_step = opts.n_step;
    spec.k_step = opts.k_step;
    spec.peak_tflops = opts.peak_tflops;

    out << "mode,heads,q_tokens,batch,kv_len,d_qk,d_v,m_min,n_step,k_step,useful_macs,"
           "issued_macs,utilization,qk_m_axis_utilization,pv_m_axis_utilization,"
           "predicted_speedup,effective_tflops\n";
    for (std::size_t kv : opts.kv_lens) {
        DecodeShape shape;
        shape.heads = opts.heads;
        shape.q_tokens = opts.q_tokens;
        shape.kv_len = kv;
        shape.d_qk = opts.d_qk;
        shape.d_v = opts.d_v;
        shape.batch = opts.batch;
        const double speedup = predicted_speedup(shape, spec);
        for (ComputeMode mode : {ComputeMode::original, ComputeMode::etap}) {
            const UtilizationReport rep = utilization(mode, shape, spec);
            out << to_string(mode) << ',' << shape.heads << ',' << shape.q_tokens << ','
                << shape.batch << ',' << kv << ',' << shape.d_qk << ',' << shape.d_v << ','
                << spec.m_min << ',' << spec.n_step << ',' << spec.k_step << ','
                << rep.useful_macs << ',' << rep.issued_macs << ','
                << fmt(rep.utilization) << ',' << fmt(rep.qk.m_axis_utilization()) << ','
                << fmt(rep.pv.m_axis_utilization()) << ',' << fmt(speedup) << ','
                << fmt(spec.peak_tflops * rep.utilization) << "\n";
        }
    }
    return kExitOk;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& csv_out,
                 std::ostream& summary_out, std::ostream& err) {
    PipelineTrace trace;
    try {
        trace = simulate(opts.schedule);
    } catch (const std::exception& e) {
        err << "simulate: " << e.what() << "\n";
        return kExitUsage;
    }
    std::string why;
    if (!validate_trace(trace, opts.schedule, &why)) {
        err << "simulate: emitted trace violates schedule invariants: " << why << "\n";
        return kExitVerifyFailed;
    }
    write_trace_csv(csv_out, trace);
    summary_out << "makespan=" << trace.makespan << " stall_time=" << trace.stall_time
                << " fill_time=" << trace.fill_time << "\n";
    return kExitOk;
}

} // namespace etaplab::cli
