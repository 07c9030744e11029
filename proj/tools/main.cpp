// SPDX-License-Identifier: Apache-2.0
//
// etaplab — desk-scale attention kernel laboratory.
//
//   etaplab verify    oracle/standard/ETAP equivalence and invariant suite
//   etaplab bench     wall-clock microbenchmark, CSV output
//   etaplab model     WGMMA tile-padding utilization model, CSV output
//   etaplab simulate  producer/consumer schedule simulator, trace CSV
//
// Every subcommand accepts --config FILE (INI, one section per subcommand);
// command-line flags win over config file values.
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "etaplab/cli.hpp"

namespace {

using etaplab::cli::kExitUsage;

bool parse_scale(const std::string& text, double& scale, std::string& error) {
    if (text == "auto") {
        scale = -1.0;
        return true;
    }
    try {
        scale = std::stod(text);
    } catch (const std::exception&) {
        error = "--scale expects a number or 'auto', got '" + text + "'";
        return false;
    }
    if (!(scale >= 0.0)) {
        error = "--scale must be >= 0";
        return false;
    }
    return true;
}

bool parse_precision_flag(const std::string& text, etaplab::Precision& p,
                          std::string& error) {
    if (!etaplab::parse_precision(text, p)) {
        error = "--precision expects exact64|fp32|fp16emu, got '" + text + "'";
        return false;
    }
    return true;
}

// Opens --out when given, otherwise uses the fallback stream.
struct OutputTarget {
    std::ofstream file;
    std::ostream* stream = nullptr;

    bool open(const std::string& path, std::ostream& fallback, std::ostream& err) {
        if (path.empty()) {
            stream = &fallback;
            return true;
        }
        file.open(path);
        if (!file) {
            err << "cannot open " << path << " for writing\n";
            return false;
        }
        stream = &file;
        return true;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"etaplab: transposed-attention pipeline laboratory"};
    app.require_subcommand(1);
    // top-level config uses [section] per subcommand; the per-subcommand
    // --config variants accept flat key=value files
    app.set_config("--config", "", "INI config file; command-line flags win");

    etaplab::cli::VerifyOptions verify;
    etaplab::cli::BenchOptions bench;
    etaplab::cli::ModelOptions model;
    etaplab::cli::SimulateOptions sim;

    std::string verify_scale = "auto", bench_scale = "auto";
    std::string verify_precision = "exact64", bench_precision = "exact64";
    std::string verify_out, bench_out, model_out, sim_out;
    std::vector<std::size_t> verify_seq, verify_bc_single;
    std::size_t verify_heads = 16, verify_q_tokens = 1;

    CLI::App* v = app.add_subcommand("verify", "run the equivalence and invariant suite");
    v->add_option("--seed", verify.seed, "base seed; the grid uses seed..seed+2");
    v->add_option("--seq-len", verify_seq, "KV context lengths (repeatable)");
    v->add_option("--bc", verify_bc_single, "KV block size; replaces the default sweep");
    v->add_option("--br", verify.b_r, "query block size");
    v->add_option("--heads", verify_heads, "attention heads folded into queries")
        ->check(CLI::PositiveNumber);
    v->add_option("--q-tokens", verify_q_tokens, "query tokens per decode step")
        ->check(CLI::PositiveNumber);
    v->add_option("--d-qk", verify.d_qk, "query/key head dimension");
    v->add_option("--d-v", verify.d_v, "value head dimension");
    v->add_option("--scale", verify_scale, "logit scale, number or 'auto'");
    v->add_option("--precision", verify_precision, "exact64|fp32|fp16emu");
    v->add_option("--tolerance", verify.tolerance, "max-abs tolerance for all checks");
    v->add_option("--out", verify_out, "write the report to a file");
    v->add_flag("--corrupt-rescale", verify.corrupt_rescale,
                "test hook: corrupt the ETAP rescale sign (forces failure)");

    CLI::App* b = app.add_subcommand("bench", "time the pipelines over a shape grid");
    b->add_option("--mode", bench.modes, "naive|standard|etap (repeatable)");
    b->add_option("--seq-len", bench.seq_lens, "KV context lengths (repeatable)");
    b->add_option("--batch", bench.batch, "independent instances per case");
    b->add_option("--heads", bench.heads, "attention heads folded into queries");
    b->add_option("--q-tokens", bench.q_tokens, "query tokens per decode step");
    b->add_option("--d-qk", bench.d_qk, "query/key head dimension");
    b->add_option("--d-v", bench.d_v, "value head dimension");
    b->add_option("--br", bench.b_r, "query block size");
    b->add_option("--bc", bench.b_c, "KV block size");
    b->add_option("--stages", bench.stages, "circular buffer depth");
    b->add_option("--precision", bench_precision, "exact64|fp32|fp16emu");
    b->add_option("--scale", bench_scale, "logit scale, number or 'auto'");
    b->add_option("--seed", bench.seed, "base RNG seed");
    b->add_option("--repeats", bench.repeats, "timed repetitions per case");
    b->add_option("--out", bench_out, "write CSV to a file");
    b->add_flag("--allow-large", bench.allow_large,
                "permit shapes over the desk-scale cap (naive reference skipped)");

    CLI::App* m = app.add_subcommand("model", "WGMMA padding utilization model");
    m->add_option("--seq-len", model.kv_lens, "KV context lengths (repeatable)");
    m->add_option("--heads", model.heads, "per-device head count");
    m->add_option("--q-tokens", model.q_tokens, "query tokens per decode step");
    m->add_option("--batch", model.batch, "batch size");
    m->add_option("--d-qk", model.d_qk, "query/key head dimension");
    m->add_option("--d-v", model.d_v, "value head dimension");
    m->add_option("--m-min", model.m_min, "minimum/step M tile extent");
    m->add_option("--n-step", model.n_step, "N-dimension granularity");
    m->add_option("--k-step", model.k_step, "K-dimension granularity");
    m->add_option("--peak-tflops", model.peak_tflops, "hardware peak for the tflops column");
    m->add_option("--out", model_out, "write CSV to a file");

    CLI::App* s = app.add_subcommand("simulate", "producer/consumer schedule simulator");
    s->add_option("--tc", sim.schedule.t_c, "number of KV blocks");
    s->add_option("--stages", sim.schedule.stages, "circular buffer depth");
    s->add_option("--t-load", sim.schedule.t_load, "time units per block load");
    s->add_option("--t-compute", sim.schedule.t_compute, "time units per block compute");
    s->add_option("--t-barrier", sim.schedule.t_barrier, "sync overhead per block");
    s->add_flag("--split", sim.schedule.split_consumer,
                "split consumer work across two overlapping actors");
    s->add_option("--out", sim_out, "write the trace CSV to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    std::string error;
    try {
        if (v->parsed()) {
            if (!parse_scale(verify_scale, verify.scale, error) ||
                !parse_precision_flag(verify_precision, verify.precision, error)) {
                std::cerr << error << "\n";
                return kExitUsage;
            }
            verify.n_q = verify_heads * verify_q_tokens;
            if (!verify_seq.empty()) verify.n_kv_list = verify_seq;
            if (!verify_bc_single.empty()) verify.b_c_list = verify_bc_single;
            OutputTarget target;
            if (!target.open(verify_out, std::cout, std::cerr)) return kExitUsage;
            return etaplab::cli::cmd_verify(verify, *target.stream, std::cerr);
        }
        if (b->parsed()) {
            if (!parse_scale(bench_scale, bench.scale, error) ||
                !parse_precision_flag(bench_precision, bench.precision, error)) {
                std::cerr << error << "\n";
                return kExitUsage;
            }
            OutputTarget target;
            if (!target.open(bench_out, std::cout, std::cerr)) return kExitUsage;
            return etaplab::cli::cmd_bench(bench, *target.stream, std::cerr);
        }
        if (m->parsed()) {
            OutputTarget target;
            if (!target.open(model_out, std::cout, std::cerr)) return kExitUsage;
            return etaplab::cli::cmd_model(model, *target.stream, std::cerr);
        }
        if (s->parsed()) {
            OutputTarget target;
            if (!target.open(sim_out, std::cout, std::cerr)) return kExitUsage;
            // with --out the summary goes to stdout, otherwise the CSV owns
            // stdout and the summary moves to stderr
            std::ostream& summary = sim_out.empty() ? std::cerr : std::cout;
            return etaplab::cli::cmd_simulate(sim, *target.stream, summary, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
