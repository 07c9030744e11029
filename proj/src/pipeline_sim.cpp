// SPDX-License-Identifier: Apache-2.0
#include "etaplab/pipeline_sim.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace etaplab {

namespace {

void check_config(const ScheduleConfig& cfg) {
    if (cfg.t_c < 1 || cfg.stages < 1) {
        throw std::invalid_argument("t_c and stages must be >= 1");
    }
    if (cfg.t_load == 0 || cfg.t_compute == 0) {
        throw std::invalid_argument("t_load and t_compute must be > 0");
    }
}

} // namespace

const char* to_string(Actor a) {
    switch (a) {
        case Actor::producer: return "producer";
        case Actor::consumer: return "consumer";
        case Actor::consumer_aux: return "consumer_aux";
    }
    return "unknown";
}

const char* to_string(Action a) {
    switch (a) {
        case Action::load_issue: return "load_issue";
        case Action::load_done: return "load_done";
        case Action::compute_start: return "compute_start";
        case Action::compute_done: return "compute_done";
        case Action::release: return "release";
    }
    return "unknown";
}

PipelineTrace simulate(const ScheduleConfig& cfg) {
    check_config(cfg);
    const std::size_t s = cfg.stages;
    PipelineTrace trace;
    auto emit = [&](std::uint64_t t, Actor actor, Action action, std::size_t stage,
                    std::int64_t block) {
        trace.events.push_back(TraceEvent{t, actor, action, stage, block});
    };

    // query prologue occupies the producer for one t_load
    emit(0, Actor::producer, Action::load_issue, 0, -1);
    emit(cfg.t_load, Actor::producer, Action::load_done, 0, -1);
    std::uint64_t producer_free = cfg.t_load;

    std::vector<std::uint64_t> release_time(cfg.t_c, 0);
    std::uint64_t consumer_free = 0;     // primary consumer
    std::uint64_t consumer_aux_free = 0; // split mode only
    std::uint64_t first_compute_start = 0;
    std::uint64_t prev_primary_done = 0;
    std::uint64_t last_done = 0;

    for (std::size_t j = 0; j < cfg.t_c; ++j) {
        const std::size_t stage = j % s;
        std::uint64_t issue = producer_free;
        if (j >= s) issue = std::max(issue, release_time[j - s]);
        const std::uint64_t loaded = issue + cfg.t_load;
        producer_free = loaded;
        emit(issue, Actor::producer, Action::load_issue, stage, static_cast<std::int64_t>(j));
        emit(loaded, Actor::producer, Action::load_done, stage, static_cast<std::int64_t>(j));
        if (j == 0) trace.pipeline_start = issue;

        std::uint64_t done;
        if (!cfg.split_consumer) {
            const std::uint64_t start = std::max(loaded, consumer_free) + cfg.t_barrier;
            done = start + cfg.t_compute;
            consumer_free = done;
            emit(start, Actor::consumer, Action::compute_start, stage,
                 static_cast<std::int64_t>(j));
            emit(done, Actor::consumer, Action::compute_done, stage,
                 static_cast<std::int64_t>(j));
            emit(done, Actor::consumer, Action::release, stage, static_cast<std::int64_t>(j));
            if (j == 0) first_compute_start = start;
            if (j > 0) trace.stall_time += start - prev_primary_done;
            prev_primary_done = done;
        } else {
            // primary does stats + first accumulator half, aux does the second
            // half once the rescale factors are published (one barrier apart)
            const std::uint64_t half0 = (cfg.t_compute + 1) / 2;
            const std::uint64_t half1 = cfg.t_compute / 2;
            const std::uint64_t start0 = std::max(loaded, consumer_free) + cfg.t_barrier;
            const std::uint64_t done0 = start0 + half0;
            consumer_free = done0;
            const std::uint64_t start1 = std::max(done0, consumer_aux_free) + cfg.t_barrier;
            const std::uint64_t done1 = start1 + half1;
            consumer_aux_free = done1;
            done = done1;
            emit(start0, Actor::consumer, Action::compute_start, stage,
                 static_cast<std::int64_t>(j));
            emit(done0, Actor::consumer, Action::compute_done, stage,
                 static_cast<std::int64_t>(j));
            emit(start1, Actor::consumer_aux, Action::compute_start, stage,
                 static_cast<std::int64_t>(j));
            emit(done1, Actor::consumer_aux, Action::compute_done, stage,
                 static_cast<std::int64_t>(j));
            emit(done1, Actor::consumer_aux, Action::release, stage,
                 static_cast<std::int64_t>(j));
            if (j == 0) first_compute_start = start0;
            if (j > 0) trace.stall_time += start0 - prev_primary_done;
            prev_primary_done = done0;
        }
        release_time[j] = done;
        last_done = done;
    }

    trace.makespan = last_done - trace.pipeline_start;
    trace.fill_time = first_compute_start - trace.pipeline_start;
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
    return trace;
}

bool validate_trace(const PipelineTrace& trace, const ScheduleConfig& cfg, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };

    std::map<std::int64_t, std::uint64_t> load_issue, load_done, release;
    std::map<std::int64_t, std::uint64_t> first_compute_start;
    for (const TraceEvent& e : trace.events) {
        switch (e.action) {
            case Action::load_issue: load_issue[e.block] = e.time; break;
            case Action::load_done: load_done[e.block] = e.time; break;
            case Action::release: release[e.block] = e.time; break;
            case Action::compute_start:
                if (!first_compute_start.count(e.block) ||
                    e.time < first_compute_start[e.block]) {
                    first_compute_start[e.block] = e.time;
                }
                break;
            case Action::compute_done: break;
        }
    }

    for (std::size_t j = 0; j < cfg.t_c; ++j) {
        const std::int64_t b = static_cast<std::int64_t>(j);
        if (!load_issue.count(b) || !load_done.count(b) || !release.count(b) ||
            !first_compute_start.count(b)) {
            return fail("missing events for block " + std::to_string(j));
        }
        // circular-buffer safety: the stage must be released before reuse
        if (j >= cfg.stages) {
            const std::int64_t prev = static_cast<std::int64_t>(j - cfg.stages);
            if (release.at(prev) > load_issue.at(b)) {
                return fail("stage reused before release at block " + std::to_string(j));
            }
        }
        if (first_compute_start.at(b) < load_done.at(b)) {
            return fail("compute before load_done at block " + std::to_string(j));
        }
        if (j > 0 && release.at(b - 1) > release.at(b)) {
            return fail("blocks complete out of order at block " + std::to_string(j));
        }
    }
    return true;
}

void write_trace_csv(std::ostream& out, const PipelineTrace& trace) {
    out << "time,actor,action,stage,block\n";
    for (const TraceEvent& e : trace.events) {
        out << e.time << ',' << to_string(e.actor) << ',' << to_string(e.action) << ','
            << e.stage << ',' << e.block << '\n';
    }
}

} // namespace etaplab
