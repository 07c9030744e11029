// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <sstream>

#include "etaplab/pipeline_sim.hpp"

using namespace etaplab;

namespace {

ScheduleConfig cfg(std::size_t t_c, std::size_t stages, std::uint64_t t_load,
                   std::uint64_t t_compute, std::uint64_t t_barrier = 0) {
    ScheduleConfig c;
    c.t_c = t_c;
    c.stages = stages;
    c.t_load = t_load;
    c.t_compute = t_compute;
    c.t_barrier = t_barrier;
    return c;
}

} // namespace

TEST_CASE("single stage serializes completely") {
    for (std::size_t t_c : {1, 2, 4, 7, 64}) {
        const ScheduleConfig c = cfg(t_c, 1, 3, 5, 2);
        const PipelineTrace t = simulate(c);
        CHECK(t.makespan == t_c * (3 + 5 + 2));
        std::string why;
        CHECK_MESSAGE(validate_trace(t, c, &why), why);
    }
}

TEST_CASE("double buffering hides loads when compute dominates") {
    // hand-stepped for t_c=4: loads 2 units, compute 3 units
    const ScheduleConfig c4 = cfg(4, 2, 2, 3);
    const PipelineTrace t4 = simulate(c4);
    CHECK(t4.makespan == 2 + 4 * 3);
    CHECK(t4.stall_time == 0);

    for (std::size_t t_c = 1; t_c <= 64; ++t_c) {
        for (std::uint64_t t_load = 1; t_load <= 3; ++t_load) {
            const ScheduleConfig c = cfg(t_c, 2, t_load, 3);
            const PipelineTrace t = simulate(c);
            CHECK(t.makespan == t_load + t_c * 3);
        }
    }
}

TEST_CASE("load-bound steady state") {
    // hand-stepped for t_c=4: loads 2 units, compute 1 unit
    const ScheduleConfig c4 = cfg(4, 2, 2, 1);
    const PipelineTrace t4 = simulate(c4);
    CHECK(t4.makespan == 4 * 2 + 1);

    for (std::size_t t_c = 1; t_c <= 64; ++t_c) {
        const ScheduleConfig c = cfg(t_c, 2, 4, 2); // t_load = 2 * t_compute
        const PipelineTrace t = simulate(c);
        CHECK(t.makespan == t_c * 4 + 2);
    }
}

TEST_CASE("makespan lower bounds") {
    for (std::size_t stages : {1, 2, 3, 5}) {
        for (std::uint64_t t_load : {1, 3, 7}) {
            for (std::uint64_t t_compute : {1, 4, 9}) {
                const ScheduleConfig c = cfg(13, stages, t_load, t_compute);
                const PipelineTrace t = simulate(c);
                CHECK(t.makespan >= 13 * t_compute);
                CHECK(t.makespan >= 13 * t_load);
                CHECK(t.makespan >= t_load + t_compute);
            }
        }
    }
}

TEST_CASE("makespan is nonincreasing in stages, constant beyond two") {
    for (std::uint64_t t_barrier : {0, 2}) {
        std::uint64_t prev = UINT64_MAX;
        std::uint64_t two_stage = 0;
        for (std::size_t stages = 1; stages <= 6; ++stages) {
            const ScheduleConfig c = cfg(17, stages, 3, 4, t_barrier);
            const PipelineTrace t = simulate(c);
            CHECK(t.makespan <= prev);
            prev = t.makespan;
            if (stages == 2) two_stage = t.makespan;
            if (stages > 2 && t_barrier == 0) CHECK(t.makespan == two_stage);
        }
    }
}

TEST_CASE("stall accounting identity holds against the event log") {
    for (std::size_t t_c : {1, 3, 8, 21}) {
        for (std::uint64_t t_load : {1, 2, 5}) {
            for (std::uint64_t t_compute : {1, 3, 6}) {
                const ScheduleConfig c = cfg(t_c, 2, t_load, t_compute);
                const PipelineTrace t = simulate(c);
                // recompute stall from the events alone
                std::vector<std::uint64_t> starts, dones;
                for (const TraceEvent& e : t.events) {
                    if (e.actor != Actor::consumer || e.block < 0) continue;
                    if (e.action == Action::compute_start) starts.push_back(e.time);
                    if (e.action == Action::compute_done) dones.push_back(e.time);
                }
                REQUIRE(starts.size() == t_c);
                std::uint64_t stall = 0;
                for (std::size_t j = 1; j < t_c; ++j) stall += starts[j] - dones[j - 1];
                CHECK(stall == t.stall_time);
                CHECK(t.makespan == t.fill_time + t_c * t_compute + stall);
                CHECK(t.fill_time == t_load); // barrier-free fill is one load
            }
        }
    }
}

TEST_CASE("emitted traces replay as legal schedules") {
    for (std::size_t stages : {1, 2, 4}) {
        for (bool split : {false, true}) {
            ScheduleConfig c = cfg(19, stages, 2, 5, 1);
            c.split_consumer = split;
            const PipelineTrace t = simulate(c);
            std::string why;
            CHECK_MESSAGE(validate_trace(t, c, &why), why);
        }
    }
}

TEST_CASE("trace validation catches violations") {
    const ScheduleConfig c = cfg(4, 1, 2, 3);
    PipelineTrace t = simulate(c);
    // pull block 1's compute before its load completes
    for (TraceEvent& e : t.events) {
        if (e.block == 1 && e.action == Action::compute_start) e.time = 0;
    }
    std::string why;
    CHECK_FALSE(validate_trace(t, c, &why));
    CHECK(why.find("compute before load_done") != std::string::npos);
}

TEST_CASE("split mode overlaps the second half with the next block") {
    ScheduleConfig c = cfg(16, 2, 1, 6);
    const std::uint64_t joint = simulate(c).makespan;
    c.split_consumer = true;
    const PipelineTrace split = simulate(c);
    CHECK(split.makespan < joint); // the aux actor absorbs half the work
    std::string why;
    CHECK_MESSAGE(validate_trace(split, c, &why), why);
}

TEST_CASE("deterministic event stream and csv shape") {
    const ScheduleConfig c = cfg(3, 2, 2, 3, 1);
    const PipelineTrace a = simulate(c);
    const PipelineTrace b = simulate(c);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].actor == b.events[i].actor);
        CHECK(a.events[i].action == b.events[i].action);
        CHECK(a.events[i].block == b.events[i].block);
    }
    std::ostringstream csv;
    write_trace_csv(csv, a);
    const std::string text = csv.str();
    CHECK(text.rfind("time,actor,action,stage,block\n", 0) == 0);
    // header + q prologue (2 events) + per block: issue, done, start, done, release
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 + 3 * 5);
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(simulate(cfg(0, 1, 1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate(cfg(1, 0, 1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate(cfg(1, 1, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate(cfg(1, 1, 1, 0)), std::invalid_argument);
}
