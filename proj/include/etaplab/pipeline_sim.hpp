// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace etaplab {

// Producer/consumer schedule parameters. Time is in integral abstract units;
// no wall-clock mapping is claimed.
struct ScheduleConfig {
    std::size_t t_c = 1;          // number of KV blocks
    std::size_t stages = 2;       // circular SMEM buffer depth
    std::uint64_t t_load = 1;     // per-block K/V load time
    std::uint64_t t_compute = 1;  // per-block consumer work
    std::uint64_t t_barrier = 0;  // sync overhead before each block's compute
    // Split the consumer work into two t_compute/2 halves on two actors: the
    // second half of block j can overlap the first half of block j+1. Neither
    // mode is claimed to match hardware timing.
    bool split_consumer = false;
};

enum class Actor { producer, consumer, consumer_aux };
enum class Action { load_issue, load_done, compute_start, compute_done, release };

const char* to_string(Actor a);
const char* to_string(Action a);

struct TraceEvent {
    std::uint64_t time;
    Actor actor;
    Action action;
    std::size_t stage;
    std::int64_t block; // -1 is the one-time query-load prologue
};

struct PipelineTrace {
    std::vector<TraceEvent> events; // time-ordered
    std::uint64_t makespan = 0;     // last compute_done - first KV load_issue
    std::uint64_t stall_time = 0;   // consumer idle between consecutive blocks
    std::uint64_t pipeline_start = 0; // time of block 0's load_issue
    std::uint64_t fill_time = 0;      // first compute_start - pipeline_start
};

// Greedy earliest-start schedule under three invariants:
//   1. stage safety: load_issue(j) waits for release(j - stages)
//   2. compute_start(j) >= load_done(j), plus t_barrier
//   3. blocks complete in order
// The query load is a one-time prologue of t_load before block 0; it occupies
// the producer but is excluded from makespan, which is measured from the
// first KV block load issue.
PipelineTrace simulate(const ScheduleConfig& cfg);

// Replays the event log against the three invariants; on failure *why names
// the violated rule.
bool validate_trace(const PipelineTrace& trace, const ScheduleConfig& cfg,
                    std::string* why = nullptr);

// CSV: header "time,actor,action,stage,block", one event per row.
void write_trace_csv(std::ostream& out, const PipelineTrace& trace);

} // namespace etaplab
