#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wcea/annotations.hpp"
#include "wcea/cfg.hpp"
#include "wcea/events.hpp"
#include "wcea/memory.hpp"
#include "wcea/model.hpp"

namespace wcea {

enum class StopReason : uint8_t { HitStopAddress, MaxSteps, Fault };

const char* to_string(StopReason r);

struct SimOptions {
  uint32_t start = 0;
  std::set<uint32_t> stop;  // halting fetch addresses (checked before execution)
  uint64_t max_steps = 10'000'000;
  uint32_t initial_sp = 0;           // 0 = top of the highest RAM range
  std::optional<uint32_t> stack_limit;  // fault when SP drops below this
  bool record_trace = true;
};

// Straight-line run between control transfers: start address, instruction
// count and the counter deltas it contributed.
struct TraceRun {
  uint32_t start_addr = 0;
  uint32_t instr_count = 0;
  EventVector events;
};

struct SimResult {
  EventVector counters;            // the six Cortex-M0 PMCs
  std::vector<TraceRun> block_trace;
  uint64_t executed = 0;
  StopReason stop = StopReason::MaxSteps;
  uint32_t stop_pc = 0;
  std::string fault_cause;  // set when stop == Fault
};

// Executes the ARMv6-M subset and counts events under the same conventions
// as the static event analysis: taken branches on every non-sequential
// transfer (conditional-taken, unconditional, call, return), data accesses
// classified through the image's memory map with LDM/STM/PUSH/POP counting
// one access per register, MULS counted separately. Faults carry pc and
// cause; a fetch of a stop address halts before executing it.
SimResult run(const MemoryImage& image, const SimOptions& options);

// Turns an execution trace into `loop ... bound 0..N;` facts: per loop, the
// maximum number of latch-block executions over the entries observed in the
// trace, marked provenance=trace (the run may not exercise the worst case).
// A trace address outside every CFG block is an error: the decoder and the
// simulator disagree and that must not be papered over.
AnnotationSet derive_flow_facts(const SimResult& sim, const Cfg& cfg);

// The model applied to the simulator's own counters (the evaluation
// baseline the static result is compared against).
Rat model_result(const SimResult& sim, const EnergyModel& model);

}  // namespace wcea
