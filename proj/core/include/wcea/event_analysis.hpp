#pragma once

#include "wcea/contexts.hpp"
#include "wcea/events.hpp"
#include "wcea/model.hpp"
#include "wcea/value_analysis.hpp"

namespace wcea {

struct BlockCost {
  int node = -1;
  EventVector events;
  Rat energy = 0;
};

struct EdgeCost {
  int edge = -1;
  EventVector events;
  Rat energy = 0;
};

// Statically predicted counter counts for one (block, context) node.
// Conventions (kept in lockstep with the simulator):
//   - every instruction counts toward insn_nonmul except MULS, which counts
//     toward muls;
//   - loads add ram_reads/flash_reads per transferred register, classified
//     by the value analysis (literal-pool loads are flash);
//   - stores add ram_writes per transferred register;
//   - accesses with unknown or device/unmapped region take the worst
//     coefficient: flash_reads for loads (1.037... > 0.652...) and
//     ram_writes for stores (the only write counter);
//   - taken_branches stays 0 here, the event is edge-resident.
EventVector count_events_block(const ContextualCfg& g, int node, const ValueResults& values);

// taken_branches = 1 on edges whose traversal executes a taken branch
// (conditional-taken, unconditional, call and return edges); all other
// counters zero.
EventVector count_events_edge(const CtxEdge& edge);

// Per-node and per-edge costs priced with a static-capable model.
struct EventCosts {
  std::vector<BlockCost> node_costs;  // indexed by node id
  std::vector<EdgeCost> edge_costs;   // indexed by ctx edge id
  // Nodes with accesses priced under the worst-coefficient rule, for
  // driver warnings: (node, instruction address, recorded class).
  std::vector<std::tuple<int, uint32_t, AddressClass>> worst_case_accesses;
};

EventCosts compute_costs(const ContextualCfg& g, const ValueResults& values,
                         const EnergyModel& model);

}  // namespace wcea
