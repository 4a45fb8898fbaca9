#pragma once

#include <map>
#include <set>

#include "wcea/annotations.hpp"
#include "wcea/contexts.hpp"
#include "wcea/event_analysis.hpp"
#include "wcea/ilp.hpp"
#include "wcea/value_analysis.hpp"

namespace wcea {

struct IpetInputs {
  // Final bound per loop instance index; every instance must be covered.
  std::map<int, LoopBound> loop_bounds;
  std::vector<FlowConstraintAnn> flow_constraints;
  std::set<int> infeasible_nodes;  // ctx node ids fixed to zero
  std::set<int> infeasible_edges;  // ctx edge ids fixed to zero
  std::map<int, uint64_t> recursion_depths;  // routine id -> max activations
};

struct IpetProblem {
  IlpProblem ilp;
  int entry_var = -1;           // virtual entry edge, fixed to 1
  std::vector<int> node_var;    // ctx node id -> variable
  std::vector<int> edge_var;    // ctx edge id -> variable
};

// Translates the contextual CFG with its block/edge energies into the path
// ILP: entry frequency one, flow conservation per node, back-edge frequency
// bounded by loop bounds times entry-edge frequency, user flow constraints
// verbatim, infeasible variables fixed to zero, recursion depth constraints
// per call-graph cycle. Objective: total energy, maximized.
IpetProblem build_ipet(const ContextualCfg& g, const EventCosts& costs, const IpetInputs& inputs);

}  // namespace wcea
