#include "wcea/event_analysis.hpp"

#include "wcea/errors.hpp"

namespace wcea {

namespace {

// Loads and stores move one element per instruction, except the multiple
// forms which move reg_count words.
uint64_t transfer_count(const Instr& i) { return i.reg_count ? uint64_t(*i.reg_count) : 1; }

}  // namespace

EventVector count_events_block(const ContextualCfg& g, int node, const ValueResults& values) {
  using namespace counters;
  EventVector ev;
  ev[kInsnNonMul] = 0;
  ev[kRamReads] = 0;
  ev[kRamWrites] = 0;
  ev[kFlashReads] = 0;
  ev[kTakenBranches] = 0;
  ev[kMuls] = 0;

  const BasicBlock& bb = g.block_of(node);
  for (const Instr& i : bb.instrs) {
    if (i.kind == InstrKind::Multiply)
      ev[kMuls]++;
    else
      ev[kInsnNonMul]++;

    if (!i.is_load() && !i.is_store()) continue;
    AddressClass cls = AddressClass::Unmapped;
    auto it = values.access_class.find({node, i.addr});
    if (it != values.access_class.end()) cls = it->second;

    uint64_t n = transfer_count(i);
    if (i.is_load()) {
      // POP with PC fetches the return address too; it is a stack (RAM) read
      // like the rest of the list.
      if (cls == AddressClass::Ram)
        ev[kRamReads] += n;
      else if (cls == AddressClass::Flash)
        ev[kFlashReads] += n;
      else
        ev[kFlashReads] += n;  // worst coefficient for unknown/device
    } else {
      ev[kRamWrites] += n;  // the only write counter
    }
  }
  return ev;
}

EventVector count_events_edge(const CtxEdge& edge) {
  using namespace counters;
  EventVector ev;
  ev[kTakenBranches] = edge.taken_flag ? 1 : 0;
  return ev;
}

EventCosts compute_costs(const ContextualCfg& g, const ValueResults& values,
                         const EnergyModel& model) {
  if (model.mode != ModelMode::StaticCapable)
    throw ModelError("model '" + model.name + "' is replay-only and cannot price static analysis");

  EventCosts costs;
  costs.node_costs.resize(g.nodes().size());
  costs.edge_costs.resize(g.edges().size());

  for (size_t n = 0; n < g.nodes().size(); n++) {
    BlockCost c;
    c.node = int(n);
    c.events = count_events_block(g, int(n), values);
    c.energy = price(c.events, model);
    costs.node_costs[n] = std::move(c);

    const BasicBlock& bb = g.block_of(int(n));
    for (const Instr& i : bb.instrs) {
      if (!i.is_load() && !i.is_store()) continue;
      auto it = values.access_class.find({int(n), i.addr});
      AddressClass cls = it == values.access_class.end() ? AddressClass::Unmapped : it->second;
      if (cls != AddressClass::Ram && cls != AddressClass::Flash)
        costs.worst_case_accesses.emplace_back(int(n), i.addr, cls);
    }
  }
  for (size_t e = 0; e < g.edges().size(); e++) {
    EdgeCost c;
    c.edge = int(e);
    c.events = count_events_edge(g.edges()[e]);
    c.energy = price(c.events, model);
    costs.edge_costs[e] = std::move(c);
  }
  return costs;
}

}  // namespace wcea
