#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "wcea/annotations.hpp"
#include "wcea/contexts.hpp"
#include "wcea/interval.hpp"
#include "wcea/memory.hpp"

namespace wcea {

// What a flags fact can support. Cmp facts (CMP, SUBS, RSBS) carry full
// compare(a, b) semantics including unsigned conditions; AddZero (ADDS, CMN)
// supports the signed conditions of the sum against zero; NzOnly (MOVS,
// logicals, shifts, MULS) only the N/Z conditions of the result.
enum class FactKind : uint8_t { Unknown, Cmp, AddZero, NzOnly };

// Relational flag summary: flags = compare(a, b). Register slots say which
// registers still hold the compared values, so guard edges can refine them;
// rres holds the register with the subtraction result when there is one.
struct FlagsFact {
  FactKind kind = FactKind::Unknown;
  int8_t ra = -1, rb = -1, rres = -1;
  Interval a, b;

  bool valid() const { return kind != FactKind::Unknown; }
  static FlagsFact unknown() { return {}; }
  bool operator==(const FlagsFact&) const = default;
};

// Register file and tracked memory for one program point. Tracked memory
// maps concrete word addresses (statics and stack slots while sp is
// precise); a write through an unknown pointer smashes the map. Reads fall
// back to load-time image contents until the first smash.
struct AbstractState {
  std::array<Interval, 15> regs;  // r0..r12, sp=13, lr=14
  FlagsFact flags;
  std::map<uint32_t, Interval> mem;
  bool ram_smashed = false;
  bool bottom = true;  // default-constructed state is unreachable

  static AbstractState initial(uint32_t sp);

  Interval reg(int r) const { return r >= 0 && r < 15 ? regs[size_t(r)] : Interval::top(); }
  void set_reg(int r, const Interval& v) {
    if (r >= 0 && r < 15) regs[size_t(r)] = v;
  }

  AbstractState join(const AbstractState& o) const;
  bool operator==(const AbstractState&) const = default;
};

struct LoopBound {
  uint64_t min = 0;
  uint64_t max = 0;
  BoundProvenance provenance = BoundProvenance::Analysis;
};

struct ValueAnalysisConfig {
  int widen_after = 3;        // joins at a loop head before widening kicks in
  int max_visits = 1000;      // fixpoint divergence guard, asserted
  uint64_t max_unroll = 4096; // bounded abstract unrolling for loop bounds
  uint32_t initial_sp = 0;    // 0 = top (unknown stack pointer)
};

struct ValueResults {
  // Per context node: state at block entry.
  std::vector<AbstractState> in_states;
  // Access classification per (node, instruction address).
  std::map<std::pair<int, uint32_t>, AddressClass> access_class;
  // Derived bounds per loop instance index (see ContextualCfg); absent when
  // the analysis could not bound the loop.
  std::map<int, LoopBound> loop_bounds;
  // Context edges whose guard is definitely false.
  std::set<int> infeasible_edges;
};

// Interval abstract interpretation over the contextual CFG: fixpoint with
// threshold widening and one narrowing pass, guard refinement on branch
// edges, access-region classification, and loop bounds by bounded abstract
// unrolling per loop instance. Imprecision degrades to top, never to an
// error.
ValueResults analyze(const ContextualCfg& ctx_cfg, const MemoryImage& image,
                     const AnnotationSet& annotations, const ValueAnalysisConfig& config = {});

// Bound selection with the documented precedence: annotation overrides
// analysis overrides trace. Throws UnboundedLoopError when nothing is known.
LoopBound bound_for(const ContextualCfg& ctx_cfg, int loop_instance, const ValueResults& results,
                    const AnnotationSet& annotations);

}  // namespace wcea
