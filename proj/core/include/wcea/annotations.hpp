#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wcea/memory.hpp"
#include "wcea/rational.hpp"

namespace wcea {

enum class BoundProvenance : uint8_t { Analysis, Annotation, Trace };

const char* to_string(BoundProvenance p);

struct LoopBoundAnn {
  uint64_t min = 0;
  uint64_t max = 0;
  BoundProvenance provenance = BoundProvenance::Annotation;
};

enum class FlowRel : uint8_t { Le, Eq, Ge };

// One side of a flow constraint: sum of coef * sum(block <addr>) plus a
// constant. Addresses are resolved to analysis variables at ILP build time.
struct FlowExpr {
  std::vector<std::pair<Rat, uint32_t>> terms;  // coefficient, block address
  Rat constant = 0;
};

struct FlowConstraintAnn {
  FlowExpr lhs;
  FlowRel rel = FlowRel::Le;
  FlowExpr rhs;
  std::string text;  // original statement, for reports
};

// Parsed annotation file. Addresses refer to instruction/block start
// addresses in the analyzed image; symbols are resolved against the image
// symbol table by the consumer.
struct AnnotationSet {
  std::optional<uint32_t> entry_addr;
  std::optional<std::string> entry_symbol;
  std::map<uint32_t, LoopBoundAnn> loop_bounds;              // loop head address
  std::map<uint32_t, std::vector<uint32_t>> indirect_targets;  // instr addr -> targets
  std::vector<FlowConstraintAnn> flow_constraints;
  std::set<uint32_t> infeasible;                     // block addresses forced to 0
  std::map<uint32_t, AddressClass> region_facts;     // instr addr -> forced access class
  std::map<std::string, uint64_t> recursion_depths;  // routine symbol -> max activations

  bool empty() const {
    return !entry_addr && !entry_symbol && loop_bounds.empty() && indirect_targets.empty() &&
           flow_constraints.empty() && infeasible.empty() && region_facts.empty() &&
           recursion_depths.empty();
  }

  // Trace-derived facts never override explicit annotations.
  void merge_trace_facts(const AnnotationSet& trace);
};

// Parses the textual annotation language:
//
//   entry <addr|symbol>;
//   loop <addr> bound <min>..<max>;
//   target <addr> = <addr>[, <addr>]*;
//   infeasible <addr>;
//   flow <linexpr> <= <linexpr>;          (also >= and =)
//   region <addr> = flash|ram;
//   recursion <symbol> depth <n>;
//
// linexpr is a sum of terms `[coef *] sum(block <addr>)` or bare constants;
// coefficients are rational ("3", "0.5", "1/3"). Unknown keys are errors.
// Throws AnnotationError with line/column on syntax errors.
AnnotationSet parse_annotations(const std::string& text);

}  // namespace wcea
