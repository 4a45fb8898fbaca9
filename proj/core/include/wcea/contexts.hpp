#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "wcea/cfg.hpp"

namespace wcea {

enum class LoopPhase : uint8_t { First, Rest };
enum class LoopContextMode : uint8_t { None, FirstRest };

// Analysis context: bounded call string (innermost call site last) plus one
// iteration phase per enclosing loop (outermost first) when first-rest mode
// is on.
struct Context {
  std::vector<uint32_t> call_string;
  std::vector<std::pair<int, LoopPhase>> phases;

  bool operator==(const Context&) const = default;
  bool operator<(const Context& o) const {
    if (call_string != o.call_string) return call_string < o.call_string;
    return phases < o.phases;
  }
};

struct CtxNode {
  int block = -1;
  int ctx = -1;
};

// cfg_edge == -1 marks a virtual exit edge: the program leaves the analyzed
// scope here (entry-routine return, or a dead end such as an opaque
// instruction). dst_node == -1 for those.
struct CtxEdge {
  int id = -1;
  int src_node = -1;
  int dst_node = -1;
  int cfg_edge = -1;
  bool taken_flag = false;
};

class ContextualCfg {
public:
  const Cfg& cfg() const { return *cfg_; }
  const std::vector<Context>& contexts() const { return contexts_; }
  const std::vector<CtxNode>& nodes() const { return nodes_; }
  const std::vector<CtxEdge>& edges() const { return edges_; }
  int entry_node() const { return entry_node_; }

  const CtxNode& node(int id) const { return nodes_.at(size_t(id)); }
  const CtxEdge& edge(int id) const { return edges_.at(size_t(id)); }
  const Context& context(int id) const { return contexts_.at(size_t(id)); }
  const BasicBlock& block_of(int node_id) const { return cfg_->block(node(node_id).block); }

  const std::vector<int>& out_edges(int node) const { return out_edges_.at(size_t(node)); }
  const std::vector<int>& in_edges(int node) const { return in_edges_.at(size_t(node)); }

  int find_node(int block, int ctx) const;

  // Nodes of one block across all contexts, ascending context id.
  const std::vector<int>& nodes_of_block(int block) const {
    return block_nodes_.at(size_t(block));
  }

  // Loop instances: one per (loop, surrounding context with the loop's own
  // phase stripped). The IPET loop constraints and the bound derivation both
  // work per instance.
  struct LoopInstance {
    int loop = -1;
    std::vector<int> header_nodes;
    std::vector<int> back_edges;   // ctx edge ids
    std::vector<int> entry_edges;  // ctx edge ids
  };
  const std::vector<LoopInstance>& loop_instances() const { return loop_instances_; }

private:
  friend ContextualCfg expand_contexts(const Cfg&, int, LoopContextMode);

  const Cfg* cfg_ = nullptr;
  std::vector<Context> contexts_;
  std::vector<CtxNode> nodes_;
  std::vector<CtxEdge> edges_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<std::vector<int>> block_nodes_;
  std::map<std::pair<int, int>, int> node_index_;
  std::vector<LoopInstance> loop_instances_;
  int entry_node_ = -1;
};

// Materializes (block, context) analysis nodes. Call strings are truncated
// to the k most recent sites; first-rest mode peels a separate copy of each
// loop's first iteration. Tail calls keep the caller's call string (the
// frame is replaced), so their returns match the original callers.
ContextualCfg expand_contexts(const Cfg& cfg, int k, LoopContextMode loop_mode);

}  // namespace wcea
