#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "wcea/contexts.hpp"
#include "wcea/errors.hpp"

namespace wcea {

namespace {

// Loops beyond this nesting depth share one context (no phase tag).
constexpr int kMaxPhaseDepth = 8;

using CallString = std::vector<uint32_t>;

struct Expander {
  const Cfg& cfg;
  int k;
  LoopContextMode mode;
  ContextualCfg out;

  std::map<Context, int> intern_map;
  // Continuation descriptors per (routine, call string): where the routine's
  // returns resume.
  struct Cont {
    int block;
    int ctx;
    bool operator<(const Cont& o) const { return std::tie(block, ctx) < std::tie(o.block, o.ctx); }
  };
  std::map<std::pair<int, CallString>, std::set<Cont>> cont_map;
  // Tail forwarding: continuations of key flow into each listed (routine, string).
  std::map<std::pair<int, CallString>, std::set<std::pair<int, CallString>>> tail_fwd;
  std::map<std::pair<int, CallString>, std::set<int>> return_nodes;
  std::set<std::pair<int, int>> emitted_returns;  // (ret node, cont node)
  std::deque<int> work;

  Expander(const Cfg& c, int k_, LoopContextMode m) : cfg(c), k(k_), mode(m) {}

  int intern(const Context& c) {
    auto it = intern_map.find(c);
    if (it != intern_map.end()) return it->second;
    int id = int(out.contexts_.size());
    out.contexts_.push_back(c);
    intern_map.emplace(c, id);
    return id;
  }

  int get_node(int block, int ctx) {
    auto it = out.node_index_.find({block, ctx});
    if (it != out.node_index_.end()) return it->second;
    int id = int(out.nodes_.size());
    out.nodes_.push_back({block, ctx});
    out.node_index_.emplace(std::make_pair(block, ctx), id);
    work.push_back(id);
    return id;
  }

  int add_edge(int src_node, int dst_node, int cfg_edge, bool taken) {
    CtxEdge e;
    e.id = int(out.edges_.size());
    e.src_node = src_node;
    e.dst_node = dst_node;
    e.cfg_edge = cfg_edge;
    e.taken_flag = taken;
    out.edges_.push_back(e);
    return e.id;
  }

  // Loop chain containing a block, outermost first.
  std::vector<int> loop_chain(int block) const {
    std::vector<int> chain;
    for (int l = cfg.loop_of(block); l != -1; l = cfg.loop(l).parent) chain.push_back(l);
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  std::vector<std::pair<int, LoopPhase>> target_phases(const Context& src_ctx, int src_block,
                                                       int dst_block, const CfgEdge* e) const {
    std::vector<std::pair<int, LoopPhase>> phases;
    if (mode != LoopContextMode::FirstRest) return phases;
    auto chain = loop_chain(dst_block);
    int depth = 0;
    for (int l : chain) {
      if (depth++ >= kMaxPhaseDepth) break;
      bool src_inside = src_block >= 0 && cfg.loop_contains(l, src_block);
      LoopPhase phase = LoopPhase::First;
      if (src_inside) {
        // Keep the phase the source carried, unless this edge closes the
        // loop, which moves it to Rest.
        phase = LoopPhase::Rest;
        bool is_back = false;
        if (e) {
          const Loop& loop = cfg.loop(l);
          is_back = std::find(loop.back_edge_ids.begin(), loop.back_edge_ids.end(), e->id) !=
                    loop.back_edge_ids.end();
        }
        if (!is_back) {
          auto it = std::find_if(src_ctx.phases.begin(), src_ctx.phases.end(),
                                 [&](const auto& p) { return p.first == l; });
          phase = it != src_ctx.phases.end() ? it->second : LoopPhase::First;
        }
      }
      phases.emplace_back(l, phase);
    }
    return phases;
  }

  CallString truncate(CallString s) const {
    if (int(s.size()) > k) s.erase(s.begin(), s.end() - k);
    return s;
  }

  void add_continuation(int routine, const CallString& str, Cont c) {
    auto key = std::make_pair(routine, str);
    if (!cont_map[key].insert(c).second) return;
    // Returns already instantiated for this key get their edge now.
    for (int rn : return_nodes[key]) emit_return(rn, c);
    // Forward through tail chains.
    for (const auto& fwd : tail_fwd[key]) add_continuation(fwd.first, fwd.second, c);
  }

  void link_tail(int from_routine, const CallString& from_str, int to_routine,
                 const CallString& to_str) {
    auto from_key = std::make_pair(from_routine, from_str);
    auto to_key = std::make_pair(to_routine, to_str);
    if (!tail_fwd[from_key].insert(to_key).second) return;
    for (const Cont& c : cont_map[from_key]) add_continuation(to_routine, to_str, c);
  }

  void emit_return(int ret_node, const Cont& c) {
    int cont_node = get_node(c.block, c.ctx);
    if (!emitted_returns.insert({ret_node, cont_node}).second) return;
    // The underlying return CFG edge, if present, for event conventions.
    int cfg_edge = -1;
    int ret_block = out.nodes_[size_t(ret_node)].block;
    for (int eid : cfg.out_edges(ret_block)) {
      const CfgEdge& e = cfg.edge(eid);
      if (e.kind == EdgeKind::Return && e.dst == c.block) {
        cfg_edge = eid;
        break;
      }
    }
    add_edge(ret_node, cont_node, cfg_edge, /*taken=*/true);
  }

  void process(int node_id) {
    const CtxNode n = out.nodes_[size_t(node_id)];
    const BasicBlock& bb = cfg.block(n.block);
    const Context ctx = out.contexts_[size_t(n.ctx)];
    int routine = bb.routine;

    bool is_return_block = bb.terminator().kind == InstrKind::Return;
    if (is_return_block) {
      auto key = std::make_pair(routine, ctx.call_string);
      return_nodes[key].insert(node_id);
      for (const Cont& c : cont_map[key]) emit_return(node_id, c);
      return;
    }

    for (int eid : cfg.out_edges(n.block)) {
      const CfgEdge& e = cfg.edge(eid);
      switch (e.kind) {
        case EdgeKind::FallThrough:
        case EdgeKind::Taken: {
          Context dst_ctx;
          dst_ctx.call_string = ctx.call_string;
          dst_ctx.phases = target_phases(ctx, n.block, e.dst, &e);
          int dst = get_node(e.dst, intern(dst_ctx));
          add_edge(node_id, dst, eid, e.taken_flag);
          break;
        }
        case EdgeKind::Call: {
          int callee_routine = cfg.block(e.dst).routine;
          Context callee_ctx;
          if (e.tail_call) {
            callee_ctx.call_string = ctx.call_string;
            link_tail(routine, ctx.call_string, callee_routine, callee_ctx.call_string);
          } else {
            CallString s = ctx.call_string;
            s.push_back(bb.terminator().addr);
            callee_ctx.call_string = truncate(std::move(s));
            add_continuation(callee_routine, callee_ctx.call_string,
                             Cont{e.continuation, n.ctx});
          }
          callee_ctx.phases = target_phases(ctx, -1, e.dst, nullptr);
          int dst = get_node(e.dst, intern(callee_ctx));
          add_edge(node_id, dst, eid, e.taken_flag);
          break;
        }
        case EdgeKind::Return:
          break;  // handled via cont_map above
      }
    }
  }

  void finish_exits() {
    // Nodes with no outgoing context edges leave the analyzed scope: entry
    // routine returns (taken branch executes) and opaque dead ends.
    std::vector<int> out_degree(out.nodes_.size(), 0);
    for (const CtxEdge& e : out.edges_) out_degree[size_t(e.src_node)]++;
    size_t count = out.nodes_.size();
    for (size_t i = 0; i < count; i++) {
      if (out_degree[i] > 0) continue;
      const BasicBlock& bb = cfg.block(out.nodes_[i].block);
      bool is_return = bb.terminator().kind == InstrKind::Return;
      add_edge(int(i), -1, -1, is_return);
    }
  }

  void build_loop_instances() {
    // Instance key: loop id plus the header context with the loop's own
    // phase removed.
    std::map<std::pair<int, Context>, int> index;
    auto strip = [](Context c, int loop) {
      std::erase_if(c.phases, [&](const auto& p) { return p.first == loop; });
      return c;
    };
    auto instance_of = [&](int loop, const Context& header_ctx) {
      auto key = std::make_pair(loop, strip(header_ctx, loop));
      auto it = index.find(key);
      if (it != index.end()) return it->second;
      int id = int(out.loop_instances_.size());
      ContextualCfg::LoopInstance inst;
      inst.loop = loop;
      out.loop_instances_.push_back(std::move(inst));
      index.emplace(key, id);
      return id;
    };

    for (const CtxEdge& e : out.edges_) {
      if (e.cfg_edge < 0 || e.dst_node < 0) continue;
      const CfgEdge& ce = cfg.edge(e.cfg_edge);
      for (const Loop& l : cfg.loops()) {
        bool is_back = std::find(l.back_edge_ids.begin(), l.back_edge_ids.end(), ce.id) !=
                       l.back_edge_ids.end();
        bool is_entry = std::find(l.entry_edge_ids.begin(), l.entry_edge_ids.end(), ce.id) !=
                        l.entry_edge_ids.end();
        if (!is_back && !is_entry) continue;
        const Context& hdr_ctx = out.contexts_[size_t(out.nodes_[size_t(e.dst_node)].ctx)];
        int inst = instance_of(l.id, hdr_ctx);
        if (is_back)
          out.loop_instances_[size_t(inst)].back_edges.push_back(e.id);
        else
          out.loop_instances_[size_t(inst)].entry_edges.push_back(e.id);
      }
    }
    for (auto& inst : out.loop_instances_) {
      const Loop& l = cfg.loop(inst.loop);
      Context strip_key;
      // Header nodes belonging to this instance: match on stripped context.
      for (const auto& [key, id] : index) {
        if (&out.loop_instances_[size_t(id)] != &inst) continue;
        strip_key = key.second;
      }
      for (int nid : out.block_nodes_.empty() ? std::vector<int>{} : out.block_nodes_[size_t(l.header)]) {
        Context c = out.contexts_[size_t(out.nodes_[size_t(nid)].ctx)];
        std::erase_if(c.phases, [&](const auto& p) { return p.first == l.id; });
        if (c == strip_key) inst.header_nodes.push_back(nid);
      }
    }
  }

  ContextualCfg run() {
    out.cfg_ = &cfg;
    Context entry_ctx;
    entry_ctx.phases = target_phases(entry_ctx, -1, cfg.entry_block(), nullptr);
    out.entry_node_ = get_node(cfg.entry_block(), intern(entry_ctx));
    while (!work.empty()) {
      int n = work.front();
      work.pop_front();
      process(n);
    }
    finish_exits();

    out.out_edges_.assign(out.nodes_.size(), {});
    out.in_edges_.assign(out.nodes_.size(), {});
    for (const CtxEdge& e : out.edges_) {
      out.out_edges_[size_t(e.src_node)].push_back(e.id);
      if (e.dst_node >= 0) out.in_edges_[size_t(e.dst_node)].push_back(e.id);
    }
    out.block_nodes_.assign(cfg.blocks().size(), {});
    for (const CtxNode& n : out.nodes_)
      out.block_nodes_[size_t(n.block)].push_back(
          int(&n - out.nodes_.data()));

    build_loop_instances();
    return std::move(out);
  }
};

}  // namespace

int ContextualCfg::find_node(int block, int ctx) const {
  auto it = node_index_.find({block, ctx});
  return it == node_index_.end() ? -1 : it->second;
}

ContextualCfg expand_contexts(const Cfg& cfg, int k, LoopContextMode loop_mode) {
  if (k < 0) throw Error("context depth must be >= 0");
  Expander e(cfg, k, loop_mode);
  return e.run();
}

}  // namespace wcea
