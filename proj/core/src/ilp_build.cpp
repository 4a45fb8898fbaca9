#include <functional>
#include <sstream>

#include "wcea/ipet.hpp"

namespace wcea {

namespace {

std::string hex(uint32_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

IpetProblem build_ipet(const ContextualCfg& g, const EventCosts& costs,
                       const IpetInputs& inputs) {
  IpetProblem out;
  IlpProblem& p = out.ilp;

  out.entry_var = p.add_var("entry", 0);
  out.node_var.resize(g.nodes().size());
  for (size_t n = 0; n < g.nodes().size(); n++) {
    const CtxNode& node = g.nodes()[n];
    std::string name =
        "n" + std::to_string(n) + "_b" + hex(g.cfg().block(node.block).start) + "_c" +
        std::to_string(node.ctx);
    out.node_var[n] = p.add_var(std::move(name), costs.node_costs[n].energy);
  }
  out.edge_var.resize(g.edges().size());
  for (size_t e = 0; e < g.edges().size(); e++) {
    out.edge_var[e] = p.add_var("e" + std::to_string(e), costs.edge_costs[e].energy);
  }

  // (a) unit entry.
  {
    LinConstraint c;
    c.name = "entry_once";
    c.terms.push_back({out.entry_var, 1});
    c.rel = Rel::Eq;
    c.rhs = 1;
    p.constraints.push_back(std::move(c));
  }

  // (b) flow conservation: node frequency equals the sum of incoming and of
  // outgoing context-edge frequencies. The virtual entry edge feeds the
  // entry node; virtual exit edges are ordinary variables.
  for (size_t n = 0; n < g.nodes().size(); n++) {
    LinConstraint in_c;
    in_c.name = "flow_in_n" + std::to_string(n);
    in_c.terms.push_back({out.node_var[n], 1});
    for (int eid : g.in_edges(int(n))) in_c.terms.push_back({out.edge_var[size_t(eid)], -1});
    if (int(n) == g.entry_node()) in_c.terms.push_back({out.entry_var, -1});
    in_c.rel = Rel::Eq;
    in_c.rhs = 0;
    p.constraints.push_back(std::move(in_c));

    LinConstraint out_c;
    out_c.name = "flow_out_n" + std::to_string(n);
    out_c.terms.push_back({out.node_var[n], 1});
    for (int eid : g.out_edges(int(n))) out_c.terms.push_back({out.edge_var[size_t(eid)], -1});
    out_c.rel = Rel::Eq;
    out_c.rhs = 0;
    p.constraints.push_back(std::move(out_c));
  }

  // (c) loop bounds per instance.
  const auto& instances = g.loop_instances();
  for (size_t i = 0; i < instances.size(); i++) {
    const auto& inst = instances[i];
    auto bit = inputs.loop_bounds.find(int(i));
    if (bit == inputs.loop_bounds.end()) {
      uint32_t head = g.cfg().block(g.cfg().loop(inst.loop).header).start;
      throw UnboundedLoopError("loop at 0x" + hex(head) + " has no bound", head);
    }
    const LoopBound& b = bit->second;

    std::vector<LinTerm> entries;
    for (int eid : inst.entry_edges) entries.push_back({out.edge_var[size_t(eid)], 1});
    for (int hn : inst.header_nodes)
      if (hn == g.entry_node()) entries.push_back({out.entry_var, 1});

    LinConstraint maxc;
    maxc.name = "loop" + std::to_string(inst.loop) + "_i" + std::to_string(i) + "_max";
    for (int eid : inst.back_edges) maxc.terms.push_back({out.edge_var[size_t(eid)], 1});
    for (const LinTerm& t : entries) maxc.terms.push_back({t.var, -Rat(rat_of(b.max))});
    maxc.rel = Rel::Le;
    maxc.rhs = 0;
    p.constraints.push_back(std::move(maxc));

    if (b.min > 0) {
      LinConstraint minc;
      minc.name = "loop" + std::to_string(inst.loop) + "_i" + std::to_string(i) + "_min";
      for (int eid : inst.back_edges) minc.terms.push_back({out.edge_var[size_t(eid)], 1});
      for (const LinTerm& t : entries) minc.terms.push_back({t.var, -Rat(rat_of(b.min))});
      minc.rel = Rel::Ge;
      minc.rhs = 0;
      p.constraints.push_back(std::move(minc));
    }
  }

  // (d) user flow constraints, verbatim.
  int flow_index = 0;
  for (const FlowConstraintAnn& fc : inputs.flow_constraints) {
    LinConstraint c;
    c.name = "user_flow" + std::to_string(flow_index++);
    auto add_side = [&](const FlowExpr& expr, int sign) {
      for (const auto& [coef, addr] : expr.terms) {
        bool any = false;
        for (const BasicBlock& bb : g.cfg().blocks()) {
          if (addr < bb.start || addr >= bb.end) continue;
          for (int nid : g.nodes_of_block(bb.id)) {
            c.terms.push_back({out.node_var[size_t(nid)], coef * sign});
            any = true;
          }
        }
        if (!any)
          throw AnalysisError("flow constraint references 0x" + hex(addr) +
                              " which is not inside any block");
      }
    };
    add_side(fc.lhs, 1);
    add_side(fc.rhs, -1);
    switch (fc.rel) {
      case FlowRel::Le: c.rel = Rel::Le; break;
      case FlowRel::Eq: c.rel = Rel::Eq; break;
      case FlowRel::Ge: c.rel = Rel::Ge; break;
    }
    c.rhs = fc.rhs.constant - fc.lhs.constant;
    p.constraints.push_back(std::move(c));
  }

  // (e) infeasible variables pinned to zero.
  for (int n : inputs.infeasible_nodes) {
    LinConstraint c;
    c.name = "infeasible_n" + std::to_string(n);
    c.terms.push_back({out.node_var[size_t(n)], 1});
    c.rel = Rel::Eq;
    c.rhs = 0;
    p.constraints.push_back(std::move(c));
  }
  for (int e : inputs.infeasible_edges) {
    LinConstraint c;
    c.name = "infeasible_e" + std::to_string(e);
    c.terms.push_back({out.edge_var[size_t(e)], 1});
    c.rel = Rel::Eq;
    c.rhs = 0;
    p.constraints.push_back(std::move(c));
  }

  // (f) recursion depth: inside one call-graph cycle component, recursive
  // call-edge traversals are bounded by (depth - 1) activations per entry
  // from outside.
  {
    const Cfg& cfg = g.cfg();
    size_t nr = cfg.routines().size();
    // Tarjan-free SCC via Kosaraju on the tiny call graph.
    std::vector<std::set<int>> succ(nr), pred(nr);
    for (const CfgEdge& e : cfg.edges()) {
      if (e.kind != EdgeKind::Call) continue;
      int a = cfg.block(e.src).routine;
      int b = cfg.block(e.dst).routine;
      succ[size_t(a)].insert(b);
      pred[size_t(b)].insert(a);
    }
    std::vector<int> order;
    std::vector<bool> seen(nr, false);
    std::function<void(int)> dfs1 = [&](int u) {
      seen[size_t(u)] = true;
      for (int v : succ[size_t(u)])
        if (!seen[size_t(v)]) dfs1(v);
      order.push_back(u);
    };
    for (size_t r = 0; r < nr; r++)
      if (!seen[r]) dfs1(int(r));
    std::vector<int> comp(nr, -1);
    int ncomp = 0;
    std::function<void(int, int)> dfs2 = [&](int u, int c) {
      comp[size_t(u)] = c;
      for (int v : pred[size_t(u)])
        if (comp[size_t(v)] == -1) dfs2(v, c);
    };
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (comp[size_t(*it)] == -1) dfs2(*it, ncomp++);

    for (int c = 0; c < ncomp; c++) {
      std::vector<int> members;
      for (size_t r = 0; r < nr; r++)
        if (comp[r] == c) members.push_back(int(r));
      bool cyclic = members.size() > 1;
      for (int r : members)
        if (succ[size_t(r)].count(r)) cyclic = true;
      if (!cyclic) continue;
      uint64_t depth = 0;
      bool have_depth = false;
      for (int r : members) {
        auto it = inputs.recursion_depths.find(r);
        if (it != inputs.recursion_depths.end()) {
          depth = std::max(depth, it->second);
          have_depth = true;
        }
      }
      if (!have_depth)
        throw AnalysisError("recursive call cycle without a depth annotation (routine at 0x" +
                            hex(cfg.routine(members.front()).entry_addr) + ")");

      LinConstraint rc;
      rc.name = "recursion_c" + std::to_string(c);
      for (const CtxEdge& e : g.edges()) {
        if (e.cfg_edge < 0) continue;
        const CfgEdge& ce = cfg.edge(e.cfg_edge);
        if (ce.kind != EdgeKind::Call) continue;
        int from = cfg.block(ce.src).routine;
        int to = cfg.block(ce.dst).routine;
        bool from_in = comp[size_t(from)] == c;
        bool to_in = comp[size_t(to)] == c;
        if (from_in && to_in) {
          rc.terms.push_back({out.edge_var[size_t(e.id)], 1});
        } else if (!from_in && to_in) {
          rc.terms.push_back({out.edge_var[size_t(e.id)], -Rat(rat_of(depth - 1))});
        }
      }
      // The program entry activates its component from outside.
      if (comp[size_t(cfg.block(g.nodes()[size_t(g.entry_node())].block).routine)] == c)
        rc.terms.push_back({out.entry_var, -Rat(rat_of(depth - 1))});
      rc.rel = Rel::Le;
      rc.rhs = 0;
      p.constraints.push_back(std::move(rc));
    }
  }

  return out;
}

}  // namespace wcea
