#include <algorithm>
#include <climits>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "wcea/cfg.hpp"
#include "wcea/decoder.hpp"
#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::FallThrough: return "fallthrough";
    case EdgeKind::Taken: return "taken";
    case EdgeKind::Call: return "call";
    case EdgeKind::Return: return "return";
  }
  return "?";
}

namespace {

std::string hex(uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

// Per-routine discovery product before block splitting.
struct RoutineScan {
  uint32_t entry;
  std::map<uint32_t, Instr> instrs;   // keyed by start address
  std::set<uint32_t> leaders;
  // Pending interprocedural facts, resolved once all routines exist.
  struct CallSite {
    uint32_t at;                  // call instruction address
    std::vector<uint32_t> callees;
    uint32_t continuation;        // next instr address; ~0u for tail calls
    bool tail;
  };
  std::vector<CallSite> calls;
};

class Builder {
public:
  Builder(const MemoryImage& image, uint32_t entry, const AnnotationSet& ann)
      : image_(image), entry_(entry & ~1u), ann_(ann) {}

  Cfg build();

private:
  RoutineScan scan_routine(uint32_t entry);
  void make_blocks(Cfg& cfg, const RoutineScan& scan, int routine_id);
  void connect_routine(Cfg& cfg, const RoutineScan& scan, int routine_id);
  void match_returns(Cfg& cfg);
  void check_recursion(Cfg& cfg);
  void find_loops(Cfg& cfg, int routine_id);
  void classify_return_edges_for_loops(Cfg& cfg);

  std::vector<uint32_t> indirect_targets(uint32_t at) const {
    auto it = ann_.indirect_targets.find(at);
    if (it == ann_.indirect_targets.end())
      throw CfgError("unresolved indirect branch or call at " + hex(at) +
                     " (add a 'target' annotation)");
    return it->second;
  }

  const MemoryImage& image_;
  uint32_t entry_;
  const AnnotationSet& ann_;

  std::map<uint32_t, int> routine_ids_;             // entry addr -> routine index
  std::vector<RoutineScan> scans_;
  std::map<std::pair<int, uint32_t>, int> block_at_;  // (routine, start addr) -> block id
};

RoutineScan Builder::scan_routine(uint32_t entry) {
  RoutineScan scan;
  scan.entry = entry;
  scan.leaders.insert(entry);
  std::deque<uint32_t> work{entry};
  std::set<uint32_t> starts;

  auto is_inside_existing = [&](uint32_t addr) {
    auto it = scan.instrs.upper_bound(addr);
    if (it == scan.instrs.begin()) return false;
    --it;
    return it->first != addr && addr < it->first + it->second.size;
  };

  while (!work.empty()) {
    uint32_t addr = work.front();
    work.pop_front();
    if (starts.count(addr)) continue;
    if (is_inside_existing(addr))
      throw CfgError("branch into the middle of an instruction at " + hex(addr));

    while (true) {
      if (starts.count(addr)) break;  // fell into known code
      Instr i;
      try {
        i = decode_one(image_, addr);
      } catch (const DecodeError& e) {
        throw CfgError(std::string("decode failed at ") + hex(addr) + ": " + e.what());
      } catch (const AddressError& e) {
        throw CfgError(std::string("bad instruction address ") + hex(addr) + ": " + e.what());
      }
      starts.insert(addr);
      uint32_t next = addr + i.size;
      scan.instrs[addr] = i;

      if (!i.is_terminator()) {
        addr = next;
        if (is_inside_existing(addr))
          throw CfgError("instruction stream overlaps existing code at " + hex(addr));
        continue;
      }

      switch (i.kind) {
        case InstrKind::BranchCond:
          scan.leaders.insert(i.target);
          scan.leaders.insert(next);
          work.push_back(i.target);
          work.push_back(next);
          break;
        case InstrKind::BranchUncond:
          if (i.has_target) {
            scan.leaders.insert(i.target);
            work.push_back(i.target);
          } else if (i.mnem == Mnemonic::BX) {
            // Tail call through a register; targets become routines.
            scan.calls.push_back({addr, indirect_targets(addr), ~0u, true});
          } else {
            // MOV/ADD PC, Rm: jump table inside this routine.
            for (uint32_t t : indirect_targets(addr)) {
              t &= ~1u;
              scan.leaders.insert(t);
              work.push_back(t);
            }
          }
          break;
        case InstrKind::Call: {
          std::vector<uint32_t> callees;
          if (i.has_target)
            callees.push_back(i.target);
          else
            callees = indirect_targets(addr);
          scan.calls.push_back({addr, std::move(callees), next, false});
          scan.leaders.insert(next);
          work.push_back(next);  // continuation is reachable through the return
          break;
        }
        case InstrKind::Return:
          break;
        default:
          // Analysis-opaque terminator (SVC, BKPT, WFI, WFE): treated as
          // leaving the analyzed scope; the driver reports a warning.
          break;
      }
      break;
    }
  }
  return scan;
}

void Builder::make_blocks(Cfg& cfg, const RoutineScan& scan, int routine_id) {
  Routine& routine = cfg.routines_[size_t(routine_id)];
  auto it = scan.instrs.begin();
  while (it != scan.instrs.end()) {
    BasicBlock bb;
    bb.id = int(cfg.blocks_.size());
    bb.routine = routine_id;
    bb.start = it->first;
    uint32_t addr = it->first;
    for (;;) {
      const Instr& i = it->second;
      bb.instrs.push_back(i);
      addr = i.addr + i.size;
      ++it;
      if (i.is_terminator()) break;
      if (it == scan.instrs.end() || it->first != addr) break;  // gap
      if (scan.leaders.count(addr)) break;                      // split point
    }
    bb.end = addr;
    block_at_[{routine_id, bb.start}] = bb.id;
    routine.blocks.push_back(bb.id);
    if (bb.terminator().kind == InstrKind::Return) routine.return_blocks.push_back(bb.id);
    cfg.blocks_.push_back(std::move(bb));
  }
  routine.entry_block = block_at_.at({routine_id, scan.entry});
}

void Builder::connect_routine(Cfg& cfg, const RoutineScan& scan, int routine_id) {
  auto add_edge = [&](int src, int dst, EdgeKind kind, bool taken, bool tail = false,
                      int continuation = -1) {
    CfgEdge e;
    e.id = int(cfg.edges_.size());
    e.src = src;
    e.dst = dst;
    e.kind = kind;
    e.taken_flag = taken;
    e.tail_call = tail;
    e.continuation = continuation;
    cfg.edges_.push_back(e);
  };

  auto block_of = [&](uint32_t addr) -> int {
    auto it = block_at_.find({routine_id, addr});
    if (it == block_at_.end())
      throw CfgError("internal: no block at " + hex(addr) + " in routine " +
                     std::to_string(routine_id));
    return it->second;
  };

  std::map<uint32_t, const RoutineScan::CallSite*> call_at;
  for (const auto& c : scan.calls) call_at[c.at] = &c;

  for (int bid : cfg.routines_[size_t(routine_id)].blocks) {
    const BasicBlock& bb = cfg.blocks_[size_t(bid)];
    const Instr& t = bb.terminator();
    uint32_t next = bb.end;
    switch (t.kind) {
      case InstrKind::BranchCond:
        add_edge(bid, block_of(t.target), EdgeKind::Taken, true);
        add_edge(bid, block_of(next), EdgeKind::FallThrough, false);
        break;
      case InstrKind::BranchUncond:
        if (t.has_target) {
          add_edge(bid, block_of(t.target), EdgeKind::Taken, true);
        } else if (t.mnem == Mnemonic::BX) {
          const auto* c = call_at.at(t.addr);
          for (uint32_t callee : c->callees) {
            int callee_routine = routine_ids_.at(callee & ~1u);
            add_edge(bid, cfg.routines_[size_t(callee_routine)].entry_block, EdgeKind::Call,
                     true, /*tail=*/true);
          }
        } else {
          for (uint32_t target : indirect_targets(t.addr))
            add_edge(bid, block_of(target & ~1u), EdgeKind::Taken, true);
        }
        break;
      case InstrKind::Call: {
        const auto* c = call_at.at(t.addr);
        int continuation = block_of(c->continuation);
        for (uint32_t callee : c->callees) {
          int callee_routine = routine_ids_.at(callee & ~1u);
          add_edge(bid, cfg.routines_[size_t(callee_routine)].entry_block, EdgeKind::Call,
                   true, /*tail=*/false, continuation);
        }
        break;
      }
      case InstrKind::Return:
        break;  // matched later
      default:
        if (t.is_terminator()) break;  // opaque dead end
        add_edge(bid, block_of(next), EdgeKind::FallThrough, false);
        break;
    }
  }
}

// Return edges: every return block of a routine connects to the continuation
// of every call site of that routine. Tail calls forward the caller's
// continuations (the frame was replaced, LR still names the original
// caller). Context expansion narrows these to the matching call string.
void Builder::match_returns(Cfg& cfg) {
  size_t n_routines = cfg.routines_.size();
  std::vector<std::set<int>> continuations(n_routines);
  // (from, to) pairs of tail calls for forwarding
  std::vector<std::pair<int, int>> tail_links;

  size_t base_edges = cfg.edges_.size();
  for (size_t ei = 0; ei < base_edges; ei++) {
    const CfgEdge& e = cfg.edges_[ei];
    if (e.kind != EdgeKind::Call) continue;
    int callee = cfg.blocks_[size_t(e.dst)].routine;
    int caller = cfg.blocks_[size_t(e.src)].routine;
    if (e.tail_call)
      tail_links.emplace_back(caller, callee);
    else
      continuations[size_t(callee)].insert(e.continuation);
  }
  // Propagate through tail-call chains until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [from, to] : tail_links) {
      for (int c : continuations[size_t(from)])
        changed |= continuations[size_t(to)].insert(c).second;
    }
  }

  for (size_t r = 0; r < n_routines; r++) {
    for (int ret_block : cfg.routines_[r].return_blocks) {
      for (int cont : continuations[r]) {
        CfgEdge e;
        e.id = int(cfg.edges_.size());
        e.src = ret_block;
        e.dst = cont;
        e.kind = EdgeKind::Return;
        e.taken_flag = true;
        cfg.edges_.push_back(e);
      }
    }
  }
}

void Builder::check_recursion(Cfg& cfg) {
  size_t n = cfg.routines_.size();
  std::vector<std::set<int>> callees(n);
  for (const CfgEdge& e : cfg.edges_) {
    if (e.kind != EdgeKind::Call) continue;
    callees[size_t(cfg.blocks_[size_t(e.src)].routine)].insert(
        cfg.blocks_[size_t(e.dst)].routine);
  }
  // Detect call-graph cycles with a coloring DFS; recursion is fine only
  // when some routine on the cycle carries a recursion-depth annotation.
  std::vector<int> color(n, 0);
  std::vector<int> stack;
  auto annotated = [&](int r) {
    const Routine& routine = cfg.routines_[size_t(r)];
    for (const auto& [sym, depth] : ann_.recursion_depths) {
      auto addr = image_.symbol_address(sym);
      if (addr && (*addr & ~1u) == routine.entry_addr) return true;
      // Symbols may be absent in stripped images; accept hex names too.
      if (sym.size() > 2 && sym[0] == '0' && sym[1] == 'x' &&
          std::stoul(sym.substr(2), nullptr, 16) == routine.entry_addr)
        return true;
    }
    return false;
  };
  std::function<void(int)> dfs = [&](int r) {
    color[size_t(r)] = 1;
    stack.push_back(r);
    for (int c : callees[size_t(r)]) {
      if (color[size_t(c)] == 1) {
        // Found a cycle: c .. back of stack
        bool ok = false;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          if (annotated(*it)) ok = true;
          if (*it == c) break;
        }
        if (!ok)
          throw CfgError("recursion involving routine at " +
                         hex(cfg.routines_[size_t(c)].entry_addr) +
                         " needs a 'recursion <symbol> depth <n>' annotation");
      } else if (color[size_t(c)] == 0) {
        dfs(c);
      }
    }
    stack.pop_back();
    color[size_t(r)] = 2;
  };
  for (size_t r = 0; r < n; r++)
    if (color[r] == 0) dfs(int(r));
}

// Dominator-based natural loop detection on the intra-routine graph
// augmented with call-summary edges (call block -> continuation), so loops
// whose bodies contain calls are still recognized.
void Builder::find_loops(Cfg& cfg, int routine_id) {
  const Routine& routine = cfg.routines_[size_t(routine_id)];
  const auto& blocks = routine.blocks;
  size_t n = blocks.size();
  std::map<int, int> local;  // block id -> local index
  for (size_t i = 0; i < n; i++) local[blocks[i]] = int(i);

  std::vector<std::vector<int>> succ(n), pred(n);
  auto add_local = [&](int s, int d) {
    succ[size_t(local.at(s))].push_back(local.at(d));
    pred[size_t(local.at(d))].push_back(local.at(s));
  };
  for (const CfgEdge& e : cfg.edges_) {
    if (cfg.blocks_[size_t(e.src)].routine != routine_id) continue;
    if (e.kind == EdgeKind::FallThrough || e.kind == EdgeKind::Taken) {
      add_local(e.src, e.dst);
    } else if (e.kind == EdgeKind::Call && e.continuation >= 0) {
      add_local(e.src, e.continuation);
    }
  }
  // Dedup parallel summary edges (several callees share one continuation).
  for (auto& v : succ) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : pred) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  int entry_local = local.at(routine.entry_block);

  // RPO from the routine entry.
  std::vector<int> rpo;
  std::vector<int> state(n, 0);
  std::function<void(int)> dfs = [&](int u) {
    state[size_t(u)] = 1;
    for (int v : succ[size_t(u)])
      if (state[size_t(v)] == 0) dfs(v);
    state[size_t(u)] = 2;
    rpo.push_back(u);
  };
  dfs(entry_local);
  std::reverse(rpo.begin(), rpo.end());
  std::vector<int> rpo_index(n, -1);
  for (size_t i = 0; i < rpo.size(); i++) rpo_index[size_t(rpo[i])] = int(i);

  // Iterative dominators (Cooper/Harvey/Kennedy).
  std::vector<int> idom(n, -1);
  idom[size_t(entry_local)] = entry_local;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_index[size_t(a)] > rpo_index[size_t(b)]) a = idom[size_t(a)];
      while (rpo_index[size_t(b)] > rpo_index[size_t(a)]) b = idom[size_t(b)];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int u : rpo) {
      if (u == entry_local) continue;
      int new_idom = -1;
      for (int p : pred[size_t(u)]) {
        if (idom[size_t(p)] == -1) continue;
        new_idom = new_idom == -1 ? p : intersect(new_idom, p);
      }
      if (new_idom != -1 && idom[size_t(u)] != new_idom) {
        idom[size_t(u)] = new_idom;
        changed = true;
      }
    }
  }
  auto dominates = [&](int a, int b) {
    while (true) {
      if (a == b) return true;
      if (b == entry_local || idom[size_t(b)] == -1) return false;
      int next = idom[size_t(b)];
      if (next == b) return false;
      b = next;
    }
  };

  // Back edges and natural loop bodies.
  std::map<int, std::set<int>> loop_blocks;  // header local -> body locals
  for (size_t u = 0; u < n; u++) {
    if (rpo_index[u] < 0) continue;  // unreachable within routine
    for (int v : succ[u]) {
      if (!dominates(v, int(u))) continue;
      auto& body = loop_blocks[v];
      body.insert(v);
      std::vector<int> stack2{int(u)};
      while (!stack2.empty()) {
        int w = stack2.back();
        stack2.pop_back();
        if (!body.insert(w).second) continue;
        for (int p : pred[size_t(w)])
          if (p != v || w == v) stack2.push_back(p);
      }
    }
  }

  // Irreducibility: removing dominator back edges must leave a DAG.
  {
    std::vector<std::vector<int>> fwd(n);
    for (size_t u = 0; u < n; u++)
      for (int v : succ[u])
        if (!dominates(v, int(u))) fwd[u].push_back(v);
    std::vector<int> st(n, 0);
    std::function<void(int)> cyc = [&](int u) {
      st[size_t(u)] = 1;
      for (int v : fwd[size_t(u)]) {
        if (st[size_t(v)] == 1)
          throw CfgError("irreducible control flow in routine at " + hex(routine.entry_addr) +
                         " near block " + hex(cfg.blocks_[size_t(blocks[size_t(v)])].start));
        if (st[size_t(v)] == 0) cyc(v);
      }
      st[size_t(u)] = 2;
    };
    for (size_t u = 0; u < n; u++)
      if (st[u] == 0 && rpo_index[u] >= 0) cyc(int(u));
  }

  // Materialize loops sorted by header address for determinism.
  for (const auto& [header_local, body] : loop_blocks) {
    Loop l;
    l.id = int(cfg.loops_.size());
    l.routine = routine_id;
    l.header = blocks[size_t(header_local)];
    for (int b : body) l.blocks.push_back(blocks[size_t(b)]);
    std::sort(l.blocks.begin(), l.blocks.end());
    cfg.loops_.push_back(std::move(l));
  }
}

// Fills latch/back/entry/exit edge lists and loop nesting once all loops of
// all routines exist.
void Builder::classify_return_edges_for_loops(Cfg& cfg) {
  // Matching call blocks per return edge: call edges with the same callee
  // routine and continuation == return edge dst.
  auto matching_call_blocks = [&](const CfgEdge& ret) {
    std::vector<int> result;
    int callee_routine = cfg.blocks_[size_t(ret.src)].routine;
    for (const CfgEdge& e : cfg.edges_) {
      if (e.kind != EdgeKind::Call || e.tail_call) continue;
      if (cfg.blocks_[size_t(e.dst)].routine != callee_routine) continue;
      if (e.continuation == ret.dst) result.push_back(e.src);
    }
    return result;
  };

  for (Loop& l : cfg.loops_) {
    std::set<int> members(l.blocks.begin(), l.blocks.end());
    for (const CfgEdge& e : cfg.edges_) {
      bool src_in = members.count(e.src) > 0;
      bool dst_in = members.count(e.dst) > 0;
      bool intra = e.kind == EdgeKind::FallThrough || e.kind == EdgeKind::Taken;
      if (intra && e.dst == l.header && src_in) {
        l.back_edge_ids.push_back(e.id);
        l.latches.push_back(e.src);
      } else if (e.dst == l.header && !src_in) {
        if (intra || e.kind == EdgeKind::Call) {
          l.entry_edge_ids.push_back(e.id);
        } else if (e.kind == EdgeKind::Return) {
          // A return re-entering the header counts as an entry only when the
          // matching call site sits outside the loop.
          bool internal = false;
          for (int cb : matching_call_blocks(e))
            if (members.count(cb)) internal = true;
          if (!internal) l.entry_edge_ids.push_back(e.id);
        }
      } else if (intra && src_in && !dst_in) {
        l.exit_edge_ids.push_back(e.id);
      }
    }
    std::sort(l.latches.begin(), l.latches.end());
    l.latches.erase(std::unique(l.latches.begin(), l.latches.end()), l.latches.end());
  }

  // Nesting: parent = smallest strictly containing loop.
  for (Loop& l : cfg.loops_) {
    int best = -1;
    size_t best_size = SIZE_MAX;
    for (const Loop& o : cfg.loops_) {
      if (o.id == l.id || o.routine != l.routine) continue;
      if (o.blocks.size() <= l.blocks.size()) continue;
      if (!std::includes(o.blocks.begin(), o.blocks.end(), l.blocks.begin(), l.blocks.end()))
        continue;
      if (o.blocks.size() < best_size) {
        best = o.id;
        best_size = o.blocks.size();
      }
    }
    l.parent = best;
  }
  for (Loop& l : cfg.loops_) {
    int d = 0;
    for (int p = l.parent; p != -1; p = cfg.loops_[size_t(p)].parent) d++;
    l.depth = d;
  }

  // Per-block innermost loop.
  cfg.innermost_loop_.assign(cfg.blocks_.size(), -1);
  for (const Loop& l : cfg.loops_) {
    for (int b : l.blocks) {
      int cur = cfg.innermost_loop_[size_t(b)];
      if (cur == -1 || cfg.loops_[size_t(cur)].depth < l.depth)
        cfg.innermost_loop_[size_t(b)] = l.id;
    }
  }
}

Cfg Builder::build() {
  Cfg cfg;

  // Discover routines breadth-first; calls found while scanning add entries.
  std::deque<uint32_t> routine_work{entry_};
  routine_ids_[entry_] = 0;
  while (!routine_work.empty()) {
    uint32_t addr = routine_work.front();
    routine_work.pop_front();
    RoutineScan scan = scan_routine(addr);
    for (const auto& call : scan.calls) {
      for (uint32_t callee : call.callees) {
        uint32_t c = callee & ~1u;
        if (!routine_ids_.count(c)) {
          routine_ids_[c] = -1;  // placeholder, numbered below
          routine_work.push_back(c);
        }
      }
    }
    scans_.push_back(std::move(scan));
  }
  // Deterministic routine ids: discovery order.
  routine_ids_.clear();
  for (size_t i = 0; i < scans_.size(); i++) routine_ids_[scans_[i].entry] = int(i);

  for (size_t i = 0; i < scans_.size(); i++) {
    Routine r;
    r.id = int(i);
    r.entry_addr = scans_[i].entry;
    if (auto sym = image_.symbol_name(scans_[i].entry))
      r.name = *sym;
    else {
      std::ostringstream os;
      os << "sub_" << std::hex << scans_[i].entry;
      r.name = os.str();
    }
    cfg.routines_.push_back(std::move(r));
  }
  for (size_t i = 0; i < scans_.size(); i++) make_blocks(cfg, scans_[i], int(i));
  for (size_t i = 0; i < scans_.size(); i++) connect_routine(cfg, scans_[i], int(i));
  match_returns(cfg);
  check_recursion(cfg);
  for (size_t i = 0; i < scans_.size(); i++) find_loops(cfg, int(i));
  classify_return_edges_for_loops(cfg);

  cfg.entry_block_ = cfg.routines_[0].entry_block;

  cfg.out_edges_.assign(cfg.blocks_.size(), {});
  cfg.in_edges_.assign(cfg.blocks_.size(), {});
  for (const CfgEdge& e : cfg.edges_) {
    cfg.out_edges_[size_t(e.src)].push_back(e.id);
    cfg.in_edges_[size_t(e.dst)].push_back(e.id);
  }
  return cfg;
}

}  // namespace

int Cfg::block_at(uint32_t addr, int routine) const {
  for (int b : routines_.at(size_t(routine)).blocks) {
    const BasicBlock& bb = blocks_[size_t(b)];
    if (addr >= bb.start && addr < bb.end) return b;
  }
  return -1;
}

int Cfg::block_containing(uint32_t addr) const {
  for (const BasicBlock& bb : blocks_)
    if (addr >= bb.start && addr < bb.end) return bb.id;
  return -1;
}

int Cfg::loop_of(int block) const { return innermost_loop_.at(size_t(block)); }

bool Cfg::loop_contains(int loop, int block) const {
  const Loop& l = loops_.at(size_t(loop));
  return std::binary_search(l.blocks.begin(), l.blocks.end(), block);
}

int Cfg::loop_headed_by(int block) const {
  for (const Loop& l : loops_)
    if (l.header == block) return l.id;
  return -1;
}

Cfg reconstruct(const MemoryImage& image, uint32_t entry, const AnnotationSet& annotations) {
  Builder b(image, entry, annotations);
  return b.build();
}

}  // namespace wcea
