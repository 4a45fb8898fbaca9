#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wcea/annotations.hpp"
#include "wcea/instr.hpp"
#include "wcea/memory.hpp"

namespace wcea {

struct BasicBlock {
  int id = -1;
  uint32_t start = 0;
  uint32_t end = 0;  // exclusive
  std::vector<Instr> instrs;
  int routine = -1;

  const Instr& terminator() const { return instrs.back(); }
  bool ends_in_control_transfer() const { return instrs.back().is_terminator(); }
};

enum class EdgeKind : uint8_t { FallThrough, Taken, Call, Return };

const char* to_string(EdgeKind k);

// taken_flag marks edges whose traversal executes a taken branch: the taken
// side of a conditional, unconditional branches, calls and returns. The
// Cortex-M0 "taken branches" counter is edge-resident, and every
// non-sequential fetch pays the pipeline flush, so the superset convention
// applies uniformly. Fall-through edges never set it.
struct CfgEdge {
  int id = -1;
  int src = -1;
  int dst = -1;
  EdgeKind kind = EdgeKind::FallThrough;
  bool taken_flag = false;
  bool tail_call = false;   // BX Rm to an annotated routine entry
  int continuation = -1;    // for Call edges: block that matched returns resume at (-1 = tail)
};

struct Routine {
  int id = -1;
  uint32_t entry_addr = 0;
  std::string name;
  int entry_block = -1;
  std::vector<int> blocks;
  std::vector<int> return_blocks;  // blocks ending in a Return terminator
};

// Natural loop over the dominator tree of one routine. Irreducible control
// flow is rejected during reconstruction, so every cycle belongs to exactly
// one loop nest.
struct Loop {
  int id = -1;
  int routine = -1;
  int header = -1;
  int parent = -1;  // innermost enclosing loop
  int depth = 0;    // nesting depth, outermost = 0
  std::vector<int> blocks;
  std::vector<int> latches;         // back-edge source blocks
  std::vector<int> back_edge_ids;   // intra-routine edges dst == header
  std::vector<int> entry_edge_ids;  // edges from outside the loop into header
  std::vector<int> exit_edge_ids;   // edges from inside to outside
};

class Cfg {
public:
  const std::vector<BasicBlock>& blocks() const { return blocks_; }
  const std::vector<CfgEdge>& edges() const { return edges_; }
  const std::vector<Routine>& routines() const { return routines_; }
  const std::vector<Loop>& loops() const { return loops_; }
  int entry_block() const { return entry_block_; }

  const BasicBlock& block(int id) const { return blocks_.at(size_t(id)); }
  const CfgEdge& edge(int id) const { return edges_.at(size_t(id)); }
  const Routine& routine(int id) const { return routines_.at(size_t(id)); }
  const Loop& loop(int id) const { return loops_.at(size_t(id)); }

  const std::vector<int>& out_edges(int block) const { return out_edges_.at(size_t(block)); }
  const std::vector<int>& in_edges(int block) const { return in_edges_.at(size_t(block)); }

  // Block whose address range contains addr within the given routine, or -1.
  int block_at(uint32_t addr, int routine) const;
  // Any block containing addr (routines normally do not overlap); -1 if none.
  int block_containing(uint32_t addr) const;
  // Innermost loop containing the block, -1 if none.
  int loop_of(int block) const;
  bool loop_contains(int loop, int block) const;

  // Loops whose header is this block.
  int loop_headed_by(int block) const;

private:
  friend Cfg reconstruct(const MemoryImage&, uint32_t, const AnnotationSet&);

  std::vector<BasicBlock> blocks_;
  std::vector<CfgEdge> edges_;
  std::vector<Routine> routines_;
  std::vector<Loop> loops_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<int> innermost_loop_;  // per block, -1 if none
  int entry_block_ = -1;
};

// Reconstructs the interprocedural CFG by worklist exploration from entry.
// Blocks split at branch targets; calls get Call edges plus recorded
// continuations; returns are matched by calling discipline. Indirect
// branches and calls require `target` annotations (BLX Rm becomes a call
// with a continuation, BX Rm a tail call; MOV/ADD PC, Rm become
// intra-routine taken edges, the jump-table idiom). Unresolved targets,
// irreducible flow and unannotated recursion are errors.
Cfg reconstruct(const MemoryImage& image, uint32_t entry, const AnnotationSet& annotations);

}  // namespace wcea
