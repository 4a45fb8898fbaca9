#include "wcea/simulator.hpp"

#include <map>

#include "wcea/decoder.hpp"
#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::HitStopAddress: return "hit-stop-address";
    case StopReason::MaxSteps: return "max-steps";
    case StopReason::Fault: return "fault";
  }
  return "?";
}

namespace {

struct Fault {
  std::string cause;
};

class Machine {
public:
  Machine(const MemoryImage& image, const SimOptions& opt) : image_(image), opt_(opt) {
    regs_.fill(0);
    uint32_t sp = opt.initial_sp;
    if (sp == 0) {
      // Top of the highest RAM range, 8-byte aligned.
      for (const auto& r : image.map().ranges())
        if (r.kind == RegionKind::Ram) sp = r.base + r.size;
      for (const auto& r : image.regions())
        if (r.kind == RegionKind::Ram) sp = std::max(sp, r.base + r.size);
      sp &= ~7u;
    }
    regs_[REG_SP] = sp;
    regs_[REG_LR] = opt.stop.empty() ? 0xffff'fffeu : (*opt.stop.begin() | 1u);
    pc_ = opt.start & ~1u;
    // Writable copies of RAM regions that carry initial contents.
    for (size_t i = 0; i < image.regions().size(); i++) {
      const MemoryRegion& r = image.regions()[i];
      if (r.kind == RegionKind::Ram)
        ram_overlays_[r.base] = image.contents(i);
    }
  }

  SimResult run() {
    SimResult result;
    result.counters = zero_counters();
    TraceRun current;
    current.start_addr = pc_;
    current.events = zero_counters();
    bool run_open = false;

    auto close_run = [&]() {
      if (run_open && current.instr_count > 0) result.block_trace.push_back(current);
      run_open = false;
    };

    while (true) {
      if (opt_.stop.count(pc_)) {
        close_run();
        result.stop = StopReason::HitStopAddress;
        result.stop_pc = pc_;
        break;
      }
      if (result.executed >= opt_.max_steps) {
        close_run();
        result.stop = StopReason::MaxSteps;
        result.stop_pc = pc_;
        break;
      }
      if (!run_open) {
        current = TraceRun{};
        current.start_addr = pc_;
        current.events = zero_counters();
        run_open = true;
      }

      Instr instr;
      try {
        instr = fetch(pc_);
      } catch (const Fault& f) {
        close_run();
        result.stop = StopReason::Fault;
        result.stop_pc = pc_;
        result.fault_cause = f.cause;
        break;
      }

      EventVector before = step_events_;
      bool transferred;
      try {
        transferred = execute(instr);
      } catch (const Fault& f) {
        close_run();
        result.stop = StopReason::Fault;
        result.stop_pc = pc_;
        result.fault_cause = f.cause;
        break;
      }
      (void)before;
      result.executed++;
      current.instr_count++;
      current.events += step_events_;
      result.counters += step_events_;
      step_events_.clear();

      if (transferred) close_run();
    }
    return result;
  }

private:
  static EventVector zero_counters() {
    using namespace counters;
    EventVector ev;
    ev[kInsnNonMul] = 0;
    ev[kRamReads] = 0;
    ev[kRamWrites] = 0;
    ev[kFlashReads] = 0;
    ev[kTakenBranches] = 0;
    ev[kMuls] = 0;
    return ev;
  }

  Instr fetch(uint32_t addr) {
    if (addr & 1) throw Fault{"unaligned fetch"};
    auto it = decode_cache_.find(addr);
    if (it != decode_cache_.end()) return it->second;
    try {
      Instr i = decode_one(image_, addr);
      decode_cache_[addr] = i;
      return i;
    } catch (const DecodeError& e) {
      throw Fault{std::string("undefined instruction: ") + e.what()};
    } catch (const AddressError& e) {
      throw Fault{std::string("bad fetch address: ") + e.what()};
    }
  }

  // ---- memory ----

  uint8_t* ram_byte(uint32_t addr) {
    for (auto& [base, bytes] : ram_overlays_) {
      if (addr >= base && addr - base < bytes.size()) return &bytes[addr - base];
    }
    return nullptr;
  }

  uint32_t load(uint32_t addr, int width, bool sign_extend) {
    if ((width == 4 && (addr & 3)) || (width == 2 && (addr & 1)))
      throw Fault{"unaligned access"};
    AddressClass cls = image_.classify(addr);
    using namespace counters;
    uint32_t raw = 0;
    switch (cls) {
      case AddressClass::Flash:
        step_events_[kFlashReads]++;
        raw = read_flash(addr, width);
        break;
      case AddressClass::Ram:
        step_events_[kRamReads]++;
        raw = read_ram(addr, width);
        break;
      case AddressClass::Device:
        // Not modeled; reads as zero and is priced under the worst
        // coefficient, the same rule the static side applies.
        step_events_[kFlashReads]++;
        raw = 0;
        break;
      case AddressClass::Unmapped:
        throw Fault{"unmapped load"};
    }
    if (sign_extend) {
      if (width == 1) return uint32_t(int32_t(int8_t(raw)));
      if (width == 2) return uint32_t(int32_t(int16_t(raw)));
    }
    return raw;
  }

  void store(uint32_t addr, int width, uint32_t value) {
    if ((width == 4 && (addr & 3)) || (width == 2 && (addr & 1)))
      throw Fault{"unaligned access"};
    AddressClass cls = image_.classify(addr);
    using namespace counters;
    switch (cls) {
      case AddressClass::Flash:
        throw Fault{"write to flash"};
      case AddressClass::Ram: {
        step_events_[kRamWrites]++;
        for (int b = 0; b < width; b++) {
          uint8_t* p = ram_byte(addr + uint32_t(b));
          if (!p) {
            // RAM without a loaded region: materialize a zeroed overlay page.
            materialize_ram(addr);
            p = ram_byte(addr + uint32_t(b));
            if (!p) throw Fault{"unmapped store"};
          }
          *p = uint8_t(value >> (8 * b));
        }
        break;
      }
      case AddressClass::Device:
        step_events_[kRamWrites]++;  // worst (only) write counter
        break;
      case AddressClass::Unmapped:
        throw Fault{"unmapped store"};
    }
  }

  void materialize_ram(uint32_t addr) {
    constexpr uint32_t kPage = 4096;
    uint32_t base = addr & ~(kPage - 1);
    if (ram_overlays_.count(base)) return;
    // Only materialize within a RAM classification range.
    if (image_.classify(base) != AddressClass::Ram) return;
    ram_overlays_[base] = std::vector<uint8_t>(kPage, 0);
  }

  uint32_t read_flash(uint32_t addr, int width) {
    uint32_t v = 0;
    for (int b = 0; b < width; b++) v |= uint32_t(image_.read8(addr + uint32_t(b))) << (8 * b);
    return v;
  }

  uint32_t read_ram(uint32_t addr, int width) {
    uint32_t v = 0;
    for (int b = 0; b < width; b++) {
      uint8_t* p = ram_byte(addr + uint32_t(b));
      v |= uint32_t(p ? *p : 0) << (8 * b);
    }
    return v;
  }

  // ---- register & flag helpers ----

  uint32_t reg(int r) const {
    if (r == REG_PC) return pc_ + 4;
    return regs_[size_t(r)];
  }

  void set_reg(int r, uint32_t v) { regs_[size_t(r)] = v; }

  void set_sp_checked(uint32_t v) {
    regs_[REG_SP] = v;
    if (opt_.stack_limit && v < *opt_.stack_limit) throw Fault{"stack overflow"};
  }

  void set_nz(uint32_t result) {
    n_ = (result >> 31) & 1;
    z_ = result == 0;
  }

  uint32_t add_with_carry(uint32_t a, uint32_t b, uint32_t carry_in, bool set_flags) {
    uint64_t usum = uint64_t(a) + uint64_t(b) + carry_in;
    int64_t ssum = int64_t(int32_t(a)) + int64_t(int32_t(b)) + int64_t(carry_in);
    uint32_t result = uint32_t(usum);
    if (set_flags) {
      set_nz(result);
      c_ = usum > 0xffff'ffffull;
      v_ = ssum != int64_t(int32_t(result));
    }
    return result;
  }

  bool condition_holds(Cond c) const {
    switch (c) {
      case Cond::EQ: return z_;
      case Cond::NE: return !z_;
      case Cond::CS: return c_;
      case Cond::CC: return !c_;
      case Cond::MI: return n_;
      case Cond::PL: return !n_;
      case Cond::VS: return v_;
      case Cond::VC: return !v_;
      case Cond::HI: return c_ && !z_;
      case Cond::LS: return !c_ || z_;
      case Cond::GE: return n_ == v_;
      case Cond::LT: return n_ != v_;
      case Cond::GT: return !z_ && n_ == v_;
      case Cond::LE: return z_ || n_ != v_;
      case Cond::AL: return true;
    }
    return true;
  }

  void count_instr(const Instr& i) {
    using namespace counters;
    if (i.kind == InstrKind::Multiply)
      step_events_[kMuls]++;
    else
      step_events_[kInsnNonMul]++;
  }

  void taken_branch() { step_events_[counters::kTakenBranches]++; }

  // Executes one instruction; returns true when control transferred
  // non-sequentially (ends the current trace run).
  bool execute(const Instr& i) {
    count_instr(i);
    uint32_t next = pc_ + i.size;
    using M = Mnemonic;

    switch (i.mnem) {
      case M::MOV: {
        uint32_t v = i.has_imm ? uint32_t(i.imm) : reg(i.rm);
        if (i.rd == REG_PC) {
          taken_branch();
          pc_ = v & ~1u;
          return true;
        }
        set_reg(i.rd, v);
        if (i.sets_flags) set_nz(v);
        break;
      }
      case M::ADD: {
        uint32_t a = reg(i.rn);
        uint32_t b = i.has_imm ? uint32_t(i.imm) : reg(i.rm);
        uint32_t v = add_with_carry(a, b, 0, i.sets_flags);
        if (i.rd == REG_PC) {
          taken_branch();
          pc_ = v & ~1u;
          return true;
        }
        if (i.rd == REG_SP) set_sp_checked(v);
        else set_reg(i.rd, v);
        break;
      }
      case M::SUB: {
        uint32_t a = reg(i.rn);
        uint32_t b = i.has_imm ? uint32_t(i.imm) : reg(i.rm);
        uint32_t v = add_with_carry(a, ~b, 1, i.sets_flags);
        if (i.rd == REG_SP) set_sp_checked(v);
        else set_reg(i.rd, v);
        break;
      }
      case M::CMP:
        add_with_carry(reg(i.rn), ~(i.has_imm ? uint32_t(i.imm) : reg(i.rm)), 1, true);
        break;
      case M::CMN:
        add_with_carry(reg(i.rn), reg(i.rm), 0, true);
        break;
      case M::RSB: {
        uint32_t v = add_with_carry(~reg(i.rn), 0, 1, true);
        set_reg(i.rd, v);
        break;
      }
      case M::MUL: {
        uint32_t v = reg(i.rn) * reg(i.rm);
        set_reg(i.rd, v);
        set_nz(v);
        break;
      }
      case M::AND: case M::ORR: case M::EOR: case M::BIC: case M::MVN: case M::TST: {
        uint32_t a = reg(i.rn >= 0 ? i.rn : i.rd);
        uint32_t b = reg(i.rm);
        uint32_t v = 0;
        switch (i.mnem) {
          case M::AND: case M::TST: v = a & b; break;
          case M::ORR: v = a | b; break;
          case M::EOR: v = a ^ b; break;
          case M::BIC: v = a & ~b; break;
          default: v = ~b; break;  // MVN
        }
        if (i.mnem != M::TST) set_reg(i.rd, v);
        set_nz(v);
        break;
      }
      case M::LSL: case M::LSR: case M::ASR: case M::ROR: {
        uint32_t value = i.has_imm ? reg(i.rm) : reg(i.rn);
        uint32_t amount = i.has_imm ? uint32_t(i.imm) : (reg(i.rm) & 0xff);
        uint32_t v = value;
        if (amount != 0) {
          switch (i.mnem) {
            case M::LSL:
              c_ = amount <= 32 && ((amount == 32 ? value & 1 : (value >> (32 - amount)) & 1));
              v = amount >= 32 ? 0 : value << amount;
              break;
            case M::LSR:
              c_ = amount <= 32 && ((value >> (std::min(amount, 32u) - 1)) & 1);
              v = amount >= 32 ? 0 : value >> amount;
              break;
            case M::ASR: {
              uint32_t sh = std::min(amount, 31u);
              c_ = amount > 32 ? (int32_t(value) < 0)
                               : ((int32_t(value) >> (std::min(amount, 32u) - 1)) & 1);
              v = uint32_t(int32_t(value) >> sh);
              if (amount >= 32) v = int32_t(value) < 0 ? 0xffff'ffffu : 0;
              break;
            }
            default: {  // ROR
              uint32_t r = amount & 31;
              v = r ? ((value >> r) | (value << (32 - r))) : value;
              c_ = (v >> 31) & 1;
              break;
            }
          }
        }
        set_reg(i.rd, v);
        set_nz(v);
        break;
      }
      case M::ADC: {
        uint32_t v = add_with_carry(reg(i.rn), reg(i.rm), c_, true);
        set_reg(i.rd, v);
        break;
      }
      case M::SBC: {
        uint32_t v = add_with_carry(reg(i.rn), ~reg(i.rm), c_, true);
        set_reg(i.rd, v);
        break;
      }
      case M::ADR:
        set_reg(i.rd, *i.literal_address());
        break;
      case M::SXTB: set_reg(i.rd, uint32_t(int32_t(int8_t(reg(i.rm))))); break;
      case M::SXTH: set_reg(i.rd, uint32_t(int32_t(int16_t(reg(i.rm))))); break;
      case M::UXTB: set_reg(i.rd, reg(i.rm) & 0xff); break;
      case M::UXTH: set_reg(i.rd, reg(i.rm) & 0xffff); break;
      case M::REV: {
        uint32_t x = reg(i.rm);
        set_reg(i.rd, (x << 24) | ((x & 0xff00) << 8) | ((x >> 8) & 0xff00) | (x >> 24));
        break;
      }
      case M::REV16: {
        uint32_t x = reg(i.rm);
        set_reg(i.rd, ((x & 0x00ff00ffu) << 8) | ((x & 0xff00ff00u) >> 8));
        break;
      }
      case M::REVSH: {
        uint32_t x = reg(i.rm);
        uint32_t h = ((x & 0xff) << 8) | ((x >> 8) & 0xff);
        set_reg(i.rd, uint32_t(int32_t(int16_t(h))));
        break;
      }
      case M::LDR: case M::LDRB: case M::LDRH: case M::LDRSB: case M::LDRSH: {
        uint32_t addr;
        if (auto lit = i.literal_address())
          addr = *lit;
        else if (i.rm >= 0)
          addr = reg(i.rn) + reg(i.rm);
        else
          addr = reg(i.rn) + uint32_t(i.imm);
        bool sign = i.mnem == M::LDRSB || i.mnem == M::LDRSH;
        set_reg(i.rt, load(addr, *i.mem_width, sign));
        break;
      }
      case M::STR: case M::STRB: case M::STRH: {
        uint32_t addr = i.rm >= 0 ? reg(i.rn) + reg(i.rm) : reg(i.rn) + uint32_t(i.imm);
        store(addr, *i.mem_width, reg(i.rt));
        break;
      }
      case M::LDM: {
        uint32_t addr = reg(i.rn);
        for (int r = 0; r < 8; r++) {
          if (!(i.reglist & (1u << r))) continue;
          set_reg(r, load(addr, 4, false));
          addr += 4;
        }
        if (i.wback) set_reg(i.rn, addr);
        break;
      }
      case M::STM: {
        uint32_t addr = reg(i.rn);
        for (int r = 0; r < 8; r++) {
          if (!(i.reglist & (1u << r))) continue;
          store(addr, 4, reg(r));
          addr += 4;
        }
        set_reg(i.rn, addr);
        break;
      }
      case M::PUSH: {
        uint32_t addr = reg(REG_SP) - 4u * *i.reg_count;
        set_sp_checked(addr);
        for (int r = 0; r < 16; r++) {
          if (!(i.reglist & (1u << r))) continue;
          store(addr, 4, regs_[size_t(r)]);
          addr += 4;
        }
        break;
      }
      case M::POP: {
        uint32_t addr = reg(REG_SP);
        uint32_t new_pc = 0;
        bool to_pc = false;
        for (int r = 0; r < 16; r++) {
          if (!(i.reglist & (1u << r))) continue;
          uint32_t v = load(addr, 4, false);
          if (r == REG_PC) {
            new_pc = v & ~1u;
            to_pc = true;
          } else {
            set_reg(r, v);
          }
          addr += 4;
        }
        set_reg(REG_SP, addr);
        if (to_pc) {
          taken_branch();
          pc_ = new_pc;
          return true;
        }
        break;
      }
      case M::B:
        if (i.kind == InstrKind::BranchCond && !condition_holds(i.cond)) break;
        taken_branch();
        pc_ = i.target;
        return true;
      case M::BL:
        set_reg(REG_LR, next | 1u);
        taken_branch();
        pc_ = i.target;
        return true;
      case M::BLX:
        set_reg(REG_LR, next | 1u);
        taken_branch();
        pc_ = reg(i.rm) & ~1u;
        return true;
      case M::BX:
        taken_branch();
        pc_ = reg(i.rm) & ~1u;
        return true;
      case M::MRS:
        set_reg(i.rd, i.imm == 8 || i.imm == 9 ? reg(REG_SP) : 0);
        break;
      case M::MSR:
        if (i.imm == 8 || i.imm == 9) set_sp_checked(reg(i.rn));
        break;
      case M::NOP: case M::YIELD: case M::SEV: case M::HINT:
      case M::WFE: case M::WFI:
      case M::CPS: case M::DMB: case M::DSB: case M::ISB:
        break;
      case M::SVC:
        throw Fault{"SVC is not modeled (analysis-opaque)"};
      case M::BKPT:
        throw Fault{"BKPT hit"};
      case M::UDF:
        throw Fault{"permanently undefined instruction"};
    }
    pc_ = next;
    return false;
  }

  const MemoryImage& image_;
  const SimOptions& opt_;
  std::array<uint32_t, 15> regs_{};
  uint32_t pc_ = 0;
  bool n_ = false, z_ = false, c_ = false, v_ = false;
  std::map<uint32_t, std::vector<uint8_t>> ram_overlays_;
  std::map<uint32_t, Instr> decode_cache_;
  EventVector step_events_;
};

}  // namespace

SimResult run(const MemoryImage& image, const SimOptions& options) {
  Machine m(image, options);
  return m.run();
}

AnnotationSet derive_flow_facts(const SimResult& sim, const Cfg& cfg) {
  // Expand trace runs into the block sequence.
  std::vector<int> sequence;
  for (const TraceRun& tr : sim.block_trace) {
    uint32_t addr = tr.start_addr;
    uint32_t remaining = tr.instr_count;
    while (remaining > 0) {
      int b = cfg.block_containing(addr);
      if (b < 0)
        throw AnalysisError("trace address 0x" + std::to_string(addr) +
                            " is not covered by any CFG block (decoder/simulator disagreement)");
      const BasicBlock& bb = cfg.block(b);
      sequence.push_back(b);
      // Walk to the end of this block or the end of the run.
      uint32_t count = 0;
      for (const Instr& in : bb.instrs) {
        if (in.addr < addr) continue;
        if (count >= remaining) break;
        count++;
        addr = in.addr + in.size;
      }
      if (count == 0)
        throw AnalysisError("trace walk made no progress at 0x" + std::to_string(addr));
      remaining -= count;
    }
  }

  // Per loop: latch executions per entry episode; bound = max over episodes.
  AnnotationSet out;
  for (const Loop& loop : cfg.loops()) {
    std::set<int> members(loop.blocks.begin(), loop.blocks.end());
    std::set<int> latches(loop.latches.begin(), loop.latches.end());
    bool inside = false;
    uint64_t current = 0, best = 0;
    bool entered_ever = false;
    for (int b : sequence) {
      bool member = members.count(b) > 0;
      if (member && !inside) {
        inside = true;
        entered_ever = true;
        current = 0;
      } else if (!member && inside) {
        inside = false;
        best = std::max(best, current);
      }
      if (member && latches.count(b)) current++;
    }
    if (inside) best = std::max(best, current);
    uint32_t head_addr = cfg.block(loop.header).start;
    out.loop_bounds[head_addr] =
        LoopBoundAnn{0, entered_ever ? best : 0, BoundProvenance::Trace};
  }
  return out;
}

Rat model_result(const SimResult& sim, const EnergyModel& model) {
  CounterTrace trace;
  for (const auto& [id, count] : sim.counters) trace.counter_ids.push_back(id);
  TraceRow row;
  row.label = "simulation";
  row.events = sim.counters;
  trace.rows.push_back(std::move(row));
  return replay(model, trace).total;
}

}  // namespace wcea
