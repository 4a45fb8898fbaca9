#include "wcea/value_analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "wcea/errors.hpp"

namespace wcea {

AbstractState AbstractState::initial(uint32_t sp) {
  AbstractState s;
  s.bottom = false;
  s.flags = FlagsFact::unknown();
  for (auto& r : s.regs) r = Interval::top();
  if (sp != 0) s.regs[REG_SP] = Interval::of_u32(sp);
  return s;
}

AbstractState AbstractState::join(const AbstractState& o) const {
  if (bottom) return o;
  if (o.bottom) return *this;
  AbstractState out;
  out.bottom = false;
  for (size_t i = 0; i < regs.size(); i++) out.regs[i] = regs[i].join(o.regs[i]);
  if (flags == o.flags)
    out.flags = flags;
  else if (flags.valid() && o.flags.valid() && flags.kind == o.flags.kind &&
           flags.ra == o.flags.ra && flags.rb == o.flags.rb && flags.rres == o.flags.rres) {
    out.flags = flags;
    out.flags.a = flags.a.join(o.flags.a);
    out.flags.b = flags.b.join(o.flags.b);
  } else {
    out.flags = FlagsFact::unknown();
  }
  out.ram_smashed = ram_smashed || o.ram_smashed;
  // Keys present on one side only become explicit top: "absent" still means
  // load-time image contents, which the other path may have overwritten.
  for (const auto& [addr, v] : mem) {
    auto it = o.mem.find(addr);
    out.mem[addr] = it == o.mem.end() ? Interval::top() : v.join(it->second);
  }
  for (const auto& [addr, v] : o.mem) {
    if (!mem.count(addr)) out.mem[addr] = Interval::top();
  }
  return out;
}

namespace {

constexpr size_t kMaxTrackedCells = 4096;

struct EdgeResult {
  AbstractState state;
};

class Analyzer {
public:
  Analyzer(const ContextualCfg& g, const MemoryImage& image, const AnnotationSet& ann,
           const ValueAnalysisConfig& config)
      : g_(g), image_(image), ann_(ann), config_(config) {
    collect_thresholds();
    compute_rpo();
  }

  ValueResults run();

private:
  // ---- program structure helpers ----

  void compute_rpo() {
    size_t n = g_.nodes().size();
    rpo_index_.assign(n, int(n));
    std::vector<int> state(n, 0);
    std::vector<int> order;
    std::function<void(int)> dfs = [&](int u) {
      state[size_t(u)] = 1;
      for (int eid : g_.out_edges(u)) {
        int v = g_.edge(eid).dst_node;
        if (v >= 0 && state[size_t(v)] == 0) dfs(v);
      }
      order.push_back(u);
    };
    dfs(g_.entry_node());
    std::reverse(order.begin(), order.end());
    for (size_t i = 0; i < order.size(); i++) rpo_index_[size_t(order[i])] = int(i);
  }

  void collect_thresholds() {
    std::set<int64_t> t{0, 1};
    for (int shift = 1; shift <= 32; shift++) {
      t.insert(int64_t(1) << shift);
      t.insert((int64_t(1) << shift) - 1);
    }
    for (const BasicBlock& bb : g_.cfg().blocks()) {
      for (const Instr& i : bb.instrs) {
        if (!i.has_imm) continue;
        switch (i.mnem) {
          case Mnemonic::CMP:
          case Mnemonic::ADD:
          case Mnemonic::SUB:
          case Mnemonic::MOV:
            t.insert(i.imm);
            t.insert(i.imm + 1);
            t.insert(i.imm - 1);
            break;
          default:
            break;
        }
      }
    }
    thresholds_.assign(t.begin(), t.end());
  }

  bool is_widen_point(int node) const {
    for (const auto& inst : g_.loop_instances())
      for (int e : inst.back_edges)
        if (g_.edge(e).dst_node == node) return true;
    return false;
  }

  // ---- memory ----

  AddressClass classify_range(int64_t lo, int64_t hi) const {
    if (lo < 0 || hi > int64_t(0xffffffff) || lo > hi) return AddressClass::Unmapped;
    AddressClass a = image_.classify(uint32_t(lo));
    AddressClass b = image_.classify(uint32_t(hi));
    if (a != b) return AddressClass::Unmapped;
    return a;
  }

  Interval read_mem(const AbstractState& s, const Interval& addr, int width, bool sign_extend) const {
    Interval fallback = width == 4 ? Interval::top()
                        : sign_extend
                            ? Interval::of(-(int64_t(1) << (width * 8 - 1)),
                                           (int64_t(1) << (width * 8 - 1)) - 1)
                            : Interval::of(0, (int64_t(1) << (width * 8)) - 1);
    if (!addr.is_constant()) return fallback;
    int64_t a64 = addr.constant_value();
    if (a64 < 0 || a64 > int64_t(0xffffffff)) return fallback;
    uint32_t a = uint32_t(a64);
    if (width == 2 && (a & 1)) return fallback;
    if (width == 4 && (a & 3)) return fallback;
    AddressClass cls = image_.classify(a);
    auto extend = [&](uint32_t raw) {
      int64_t v;
      if (sign_extend) {
        if (width == 1) v = int64_t(int8_t(raw));
        else if (width == 2) v = int64_t(int16_t(raw));
        else v = int64_t(int32_t(raw));
      } else {
        v = int64_t(raw);
      }
      return Interval::constant(v);
    };
    if (cls == AddressClass::Flash) {
      uint32_t raw = width == 1 ? image_.read8(a) : width == 2 ? image_.read16(a) : image_.read32(a);
      return extend(raw);
    }
    if (cls != AddressClass::Ram) return fallback;
    uint32_t word_addr = a & ~3u;
    auto it = s.mem.find(word_addr);
    if (it != s.mem.end()) {
      const Interval& w = it->second;
      if (width == 4) return w;
      if (w.is_constant() && w.pure_unsigned()) {
        uint32_t raw = uint32_t(w.constant_value());
        uint32_t shift = (a & 3u) * 8;
        uint32_t mask = width == 1 ? 0xffu : 0xffffu;
        return extend((raw >> shift) & mask);
      }
      return fallback;
    }
    if (s.ram_smashed) return fallback;
    // Untouched RAM still holds its load-time contents (zero when the region
    // was not initialized), matching the simulator's memory model.
    uint32_t raw = width == 1 ? image_.read8(a) : width == 2 ? image_.read16(a) : image_.read32(a);
    return extend(raw);
  }

  void write_mem(AbstractState& s, const Interval& addr, int width, const Interval& value) const {
    if (!addr.is_constant()) {
      s.mem.clear();
      s.ram_smashed = true;
      return;
    }
    int64_t a64 = addr.constant_value();
    if (a64 < 0 || a64 > int64_t(0xffffffff)) {
      s.mem.clear();
      s.ram_smashed = true;
      return;
    }
    uint32_t a = uint32_t(a64);
    if (image_.classify(a) != AddressClass::Ram) return;  // flash faults, device untracked
    uint32_t word_addr = a & ~3u;
    if (width == 4 && (a & 3) == 0) {
      s.mem[word_addr] = value;
    } else {
      // Partial-width store: merge into a constant word when possible.
      auto it = s.mem.find(word_addr);
      Interval word = it != s.mem.end()
                          ? it->second
                          : (s.ram_smashed ? Interval::top()
                                           : Interval::of_u32(image_.read32(word_addr)));
      if (word.is_constant() && word.pure_unsigned() && value.is_constant() &&
          value.pure_unsigned() && (width != 2 || (a & 1) == 0)) {
        uint32_t raw = uint32_t(word.constant_value());
        uint32_t shift = (a & 3u) * 8;
        uint32_t mask = (width == 1 ? 0xffu : 0xffffu) << shift;
        raw = (raw & ~mask) | ((uint32_t(value.constant_value()) << shift) & mask);
        s.mem[word_addr] = Interval::of_u32(raw);
      } else {
        s.mem[word_addr] = Interval::top();
        if (width == 2 && (a & 3) == 3) s.mem[word_addr + 4] = Interval::top();
      }
    }
    if (s.mem.size() > kMaxTrackedCells) {
      s.mem.clear();
      s.ram_smashed = true;
    }
  }

  // ---- flag facts ----

  static FlagsFact make_fact(FactKind kind, int ra, Interval a, int rb, Interval b, int rres) {
    FlagsFact f;
    f.kind = kind;
    f.ra = int8_t(ra);
    f.rb = int8_t(rb);
    f.rres = int8_t(rres);
    f.a = a;
    f.b = b;
    return f;
  }

  // ---- instruction transfer ----

  void record_access(int node, const Instr& i, const Interval& addr, ValueResults* results) const {
    if (!results) return;
    AddressClass cls;
    auto ann_it = ann_.region_facts.find(i.addr);
    if (ann_it != ann_.region_facts.end())
      cls = ann_it->second;
    else if (addr.is_bottom())
      cls = AddressClass::Unmapped;
    else
      cls = classify_range(addr.lo(), addr.hi());
    results->access_class[{node, i.addr}] = cls;
  }

  Interval mem_operand_addr(const AbstractState& s, const Instr& i) const {
    if (auto lit = i.literal_address()) return Interval::of_u32(*lit);
    Interval base = s.reg(i.rn);
    if (i.rm >= 0) return base.add(s.reg(i.rm));
    return base.add(Interval::constant(i.imm));
  }

  void exec_instr(const Instr& i, AbstractState& s, int node, ValueResults* results) const {
    FlagsFact new_fact;
    bool set_fact = false;

    auto set_result_fact = [&](int rd, const Interval& result, FactKind kind) {
      new_fact = make_fact(kind, rd, result, -1, Interval::constant(0), rd);
      set_fact = true;
    };

    switch (i.mnem) {
      case Mnemonic::MOV: {
        Interval v = i.has_imm ? Interval::constant(i.imm) : s.reg(i.rm);
        if (i.rd == REG_PC) break;  // control handled by CFG
        s.set_reg(i.rd, v);
        if (i.sets_flags) set_result_fact(i.rd, v, FactKind::NzOnly);
        break;
      }
      case Mnemonic::ADD: {
        Interval lhs = s.reg(i.rn);
        Interval rhs = i.has_imm ? Interval::constant(i.imm) : s.reg(i.rm);
        Interval v = lhs.add(rhs);
        if (i.rd == REG_PC) break;
        s.set_reg(i.rd, v);
        if (i.sets_flags) set_result_fact(i.rd, v, FactKind::AddZero);
        break;
      }
      case Mnemonic::SUB: {
        Interval lhs = s.reg(i.rn);
        Interval rhs = i.has_imm ? Interval::constant(i.imm) : s.reg(i.rm);
        Interval v = lhs.sub(rhs);
        s.set_reg(i.rd, v);
        if (i.sets_flags) {
          // SUBS keeps full compare(a, b) semantics; name the operand
          // register only when its value survived.
          int ra = i.rd == i.rn ? -1 : i.rn;
          int rb = (i.rm >= 0 && i.rm != i.rd) ? i.rm : -1;
          new_fact = make_fact(FactKind::Cmp, ra, lhs, rb, rhs, i.rd);
          set_fact = true;
        }
        break;
      }
      case Mnemonic::CMP: {
        Interval lhs = s.reg(i.rn);
        Interval rhs = i.has_imm ? Interval::constant(i.imm) : s.reg(i.rm);
        new_fact = make_fact(FactKind::Cmp, i.rn, lhs, i.rm, rhs, -1);
        set_fact = true;
        break;
      }
      case Mnemonic::CMN: {
        Interval lhs = s.reg(i.rn);
        Interval rhs = s.reg(i.rm);
        new_fact = make_fact(FactKind::AddZero, -1, lhs.add(rhs), -1, Interval::constant(0), -1);
        set_fact = true;
        break;
      }
      case Mnemonic::RSB: {
        Interval v = s.reg(i.rn).neg();
        s.set_reg(i.rd, v);
        // Flags encode compare(0, rn).
        new_fact = make_fact(FactKind::Cmp, -1, Interval::constant(0),
                             i.rn == i.rd ? -1 : i.rn, s.reg(i.rn), i.rd);
        set_fact = true;
        break;
      }
      case Mnemonic::TST:
        new_fact = FlagsFact::unknown();
        set_fact = true;
        break;
      case Mnemonic::MUL: {
        Interval v = s.reg(i.rn).mul(s.reg(i.rm));
        s.set_reg(i.rd, v);
        set_result_fact(i.rd, v, FactKind::NzOnly);
        break;
      }
      case Mnemonic::AND: case Mnemonic::ORR: case Mnemonic::EOR: case Mnemonic::BIC:
      case Mnemonic::MVN: {
        Interval lhs = s.reg(i.rn >= 0 ? i.rn : i.rd);
        Interval rhs = s.reg(i.rm);
        Interval v;
        switch (i.mnem) {
          case Mnemonic::AND: v = lhs.bit_and(rhs); break;
          case Mnemonic::ORR: v = lhs.bit_or(rhs); break;
          case Mnemonic::EOR: v = lhs.bit_xor(rhs); break;
          case Mnemonic::BIC:
            v = rhs.is_constant() && rhs.pure_unsigned()
                    ? lhs.bit_and(Interval::of_u32(~uint32_t(rhs.constant_value())))
                    : (lhs.pure_unsigned() ? Interval::of(0, lhs.hi()) : Interval::top());
            break;
          default:  // MVN
            v = rhs.is_constant() && rhs.pure_unsigned()
                    ? Interval::of_u32(~uint32_t(rhs.constant_value()))
                    : Interval::top();
            break;
        }
        s.set_reg(i.rd, v);
        set_result_fact(i.rd, v, FactKind::NzOnly);
        break;
      }
      case Mnemonic::LSL: case Mnemonic::LSR: case Mnemonic::ASR: case Mnemonic::ROR: {
        // Immediate forms shift Rm; register forms shift Rdn (== rn) by Rm.
        Interval src = i.has_imm ? s.reg(i.rm) : s.reg(i.rn);
        Interval amount = i.has_imm ? Interval::constant(i.imm) : s.reg(i.rm);
        Interval v;
        switch (i.mnem) {
          case Mnemonic::LSL: v = src.shl(amount); break;
          case Mnemonic::LSR: v = src.lshr(amount); break;
          case Mnemonic::ASR: v = src.ashr(amount); break;
          default: v = Interval::top(); break;
        }
        s.set_reg(i.rd, v);
        set_result_fact(i.rd, v, FactKind::NzOnly);
        break;
      }
      case Mnemonic::ADC: case Mnemonic::SBC: {
        Interval lhs = s.reg(i.rn);
        Interval rhs = s.reg(i.rm);
        Interval carry = Interval::of(0, 1);
        Interval v = i.mnem == Mnemonic::ADC ? lhs.add(rhs).add(carry)
                                             : lhs.sub(rhs).sub(Interval::of(0, 1));
        s.set_reg(i.rd, v);
        new_fact = FlagsFact::unknown();
        set_fact = true;
        break;
      }
      case Mnemonic::ADR:
        s.set_reg(i.rd, Interval::of_u32(*i.literal_address()));
        break;
      case Mnemonic::SXTB:
        s.set_reg(i.rd, s.reg(i.rm).is_constant() && s.reg(i.rm).pure_unsigned()
                            ? Interval::constant(int64_t(int8_t(uint8_t(s.reg(i.rm).constant_value()))))
                            : Interval::of(-128, 127));
        break;
      case Mnemonic::SXTH:
        s.set_reg(i.rd, s.reg(i.rm).is_constant() && s.reg(i.rm).pure_unsigned()
                            ? Interval::constant(int64_t(int16_t(uint16_t(s.reg(i.rm).constant_value()))))
                            : Interval::of(-32768, 32767));
        break;
      case Mnemonic::UXTB: {
        Interval src = s.reg(i.rm);
        s.set_reg(i.rd, src.is_constant() && src.pure_unsigned()
                            ? Interval::constant(src.constant_value() & 0xff)
                            : Interval::of(0, 255));
        break;
      }
      case Mnemonic::UXTH: {
        Interval src = s.reg(i.rm);
        s.set_reg(i.rd, src.is_constant() && src.pure_unsigned()
                            ? Interval::constant(src.constant_value() & 0xffff)
                            : Interval::of(0, 65535));
        break;
      }
      case Mnemonic::REV: case Mnemonic::REV16: case Mnemonic::REVSH:
        s.set_reg(i.rd, Interval::top());
        break;
      case Mnemonic::LDR: case Mnemonic::LDRB: case Mnemonic::LDRH:
      case Mnemonic::LDRSB: case Mnemonic::LDRSH: {
        Interval addr = mem_operand_addr(s, i);
        record_access(node, i, addr, results);
        bool sign = i.mnem == Mnemonic::LDRSB || i.mnem == Mnemonic::LDRSH;
        s.set_reg(i.rt, read_mem(s, addr, *i.mem_width, sign));
        break;
      }
      case Mnemonic::STR: case Mnemonic::STRB: case Mnemonic::STRH: {
        Interval addr = mem_operand_addr(s, i);
        record_access(node, i, addr, results);
        write_mem(s, addr, *i.mem_width, s.reg(i.rt));
        break;
      }
      case Mnemonic::LDM: {
        Interval base = s.reg(i.rn);
        record_access(node, i, base, results);
        int offset = 0;
        for (int r = 0; r < 8; r++) {
          if (!(i.reglist & (1u << r))) continue;
          s.set_reg(r, read_mem(s, base.add(Interval::constant(offset)), 4, false));
          offset += 4;
        }
        if (i.wback) s.set_reg(i.rn, base.add(Interval::constant(offset)));
        break;
      }
      case Mnemonic::STM: {
        Interval base = s.reg(i.rn);
        record_access(node, i, base, results);
        int offset = 0;
        for (int r = 0; r < 8; r++) {
          if (!(i.reglist & (1u << r))) continue;
          write_mem(s, base.add(Interval::constant(offset)), 4, s.reg(r));
          offset += 4;
        }
        s.set_reg(i.rn, base.add(Interval::constant(offset)));
        break;
      }
      case Mnemonic::PUSH: {
        int count = *i.reg_count;
        Interval sp = s.reg(REG_SP).sub(Interval::constant(4 * count));
        record_access(node, i, sp, results);
        s.set_reg(REG_SP, sp);
        int offset = 0;
        for (int r = 0; r < 16; r++) {
          if (!(i.reglist & (1u << r))) continue;
          write_mem(s, sp.add(Interval::constant(offset)), 4, s.reg(r == REG_LR ? REG_LR : r));
          offset += 4;
        }
        break;
      }
      case Mnemonic::POP: {
        Interval sp = s.reg(REG_SP);
        record_access(node, i, sp, results);
        int offset = 0;
        for (int r = 0; r < 16; r++) {
          if (!(i.reglist & (1u << r))) continue;
          if (r != REG_PC)
            s.set_reg(r, read_mem(s, sp.add(Interval::constant(offset)), 4, false));
          offset += 4;
        }
        s.set_reg(REG_SP, sp.add(Interval::constant(4 * *i.reg_count)));
        break;
      }
      case Mnemonic::MRS:
        s.set_reg(i.rd, Interval::top());
        break;
      case Mnemonic::MSR:
        if (i.imm == 8 || i.imm == 9) s.set_reg(REG_SP, Interval::top());
        new_fact = FlagsFact::unknown();
        set_fact = true;
        break;
      case Mnemonic::B: case Mnemonic::BX: case Mnemonic::BLX: case Mnemonic::BL:
        break;  // control flow lives on edges; BL's LR write too
      case Mnemonic::NOP: case Mnemonic::YIELD: case Mnemonic::SEV: case Mnemonic::HINT:
      case Mnemonic::WFE: case Mnemonic::WFI: case Mnemonic::CPS: case Mnemonic::DMB:
      case Mnemonic::DSB: case Mnemonic::ISB: case Mnemonic::SVC: case Mnemonic::BKPT:
      case Mnemonic::UDF:
        break;
      default:
        break;
    }
    if (set_fact) s.flags = new_fact;
  }

  AbstractState transfer_block(int node, const AbstractState& in, ValueResults* results) const {
    AbstractState s = in;
    const BasicBlock& bb = g_.block_of(node);
    for (const Instr& i : bb.instrs) exec_instr(i, s, node, results);
    return s;
  }

  // ---- guard refinement ----

  struct CondConstraint {
    // Relation imposed on (a, b) when the condition holds.
    enum Rel { Eq, Ne, Lt, Ge, Gt, Le, ULt, UGe, UGt, ULe, Mi, Pl, None } rel = None;
  };

  static CondConstraint::Rel cond_relation(Cond c, bool negate) {
    using R = CondConstraint::Rel;
    R rel;
    switch (c) {
      case Cond::EQ: rel = R::Eq; break;
      case Cond::NE: rel = R::Ne; break;
      case Cond::CS: rel = R::UGe; break;
      case Cond::CC: rel = R::ULt; break;
      case Cond::MI: rel = R::Mi; break;
      case Cond::PL: rel = R::Pl; break;
      case Cond::HI: rel = R::UGt; break;
      case Cond::LS: rel = R::ULe; break;
      case Cond::GE: rel = R::Ge; break;
      case Cond::LT: rel = R::Lt; break;
      case Cond::GT: rel = R::Gt; break;
      case Cond::LE: rel = R::Le; break;
      default: return R::None;
    }
    if (!negate) return rel;
    switch (rel) {
      case R::Eq: return R::Ne;
      case R::Ne: return R::Eq;
      case R::Lt: return R::Ge;
      case R::Ge: return R::Lt;
      case R::Gt: return R::Le;
      case R::Le: return R::Gt;
      case R::ULt: return R::UGe;
      case R::UGe: return R::ULt;
      case R::UGt: return R::ULe;
      case R::ULe: return R::UGt;
      case R::Mi: return R::Pl;
      case R::Pl: return R::Mi;
      default: return R::None;
    }
  }

  // Refines state through `cond` given the flags fact. Returns false when
  // the condition is definitely false (edge infeasible).
  bool refine_by_cond(AbstractState& s, Cond cond, bool negate) const {
    const FlagsFact& f = s.flags;
    if (!f.valid()) return true;
    using R = CondConstraint::Rel;
    R rel = cond_relation(cond, negate);
    if (rel == R::None) return true;

    // Gate by what the producing instruction's flags actually encode.
    switch (rel) {
      case R::Eq: case R::Ne: case R::Mi: case R::Pl:
        break;
      case R::Lt: case R::Ge: case R::Gt: case R::Le:
        if (f.kind == FactKind::NzOnly) return true;
        break;
      case R::ULt: case R::UGe: case R::UGt: case R::ULe:
        if (f.kind != FactKind::Cmp) return true;
        break;
      default:
        return true;
    }

    Interval a = f.a;
    Interval b = f.b;
    // Only refine when the operand encodings are unambiguous for the
    // relation's signedness; otherwise accept the edge unrefined.
    bool both_signed = a.pure_signed() && b.pure_signed();
    bool both_unsigned = a.pure_unsigned() && b.pure_unsigned();

    Interval na = a, nb = b;
    switch (rel) {
      case R::Eq:
        if (!(both_signed || both_unsigned)) return true;
        na = a.meet(b);
        nb = na;
        break;
      case R::Ne:
        if (!(both_signed || both_unsigned)) return true;
        if (a.is_constant() && b.is_constant() && a == b) return false;
        na = a.restrict_ne(b);
        nb = b.restrict_ne(a);
        break;
      case R::Lt:
      case R::ULt:
        if (rel == R::Lt ? !both_signed : !both_unsigned) return true;
        na = a.restrict_lt(b.hi());
        nb = b.restrict_gt(a.lo());
        break;
      case R::Ge:
      case R::UGe:
        if (rel == R::Ge ? !both_signed : !both_unsigned) return true;
        na = a.restrict_ge(b.lo());
        nb = b.restrict_le(a.hi());
        break;
      case R::Gt:
      case R::UGt:
        if (rel == R::Gt ? !both_signed : !both_unsigned) return true;
        na = a.restrict_gt(b.lo());
        nb = b.restrict_lt(a.hi());
        break;
      case R::Le:
      case R::ULe:
        if (rel == R::Le ? !both_signed : !both_unsigned) return true;
        na = a.restrict_le(b.hi());
        nb = b.restrict_ge(a.lo());
        break;
      case R::Mi:
        if (a.pure_signed())
          na = a.restrict_lt(0);
        else if (a.pure_unsigned())
          na = a.meet(Interval::of(int64_t(1) << 31, (int64_t(1) << 32) - 1));
        else
          return true;
        break;
      case R::Pl:
        if (a.pure_signed())
          na = a.restrict_ge(0);
        else if (a.pure_unsigned())
          na = a.meet(Interval::of(0, (int64_t(1) << 31) - 1));
        else
          return true;
        break;
      default:
        return true;
    }

    if (na.is_bottom() || nb.is_bottom()) return false;
    if (f.ra >= 0) s.set_reg(f.ra, s.reg(f.ra).meet(na));
    if (f.rb >= 0) s.set_reg(f.rb, s.reg(f.rb).meet(nb));
    if (f.rres >= 0) {
      // The result register holds a - b; constrain it through the relation.
      Interval d = na.sub(nb);
      s.set_reg(f.rres, s.reg(f.rres).meet(d));
    }
    s.flags.a = na;
    s.flags.b = nb;
    for (int r = 0; r < 15; r++)
      if (s.reg(r).is_bottom()) return false;
    return true;
  }

  // State flowing along a context edge, or bottom when the guard rules the
  // edge out.
  AbstractState apply_edge(const CtxEdge& e, const AbstractState& src_out) const {
    if (src_out.bottom) return src_out;
    AbstractState s = src_out;
    const BasicBlock& bb = g_.block_of(e.src_node);
    const Instr& t = bb.terminator();
    if (e.cfg_edge >= 0) {
      const CfgEdge& ce = g_.cfg().edge(e.cfg_edge);
      if (t.kind == InstrKind::BranchCond) {
        bool negate = ce.kind == EdgeKind::FallThrough;
        if (!refine_by_cond(s, t.cond, negate)) return AbstractState{};  // bottom
      }
      if (ce.kind == EdgeKind::Call && !ce.tail_call &&
          (t.mnem == Mnemonic::BL || t.mnem == Mnemonic::BLX)) {
        s.set_reg(REG_LR, Interval::of_u32((t.addr + t.size) | 1u));
      }
    }
    return s;
  }

  // ---- fixpoint ----

  void run_fixpoint(std::vector<AbstractState>& in_states) {
    size_t n = g_.nodes().size();
    in_states.assign(n, AbstractState{});
    in_states[size_t(g_.entry_node())] = AbstractState::initial(config_.initial_sp);

    std::vector<int> visits(n, 0);
    std::set<std::pair<int, int>> work;  // (rpo index, node)
    work.insert({rpo_index_[size_t(g_.entry_node())], g_.entry_node()});

    while (!work.empty()) {
      auto [rpo, node] = *work.begin();
      work.erase(work.begin());
      if (++visits[size_t(node)] > config_.max_visits)
        throw AnalysisError("value analysis exceeded the visit cap at node " +
                            std::to_string(node));
      AbstractState out = transfer_block(node, in_states[size_t(node)], nullptr);
      for (int eid : g_.out_edges(node)) {
        const CtxEdge& e = g_.edge(eid);
        if (e.dst_node < 0) continue;
        AbstractState contrib = apply_edge(e, out);
        if (contrib.bottom) continue;
        AbstractState& dst = in_states[size_t(e.dst_node)];
        AbstractState joined = dst.join(contrib);
        if (is_widen_point(e.dst_node) && visits[size_t(e.dst_node)] >= config_.widen_after) {
          AbstractState widened = dst;
          widened.bottom = dst.bottom && joined.bottom;
          if (!dst.bottom && !joined.bottom) {
            for (size_t r = 0; r < dst.regs.size(); r++)
              widened.regs[r] = dst.regs[r].widen(joined.regs[r], thresholds_);
            widened.flags = joined.flags;
            if (!(dst.flags == joined.flags)) widened.flags = FlagsFact::unknown();
            widened.ram_smashed = joined.ram_smashed;
            widened.mem.clear();
            for (const auto& [addr, v] : dst.mem) {
              auto it = joined.mem.find(addr);
              widened.mem[addr] =
                  it == joined.mem.end() ? Interval::top() : v.widen(it->second, thresholds_);
            }
            for (const auto& [addr, v] : joined.mem)
              if (!dst.mem.count(addr)) widened.mem[addr] = Interval::top();
          } else {
            widened = joined;
          }
          joined = widened;
        }
        if (!(joined == dst)) {
          dst = joined;
          work.insert({rpo_index_[size_t(e.dst_node)], e.dst_node});
        }
      }
    }

    // One narrowing sweep in RPO: recompute inputs without widening, keeping
    // the meet with the fixpoint state so the result only shrinks.
    std::vector<int> order(n);
    for (size_t i = 0; i < n; i++) order[i] = int(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return rpo_index_[size_t(a)] < rpo_index_[size_t(b)]; });
    std::vector<AbstractState> outs(n);
    for (int node : order) outs[size_t(node)] = transfer_block(node, in_states[size_t(node)], nullptr);
    for (int node : order) {
      if (node == g_.entry_node()) continue;
      AbstractState acc;
      for (int eid : g_.in_edges(node)) {
        const CtxEdge& e = g_.edge(eid);
        AbstractState contrib = apply_edge(e, outs[size_t(e.src_node)]);
        acc = acc.join(contrib);
      }
      if (acc.bottom) continue;
      AbstractState& cur = in_states[size_t(node)];
      if (cur.bottom) continue;
      AbstractState refined;
      refined.bottom = false;
      for (size_t r = 0; r < cur.regs.size(); r++)
        refined.regs[r] = cur.regs[r].narrow(acc.regs[r]);
      refined.flags = cur.flags;
      refined.ram_smashed = cur.ram_smashed && acc.ram_smashed;
      refined.mem = cur.mem;
      for (auto& [addr, v] : refined.mem) {
        auto it = acc.mem.find(addr);
        if (it != acc.mem.end()) v = v.narrow(it->second);
      }
      cur = refined;
    }
  }

  // ---- loop bounds by bounded abstract unrolling ----

  struct PassResult {
    AbstractState back_state;
    bool latch_reached = false;
    bool exit_feasible = false;
  };

  PassResult run_region_pass(const ContextualCfg::LoopInstance& inst, const Loop& loop,
                             const std::vector<AbstractState>& fix_states,
                             const AbstractState& header_in) const {
    PassResult result;
    std::set<int> members;  // ctx nodes inside the loop
    for (int b : loop.blocks)
      for (int nid : g_.nodes_of_block(b)) members.insert(nid);
    std::set<int> back_edge_set(inst.back_edges.begin(), inst.back_edges.end());

    std::map<int, AbstractState> state;
    std::set<std::pair<int, int>> work;
    std::map<int, int> visits;
    for (int h : inst.header_nodes) {
      state[h] = header_in;
      work.insert({rpo_index_[size_t(h)], h});
    }
    // First-rest contexts put the re-entry header in a different node, so a
    // pass may start at the First copy and the Rest copy receives the next
    // pass's state; both header copies seed from header_in only when they
    // appear in header_nodes.

    int pass_cap = 4 * int(members.size()) + 64;
    while (!work.empty()) {
      auto [rpo, node] = *work.begin();
      work.erase(work.begin());
      if (++visits[node] > pass_cap) {
        // Inner cycle refuses to settle; give up on precision.
        result.back_state = AbstractState::initial(0);
        result.back_state.ram_smashed = true;
        result.latch_reached = true;
        result.exit_feasible = true;
        return result;
      }
      AbstractState out = transfer_block(node, state[node], nullptr);
      for (int eid : g_.out_edges(node)) {
        const CtxEdge& e = g_.edge(eid);
        AbstractState contrib = apply_edge(e, out);
        if (back_edge_set.count(eid)) {
          result.latch_reached = true;
          if (!contrib.bottom) result.back_state = result.back_state.join(contrib);
          continue;
        }
        if (e.dst_node < 0 || !members.count(e.dst_node)) {
          // Leaving the loop (exit edge, call into another routine, or
          // scope exit). Calls come back through the continuation, which we
          // approximate with the whole-program fixpoint state.
          if (e.cfg_edge >= 0 && g_.cfg().edge(e.cfg_edge).kind == EdgeKind::Call) {
            const CfgEdge& ce = g_.cfg().edge(e.cfg_edge);
            if (ce.continuation >= 0 && !contrib.bottom) {
              int src_ctx = g_.node(node).ctx;
              int cont_node = g_.find_node(ce.continuation, src_ctx);
              if (cont_node >= 0 && members.count(cont_node)) {
                const AbstractState& after = fix_states[size_t(cont_node)];
                auto it = state.find(cont_node);
                AbstractState joined = it == state.end() ? after : it->second.join(after);
                if (it == state.end() || !(joined == it->second)) {
                  state[cont_node] = joined;
                  work.insert({rpo_index_[size_t(cont_node)], cont_node});
                }
              }
            }
            continue;
          }
          if (!contrib.bottom) result.exit_feasible = true;
          continue;
        }
        if (contrib.bottom) continue;
        auto it = state.find(e.dst_node);
        AbstractState joined = it == state.end() ? contrib : it->second.join(contrib);
        // Inner-loop cycles: widen once visits pile up so the pass ends.
        if (it != state.end() && visits[e.dst_node] > config_.widen_after &&
            is_widen_point(e.dst_node)) {
          AbstractState w = it->second;
          for (size_t r = 0; r < w.regs.size(); r++)
            w.regs[r] = it->second.regs[r].widen(joined.regs[r], thresholds_);
          w.flags = FlagsFact::unknown();
          w.ram_smashed = joined.ram_smashed;
          w.mem.clear();
          joined = w;
        }
        if (it == state.end() || !(joined == it->second)) {
          state[e.dst_node] = joined;
          work.insert({rpo_index_[size_t(e.dst_node)], e.dst_node});
        }
      }
    }
    return result;
  }

  void derive_loop_bounds(const std::vector<AbstractState>& fix_states, ValueResults& results) {
    const auto& instances = g_.loop_instances();
    for (size_t idx = 0; idx < instances.size(); idx++) {
      const auto& inst = instances[idx];
      const Loop& loop = g_.cfg().loop(inst.loop);

      // Entry state: join over entry edges, using fixpoint out-states.
      AbstractState entry;
      for (int eid : inst.entry_edges) {
        const CtxEdge& e = g_.edge(eid);
        AbstractState out = transfer_block(e.src_node, fix_states[size_t(e.src_node)], nullptr);
        entry = entry.join(apply_edge(e, out));
      }
      bool header_is_program_entry = false;
      for (int h : inst.header_nodes)
        if (h == g_.entry_node()) header_is_program_entry = true;
      if (header_is_program_entry)
        entry = entry.join(AbstractState::initial(config_.initial_sp));
      if (entry.bottom) continue;  // unreachable loop

      uint64_t latches = 0;
      std::optional<uint64_t> min_bound;
      std::optional<uint64_t> max_bound;
      AbstractState h = entry;
      AbstractState prev;
      for (uint64_t pass = 1; pass <= config_.max_unroll; pass++) {
        PassResult r = run_region_pass(inst, loop, fix_states, h);
        if (r.exit_feasible && !min_bound) min_bound = pass - 1;
        if (!r.latch_reached) {
          max_bound = pass - 1;
          break;
        }
        if (r.back_state.bottom) {
          max_bound = latches + 1;  // latch ran, back edge ruled out
          break;
        }
        latches++;
        if (!prev.bottom && prev == r.back_state) break;  // converged, no finite bound
        prev = r.back_state;
        h = r.back_state;
      }
      if (max_bound) {
        LoopBound b;
        b.min = min_bound.value_or(0);
        b.max = *max_bound;
        if (b.min > b.max) b.min = b.max;
        b.provenance = BoundProvenance::Analysis;
        results.loop_bounds[int(idx)] = b;
      }
    }
  }

  const ContextualCfg& g_;
  const MemoryImage& image_;
  const AnnotationSet& ann_;
  ValueAnalysisConfig config_;
  std::vector<int64_t> thresholds_;
  std::vector<int> rpo_index_;
};

ValueResults Analyzer::run() {
  ValueResults results;
  run_fixpoint(results.in_states);

  // Final recording pass: access classes and infeasible edges from the
  // narrowed states.
  for (size_t node = 0; node < g_.nodes().size(); node++) {
    const AbstractState& in = results.in_states[node];
    if (in.bottom) {
      // Unreachable node: every outgoing edge is trivially infeasible, but
      // reachability already excludes it from the ILP; skip.
      continue;
    }
    AbstractState out = transfer_block(int(node), in, &results);
    for (int eid : g_.out_edges(int(node))) {
      const CtxEdge& e = g_.edge(eid);
      AbstractState refined = apply_edge(e, out);
      if (refined.bottom) results.infeasible_edges.insert(eid);
    }
  }

  derive_loop_bounds(results.in_states, results);
  return results;
}

}  // namespace

ValueResults analyze(const ContextualCfg& ctx_cfg, const MemoryImage& image,
                     const AnnotationSet& annotations, const ValueAnalysisConfig& config) {
  Analyzer a(ctx_cfg, image, annotations, config);
  return a.run();
}

LoopBound bound_for(const ContextualCfg& ctx_cfg, int loop_instance, const ValueResults& results,
                    const AnnotationSet& annotations) {
  const auto& inst = ctx_cfg.loop_instances().at(size_t(loop_instance));
  uint32_t head_addr = ctx_cfg.cfg().block(ctx_cfg.cfg().loop(inst.loop).header).start;

  auto ann_it = annotations.loop_bounds.find(head_addr);
  if (ann_it != annotations.loop_bounds.end() &&
      ann_it->second.provenance == BoundProvenance::Annotation)
    return LoopBound{ann_it->second.min, ann_it->second.max, BoundProvenance::Annotation};

  auto an_it = results.loop_bounds.find(loop_instance);
  if (an_it != results.loop_bounds.end()) return an_it->second;

  if (ann_it != annotations.loop_bounds.end())
    return LoopBound{ann_it->second.min, ann_it->second.max, ann_it->second.provenance};

  char buf[16];
  snprintf(buf, sizeof buf, "%x", head_addr);
  throw UnboundedLoopError("no bound for loop at 0x" + std::string(buf), head_addr);
}

}  // namespace wcea
