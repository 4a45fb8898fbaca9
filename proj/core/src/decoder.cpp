#include "wcea/decoder.hpp"

#include <bit>
#include <sstream>

#include "wcea/errors.hpp"

namespace wcea {

namespace {

int32_t sign_extend(uint32_t value, int bits) {
  uint32_t mask = 1u << (bits - 1);
  return int32_t((value ^ mask) - mask);
}

Instr make(uint32_t addr, Mnemonic m, InstrKind k) {
  Instr i;
  i.addr = addr;
  i.mnem = m;
  i.kind = k;
  return i;
}

// 00xxxx: shifts, add/sub (register and 3-bit immediate), mov/cmp/add/sub
// with 8-bit immediate.
Instr decode_basic(uint32_t addr, uint16_t hw) {
  uint16_t op = (hw >> 11) & 0x1f;
  Instr i = make(addr, Mnemonic::NOP, InstrKind::Other);
  i.sets_flags = true;
  switch (op) {
    case 0b00000: {  // LSL imm / MOV reg
      uint16_t imm5 = (hw >> 6) & 0x1f;
      i.rd = hw & 7;
      i.rm = (hw >> 3) & 7;
      if (imm5 == 0) {
        i.mnem = Mnemonic::MOV;
      } else {
        i.mnem = Mnemonic::LSL;
        i.imm = imm5;
        i.has_imm = true;
      }
      return i;
    }
    case 0b00001:
    case 0b00010: {  // LSR / ASR imm (0 encodes shift by 32)
      uint16_t imm5 = (hw >> 6) & 0x1f;
      i.mnem = op == 0b00001 ? Mnemonic::LSR : Mnemonic::ASR;
      i.rd = hw & 7;
      i.rm = (hw >> 3) & 7;
      i.imm = imm5 == 0 ? 32 : imm5;
      i.has_imm = true;
      return i;
    }
    case 0b00011: {  // ADD/SUB register or 3-bit immediate
      bool is_sub = (hw >> 9) & 1;
      bool is_imm = (hw >> 10) & 1;
      i.mnem = is_sub ? Mnemonic::SUB : Mnemonic::ADD;
      i.rd = hw & 7;
      i.rn = (hw >> 3) & 7;
      if (is_imm) {
        i.imm = (hw >> 6) & 7;
        i.has_imm = true;
      } else {
        i.rm = (hw >> 6) & 7;
      }
      return i;
    }
    case 0b00100:  // MOVS Rd, #imm8
      i.mnem = Mnemonic::MOV;
      i.rd = (hw >> 8) & 7;
      i.imm = hw & 0xff;
      i.has_imm = true;
      return i;
    case 0b00101:  // CMP Rn, #imm8
      i.mnem = Mnemonic::CMP;
      i.rn = (hw >> 8) & 7;
      i.imm = hw & 0xff;
      i.has_imm = true;
      return i;
    case 0b00110:
    case 0b00111:  // ADDS/SUBS Rdn, #imm8
      i.mnem = op == 0b00110 ? Mnemonic::ADD : Mnemonic::SUB;
      i.rd = (hw >> 8) & 7;
      i.rn = i.rd;
      i.imm = hw & 0xff;
      i.has_imm = true;
      return i;
  }
  throw DecodeError("undefined encoding", addr, hw);
}

// 010000: data-processing register group.
Instr decode_dp(uint32_t addr, uint16_t hw) {
  static constexpr Mnemonic table[16] = {
      Mnemonic::AND, Mnemonic::EOR, Mnemonic::LSL, Mnemonic::LSR,
      Mnemonic::ASR, Mnemonic::ADC, Mnemonic::SBC, Mnemonic::ROR,
      Mnemonic::TST, Mnemonic::RSB, Mnemonic::CMP, Mnemonic::CMN,
      Mnemonic::ORR, Mnemonic::MUL, Mnemonic::BIC, Mnemonic::MVN,
  };
  uint16_t op = (hw >> 6) & 0xf;
  Instr i = make(addr, table[op], InstrKind::Other);
  i.sets_flags = true;
  int8_t rdn = hw & 7;
  int8_t rm = (hw >> 3) & 7;
  switch (table[op]) {
    case Mnemonic::TST:
    case Mnemonic::CMP:
    case Mnemonic::CMN:
      i.rn = rdn;
      i.rm = rm;
      break;
    case Mnemonic::RSB:  // RSBS Rd, Rn, #0
      i.rd = rdn;
      i.rn = rm;
      i.imm = 0;
      i.has_imm = true;
      break;
    case Mnemonic::MVN:
      i.rd = rdn;
      i.rm = rm;
      break;
    case Mnemonic::MUL:  // MULS Rdm, Rn, Rdm
      i.kind = InstrKind::Multiply;
      i.rd = rdn;
      i.rn = rm;
      i.rm = rdn;
      break;
    default:  // two-operand Rdn, Rm
      i.rd = rdn;
      i.rn = rdn;
      i.rm = rm;
      break;
  }
  return i;
}

// 010001: high-register ADD/CMP/MOV and BX/BLX.
Instr decode_special(uint32_t addr, uint16_t hw) {
  uint16_t op = (hw >> 8) & 3;
  int8_t rm = (hw >> 3) & 0xf;
  int8_t rdn = int8_t((hw & 7) | ((hw >> 4) & 8));
  switch (op) {
    case 0: {
      Instr i = make(addr, Mnemonic::ADD, InstrKind::Other);
      i.rd = rdn;
      i.rn = rdn;
      i.rm = rm;
      if (rdn == REG_PC) i.kind = InstrKind::BranchUncond;  // ADD PC, Rm
      return i;
    }
    case 1: {
      Instr i = make(addr, Mnemonic::CMP, InstrKind::Other);
      i.sets_flags = true;
      i.rn = rdn;
      i.rm = rm;
      return i;
    }
    case 2: {
      Instr i = make(addr, Mnemonic::MOV, InstrKind::Other);
      i.rd = rdn;
      i.rm = rm;
      if (rdn == REG_PC) i.kind = InstrKind::BranchUncond;  // MOV PC, Rm
      return i;
    }
    default: {  // BX / BLX
      if (hw & 7) throw DecodeError("undefined encoding", addr, hw);
      bool link = (hw >> 7) & 1;
      Instr i = make(addr, link ? Mnemonic::BLX : Mnemonic::BX,
                     link          ? InstrKind::Call
                     : rm == REG_LR ? InstrKind::Return
                                    : InstrKind::BranchUncond);
      i.rm = rm;
      return i;
    }
  }
}

// 0101: load/store with register offset.
Instr decode_ldst_reg(uint32_t addr, uint16_t hw) {
  static constexpr struct {
    Mnemonic m;
    uint8_t width;
    bool load;
  } table[8] = {
      {Mnemonic::STR, 4, false},  {Mnemonic::STRH, 2, false}, {Mnemonic::STRB, 1, false},
      {Mnemonic::LDRSB, 1, true}, {Mnemonic::LDR, 4, true},   {Mnemonic::LDRH, 2, true},
      {Mnemonic::LDRB, 1, true},  {Mnemonic::LDRSH, 2, true},
  };
  const auto& e = table[(hw >> 9) & 7];
  Instr i = make(addr, e.m, e.load ? InstrKind::Load : InstrKind::Store);
  i.rt = hw & 7;
  i.rn = (hw >> 3) & 7;
  i.rm = (hw >> 6) & 7;
  i.mem_width = e.width;
  return i;
}

// 1011: the miscellaneous page.
Instr decode_misc(uint32_t addr, uint16_t hw) {
  if ((hw & 0xff00) == 0xb000) {  // ADD/SUB SP, #imm7<<2
    Instr i = make(addr, (hw & 0x80) ? Mnemonic::SUB : Mnemonic::ADD, InstrKind::Other);
    i.rd = REG_SP;
    i.rn = REG_SP;
    i.imm = (hw & 0x7f) << 2;
    i.has_imm = true;
    return i;
  }
  if ((hw & 0xff00) == 0xb200) {  // sign/zero extend
    static constexpr Mnemonic table[4] = {Mnemonic::SXTH, Mnemonic::SXTB, Mnemonic::UXTH,
                                          Mnemonic::UXTB};
    Instr i = make(addr, table[(hw >> 6) & 3], InstrKind::Other);
    i.rd = hw & 7;
    i.rm = (hw >> 3) & 7;
    return i;
  }
  if ((hw & 0xfe00) == 0xb400) {  // PUSH
    Instr i = make(addr, Mnemonic::PUSH, InstrKind::LoadStoreMultiple);
    i.reglist = hw & 0xff;
    if (hw & 0x100) i.reglist |= 1u << REG_LR;
    if (i.reglist == 0) throw DecodeError("PUSH with empty register list", addr, hw);
    i.mem_width = 4;
    i.reg_count = uint8_t(std::popcount(i.reglist));
    return i;
  }
  if ((hw & 0xffef) == 0xb662) {  // CPS
    Instr i = make(addr, Mnemonic::CPS, InstrKind::Other);
    i.imm = (hw >> 4) & 1;  // 0 = enable (CPSIE), 1 = disable (CPSID)
    i.has_imm = true;
    return i;
  }
  if ((hw & 0xff00) == 0xba00) {  // REV/REV16/REVSH
    uint16_t sub = (hw >> 6) & 3;
    if (sub == 2) throw DecodeError("undefined encoding", addr, hw);
    static constexpr Mnemonic table[4] = {Mnemonic::REV, Mnemonic::REV16, Mnemonic::NOP,
                                          Mnemonic::REVSH};
    Instr i = make(addr, table[sub], InstrKind::Other);
    i.rd = hw & 7;
    i.rm = (hw >> 3) & 7;
    return i;
  }
  if ((hw & 0xfe00) == 0xbc00) {  // POP
    Instr i = make(addr, Mnemonic::POP, InstrKind::LoadStoreMultiple);
    i.reglist = hw & 0xff;
    if (hw & 0x100) {
      i.reglist |= 1u << REG_PC;
      i.kind = InstrKind::Return;
    }
    if (i.reglist == 0) throw DecodeError("POP with empty register list", addr, hw);
    i.mem_width = 4;
    i.reg_count = uint8_t(std::popcount(i.reglist));
    return i;
  }
  if ((hw & 0xff00) == 0xbe00) {  // BKPT
    Instr i = make(addr, Mnemonic::BKPT, InstrKind::Other);
    i.imm = hw & 0xff;
    i.has_imm = true;
    i.analysis_opaque = true;
    return i;
  }
  if ((hw & 0xff00) == 0xbf00) {  // hints
    if (hw & 0x0f) throw DecodeError("undefined encoding (IT space)", addr, hw);
    uint16_t hint = (hw >> 4) & 0xf;
    Instr i = make(addr, Mnemonic::NOP, InstrKind::Other);
    switch (hint) {
      case 0: i.mnem = Mnemonic::NOP; break;
      case 1: i.mnem = Mnemonic::YIELD; break;
      case 2: i.mnem = Mnemonic::WFE; i.analysis_opaque = true; break;
      case 3: i.mnem = Mnemonic::WFI; i.analysis_opaque = true; break;
      case 4: i.mnem = Mnemonic::SEV; break;
      default:
        i.mnem = Mnemonic::HINT;
        i.undefined_hint = true;  // executes as NOP, flagged for a warning
        i.imm = hint;
        i.has_imm = true;
        break;
    }
    return i;
  }
  throw DecodeError("undefined encoding", addr, hw);
}

Instr decode16(uint32_t addr, uint16_t hw) {
  switch (hw >> 12) {
    case 0x0:
    case 0x1:
    case 0x2:
    case 0x3:
      return decode_basic(addr, hw);
    case 0x4: {
      if ((hw >> 10) == 0b010000) return decode_dp(addr, hw);
      if ((hw >> 10) == 0b010001) return decode_special(addr, hw);
      // LDR literal
      Instr i = make(addr, Mnemonic::LDR, InstrKind::Load);
      i.rt = (hw >> 8) & 7;
      i.rn = REG_PC;
      i.imm = (hw & 0xff) << 2;
      i.has_imm = true;
      i.mem_width = 4;
      return i;
    }
    case 0x5:
      return decode_ldst_reg(addr, hw);
    case 0x6:
    case 0x7: {  // STR/LDR, STRB/LDRB immediate
      bool byte = (hw >> 12) == 0x7;
      bool load = (hw >> 11) & 1;
      Mnemonic m = byte ? (load ? Mnemonic::LDRB : Mnemonic::STRB)
                        : (load ? Mnemonic::LDR : Mnemonic::STR);
      Instr i = make(addr, m, load ? InstrKind::Load : InstrKind::Store);
      i.rt = hw & 7;
      i.rn = (hw >> 3) & 7;
      i.imm = ((hw >> 6) & 0x1f) << (byte ? 0 : 2);
      i.has_imm = true;
      i.mem_width = byte ? 1 : 4;
      return i;
    }
    case 0x8: {  // STRH/LDRH immediate
      bool load = (hw >> 11) & 1;
      Instr i = make(addr, load ? Mnemonic::LDRH : Mnemonic::STRH,
                     load ? InstrKind::Load : InstrKind::Store);
      i.rt = hw & 7;
      i.rn = (hw >> 3) & 7;
      i.imm = ((hw >> 6) & 0x1f) << 1;
      i.has_imm = true;
      i.mem_width = 2;
      return i;
    }
    case 0x9: {  // STR/LDR SP-relative
      bool load = (hw >> 11) & 1;
      Instr i = make(addr, load ? Mnemonic::LDR : Mnemonic::STR,
                     load ? InstrKind::Load : InstrKind::Store);
      i.rt = (hw >> 8) & 7;
      i.rn = REG_SP;
      i.imm = (hw & 0xff) << 2;
      i.has_imm = true;
      i.mem_width = 4;
      return i;
    }
    case 0xa: {  // ADR / ADD Rd, SP, #imm
      bool sp = (hw >> 11) & 1;
      Instr i = make(addr, sp ? Mnemonic::ADD : Mnemonic::ADR, InstrKind::Other);
      i.rd = (hw >> 8) & 7;
      i.rn = sp ? REG_SP : REG_PC;
      i.imm = (hw & 0xff) << 2;
      i.has_imm = true;
      return i;
    }
    case 0xb:
      return decode_misc(addr, hw);
    case 0xc: {  // STM / LDM
      bool load = (hw >> 11) & 1;
      Instr i = make(addr, load ? Mnemonic::LDM : Mnemonic::STM, InstrKind::LoadStoreMultiple);
      i.rn = (hw >> 8) & 7;
      i.reglist = hw & 0xff;
      if (i.reglist == 0)
        throw DecodeError(load ? "LDM with empty register list" : "STM with empty register list",
                          addr, hw);
      i.mem_width = 4;
      i.reg_count = uint8_t(std::popcount(i.reglist));
      // LDM writes back unless Rn is in the list; STM always writes back.
      i.wback = !load || !(i.reglist & (1u << i.rn));
      return i;
    }
    case 0xd: {  // B<cond>, UDF, SVC
      uint16_t cond = (hw >> 8) & 0xf;
      if (cond == 0xe) throw DecodeError("permanently undefined (UDF)", addr, hw);
      if (cond == 0xf) {
        Instr i = make(addr, Mnemonic::SVC, InstrKind::Other);
        i.imm = hw & 0xff;
        i.has_imm = true;
        i.analysis_opaque = true;
        return i;
      }
      Instr i = make(addr, Mnemonic::B, InstrKind::BranchCond);
      i.cond = Cond(cond);
      i.target = uint32_t(int64_t(addr) + 4 + sign_extend(uint32_t(hw & 0xff) << 1, 9));
      i.has_target = true;
      return i;
    }
    case 0xe: {
      if (hw & 0x0800) break;  // 0xE800+: 32-bit prefix, not valid ARMv6-M
      Instr i = make(addr, Mnemonic::B, InstrKind::BranchUncond);
      i.target = uint32_t(int64_t(addr) + 4 + sign_extend(uint32_t(hw & 0x7ff) << 1, 12));
      i.has_target = true;
      return i;
    }
  }
  throw DecodeError("undefined encoding", addr, hw);
}

Instr decode32(uint32_t addr, uint16_t hw1, uint16_t hw2) {
  if ((hw1 >> 11) != 0b11110)
    throw DecodeError("32-bit encoding not defined in ARMv6-M", addr, hw1, hw2);
  if ((hw2 & 0xd000) == 0xd000) {  // BL
    uint32_t s = (hw1 >> 10) & 1;
    uint32_t imm10 = hw1 & 0x3ff;
    uint32_t j1 = (hw2 >> 13) & 1;
    uint32_t j2 = (hw2 >> 11) & 1;
    uint32_t imm11 = hw2 & 0x7ff;
    uint32_t i1 = (~(j1 ^ s)) & 1;
    uint32_t i2 = (~(j2 ^ s)) & 1;
    uint32_t raw = (s << 24) | (i1 << 23) | (i2 << 22) | (imm10 << 12) | (imm11 << 1);
    Instr i = make(addr, Mnemonic::BL, InstrKind::Call);
    i.size = 4;
    i.target = uint32_t(int64_t(addr) + 4 + sign_extend(raw, 25)) & ~1u;
    i.has_target = true;
    return i;
  }
  if ((hw2 & 0xc000) == 0x8000 && (hw2 & 0x1000) == 0) {
    if ((hw1 & 0xfff0) == 0xf380 && (hw2 & 0xff00) == 0x8800) {  // MSR
      Instr i = make(addr, Mnemonic::MSR, InstrKind::Other);
      i.size = 4;
      i.rn = hw1 & 0xf;
      i.imm = hw2 & 0xff;  // SYSm
      i.has_imm = true;
      return i;
    }
    if (hw1 == 0xf3ef && (hw2 & 0xf000) == 0x8000) {  // MRS
      Instr i = make(addr, Mnemonic::MRS, InstrKind::Other);
      i.size = 4;
      i.rd = (hw2 >> 8) & 0xf;
      i.imm = hw2 & 0xff;
      i.has_imm = true;
      return i;
    }
    if (hw1 == 0xf3bf && (hw2 & 0xff00) == 0x8f00) {  // barriers
      uint16_t op = (hw2 >> 4) & 0xf;
      Mnemonic m;
      if (op == 4) m = Mnemonic::DSB;
      else if (op == 5) m = Mnemonic::DMB;
      else if (op == 6) m = Mnemonic::ISB;
      else throw DecodeError("undefined encoding", addr, hw1, hw2);
      Instr i = make(addr, m, InstrKind::Other);
      i.size = 4;
      return i;
    }
  }
  throw DecodeError("undefined encoding", addr, hw1, hw2);
}

}  // namespace

Instr decode_raw(uint32_t addr, uint16_t hw1, uint16_t hw2, bool hw2_valid) {
  if ((hw1 >> 11) >= 0b11101) {
    if (!hw2_valid) throw DecodeError("truncated 32-bit encoding", addr, hw1);
    return decode32(addr, hw1, hw2);
  }
  return decode16(addr, hw1);
}

Instr decode_one(const MemoryImage& image, uint32_t addr) {
  if (addr & 1) throw AddressError("unaligned instruction address", addr);
  if (!image.is_executable(addr)) throw AddressError("address not executable", addr);
  uint16_t hw1 = image.read16(addr);
  bool wide = (hw1 >> 11) >= 0b11101;
  uint16_t hw2 = 0;
  bool hw2_valid = false;
  if (wide && image.is_executable(addr + 2)) {
    hw2 = image.read16(addr + 2);
    hw2_valid = true;
  }
  return decode_raw(addr, hw1, hw2, hw2_valid);
}

std::vector<Instr> decode_range(const MemoryImage& image, uint32_t start, uint32_t end) {
  if (start > end) throw AddressError("range start past end", start);
  std::vector<Instr> out;
  uint32_t addr = start;
  while (addr < end) {
    Instr i = decode_one(image, addr);
    if (addr + i.size > end)
      throw DecodeError("truncated 32-bit encoding", addr, image.read16(addr));
    addr += i.size;
    out.push_back(std::move(i));
  }
  return out;
}

std::optional<uint32_t> branch_target(const Instr& i) {
  if (i.has_target) return i.target;
  return {};
}

const char* to_string(Mnemonic m) {
  switch (m) {
    case Mnemonic::ADC: return "adcs";
    case Mnemonic::ADD: return "add";
    case Mnemonic::ADR: return "adr";
    case Mnemonic::AND: return "ands";
    case Mnemonic::ASR: return "asrs";
    case Mnemonic::B: return "b";
    case Mnemonic::BIC: return "bics";
    case Mnemonic::BKPT: return "bkpt";
    case Mnemonic::BL: return "bl";
    case Mnemonic::BLX: return "blx";
    case Mnemonic::BX: return "bx";
    case Mnemonic::CMN: return "cmn";
    case Mnemonic::CMP: return "cmp";
    case Mnemonic::CPS: return "cps";
    case Mnemonic::DMB: return "dmb";
    case Mnemonic::DSB: return "dsb";
    case Mnemonic::EOR: return "eors";
    case Mnemonic::HINT: return "hint";
    case Mnemonic::ISB: return "isb";
    case Mnemonic::LDM: return "ldm";
    case Mnemonic::LDR: return "ldr";
    case Mnemonic::LDRB: return "ldrb";
    case Mnemonic::LDRH: return "ldrh";
    case Mnemonic::LDRSB: return "ldrsb";
    case Mnemonic::LDRSH: return "ldrsh";
    case Mnemonic::LSL: return "lsls";
    case Mnemonic::LSR: return "lsrs";
    case Mnemonic::MOV: return "mov";
    case Mnemonic::MRS: return "mrs";
    case Mnemonic::MSR: return "msr";
    case Mnemonic::MUL: return "muls";
    case Mnemonic::MVN: return "mvns";
    case Mnemonic::NOP: return "nop";
    case Mnemonic::ORR: return "orrs";
    case Mnemonic::POP: return "pop";
    case Mnemonic::PUSH: return "push";
    case Mnemonic::REV: return "rev";
    case Mnemonic::REV16: return "rev16";
    case Mnemonic::REVSH: return "revsh";
    case Mnemonic::ROR: return "rors";
    case Mnemonic::RSB: return "rsbs";
    case Mnemonic::SBC: return "sbcs";
    case Mnemonic::SEV: return "sev";
    case Mnemonic::STM: return "stm";
    case Mnemonic::STR: return "str";
    case Mnemonic::STRB: return "strb";
    case Mnemonic::STRH: return "strh";
    case Mnemonic::SUB: return "sub";
    case Mnemonic::SVC: return "svc";
    case Mnemonic::SXTB: return "sxtb";
    case Mnemonic::SXTH: return "sxth";
    case Mnemonic::TST: return "tst";
    case Mnemonic::UDF: return "udf";
    case Mnemonic::UXTB: return "uxtb";
    case Mnemonic::UXTH: return "uxth";
    case Mnemonic::WFE: return "wfe";
    case Mnemonic::WFI: return "wfi";
    case Mnemonic::YIELD: return "yield";
  }
  return "?";
}

const char* to_string(InstrKind k) {
  switch (k) {
    case InstrKind::Call: return "call";
    case InstrKind::BranchCond: return "branch-cond";
    case InstrKind::BranchUncond: return "branch-uncond";
    case InstrKind::Return: return "return";
    case InstrKind::Multiply: return "multiply";
    case InstrKind::Load: return "load";
    case InstrKind::Store: return "store";
    case InstrKind::LoadStoreMultiple: return "load-store-multiple";
    case InstrKind::Other: return "other";
  }
  return "?";
}

const char* to_string(Cond c) {
  static constexpr const char* names[] = {"eq", "ne", "cs", "cc", "mi", "pl", "vs", "vc",
                                          "hi", "ls", "ge", "lt", "gt", "le", "al"};
  return names[size_t(c)];
}

std::string Instr::text() const {
  std::ostringstream os;
  os << to_string(mnem);
  if (mnem == Mnemonic::B && kind == InstrKind::BranchCond) os << to_string(cond);
  auto reg = [](int r) {
    if (r == REG_SP) return std::string("sp");
    if (r == REG_LR) return std::string("lr");
    if (r == REG_PC) return std::string("pc");
    return "r" + std::to_string(r);
  };
  bool first = true;
  auto sep = [&]() -> std::ostringstream& {
    os << (first ? " " : ", ");
    first = false;
    return os;
  };
  if (reglist) {
    sep() << "{";
    bool inner_first = true;
    for (int r = 0; r < 16; r++) {
      if (reglist & (1u << r)) {
        if (!inner_first) os << ", ";
        os << reg(r);
        inner_first = false;
      }
    }
    os << "}";
  }
  if (rd >= 0) sep() << reg(rd);
  if (rt >= 0) sep() << reg(rt);
  if (rn >= 0 && !(rn == rd && has_imm && (mnem == Mnemonic::ADD || mnem == Mnemonic::SUB) &&
                   rn != REG_SP))
    sep() << reg(rn);
  if (rm >= 0) sep() << reg(rm);
  if (has_imm) sep() << "#" << imm;
  if (has_target) {
    sep() << "0x" << std::hex << target;
  }
  return os.str();
}

}  // namespace wcea
