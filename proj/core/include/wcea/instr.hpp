#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace wcea {

// Every ARMv6-M mnemonic. S-suffix flag setting is carried separately in
// Instr::sets_flags since several mnemonics have both forms.
enum class Mnemonic : uint8_t {
  ADC, ADD, ADR, AND, ASR, B, BIC, BKPT, BL, BLX, BX, CMN, CMP, CPS,
  DMB, DSB, EOR, HINT, ISB, LDM, LDR, LDRB, LDRH, LDRSB, LDRSH, LSL,
  LSR, MOV, MRS, MSR, MUL, MVN, NOP, ORR, POP, PUSH, REV, REV16,
  REVSH, ROR, RSB, SBC, SEV, STM, STR, STRB, STRH, SUB, SVC, SXTB,
  SXTH, TST, UDF, UXTB, UXTH, WFE, WFI, YIELD,
};

// Classification driving CFG reconstruction and event counting.
enum class InstrKind : uint8_t {
  Call,
  BranchCond,
  BranchUncond,
  Return,
  Multiply,
  Load,
  Store,
  LoadStoreMultiple,
  Other,
};

enum class Cond : uint8_t { EQ, NE, CS, CC, MI, PL, VS, VC, HI, LS, GE, LT, GT, LE, AL };

const char* to_string(Mnemonic m);
const char* to_string(InstrKind k);
const char* to_string(Cond c);

constexpr int REG_SP = 13;
constexpr int REG_LR = 14;
constexpr int REG_PC = 15;

// One decoded instruction. Register fields are -1 when absent; branch
// targets are absolute addresses with the Thumb bit cleared (ARMv6-M has no
// ARM state, so bit 0 carries no information worth keeping).
struct Instr {
  uint32_t addr = 0;
  uint8_t size = 2;  // 4 only for BL and the 32-bit system encodings
  Mnemonic mnem = Mnemonic::NOP;
  InstrKind kind = InstrKind::Other;
  Cond cond = Cond::AL;  // meaningful for B<cond> only

  int8_t rd = -1;
  int8_t rn = -1;
  int8_t rm = -1;
  int8_t rt = -1;
  int32_t imm = 0;
  bool has_imm = false;

  uint32_t target = 0;  // resolved PC-relative branch target
  bool has_target = false;

  uint16_t reglist = 0;  // bits 0..7 = r0..r7, bit 14 = LR (push), bit 15 = PC (pop)
  bool sets_flags = false;
  bool wback = false;  // LDM/STM address writeback

  std::optional<uint8_t> mem_width;  // 1, 2 or 4 bytes per transfer
  std::optional<uint8_t> reg_count;  // registers moved by LDM/STM/PUSH/POP

  bool analysis_opaque = false;  // SVC, BKPT, WFI, WFE: needs annotation
  bool undefined_hint = false;   // unallocated hint, executes as NOP

  bool is_load() const {
    switch (mnem) {
      case Mnemonic::LDR: case Mnemonic::LDRB: case Mnemonic::LDRH:
      case Mnemonic::LDRSB: case Mnemonic::LDRSH: case Mnemonic::LDM:
      case Mnemonic::POP:
        return true;
      default:
        return false;
    }
  }
  bool is_store() const {
    switch (mnem) {
      case Mnemonic::STR: case Mnemonic::STRB: case Mnemonic::STRH:
      case Mnemonic::STM: case Mnemonic::PUSH:
        return true;
      default:
        return false;
    }
  }
  bool writes_pc() const {
    return kind == InstrKind::Call || kind == InstrKind::Return ||
           kind == InstrKind::BranchCond || kind == InstrKind::BranchUncond;
  }
  bool is_terminator() const { return writes_pc() || analysis_opaque; }

  // Concrete address read by LDR (literal) / materialized by ADR.
  std::optional<uint32_t> literal_address() const {
    if ((mnem == Mnemonic::LDR || mnem == Mnemonic::ADR) && rn == REG_PC)
      return ((addr + 4) & ~3u) + uint32_t(imm);
    return {};
  }

  std::string text() const;

  bool operator==(const Instr&) const = default;
};

}  // namespace wcea
