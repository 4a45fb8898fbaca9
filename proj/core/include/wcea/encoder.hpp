#pragma once

#include <cstdint>
#include <vector>

#include "wcea/instr.hpp"

namespace wcea {

// Small ARMv6-M assembler covering the subset fixtures need: data
// processing, loads/stores, LDM/STM, PUSH/POP, branches, BL, BX, MULS and
// hints. Test programs are generated programmatically through this class,
// never checked in as opaque byte blobs.
//
// Branch targets use labels; finish() patches the offsets and returns the
// image bytes.
class Assembler {
public:
  using Label = int;

  explicit Assembler(uint32_t base) : base_(base) {}

  uint32_t base() const { return base_; }
  uint32_t here() const { return base_ + uint32_t(buf_.size()) * 2; }

  Label new_label();
  void bind(Label l);
  uint32_t address_of(Label l) const;  // valid after bind

  // Data processing
  void movs_imm(int rd, uint32_t imm8);
  void movs_reg(int rd, int rm);
  void mov_reg(int rd, int rm);  // high-register form, no flags
  void adds_imm3(int rd, int rn, uint32_t imm3);
  void adds_imm8(int rdn, uint32_t imm8);
  void adds_reg(int rd, int rn, int rm);
  void add_reg(int rdn, int rm);  // high-register form
  void add_sp_imm7(uint32_t imm);  // ADD SP, SP, #imm (imm multiple of 4, < 512)
  void sub_sp_imm7(uint32_t imm);
  void add_rd_sp(int rd, uint32_t imm);  // ADD Rd, SP, #imm (multiple of 4, < 1024)
  void subs_imm3(int rd, int rn, uint32_t imm3);
  void subs_imm8(int rdn, uint32_t imm8);
  void subs_reg(int rd, int rn, int rm);
  void cmp_imm(int rn, uint32_t imm8);
  void cmp_reg(int rn, int rm);
  void ands_reg(int rdn, int rm);
  void eors_reg(int rdn, int rm);
  void orrs_reg(int rdn, int rm);
  void bics_reg(int rdn, int rm);
  void mvns_reg(int rd, int rm);
  void tst_reg(int rn, int rm);
  void cmn_reg(int rn, int rm);
  void adcs_reg(int rdn, int rm);
  void sbcs_reg(int rdn, int rm);
  void rsbs_reg(int rd, int rn);  // RSBS Rd, Rn, #0
  void lsls_imm(int rd, int rm, uint32_t shift);  // 1..31
  void lsrs_imm(int rd, int rm, uint32_t shift);  // 1..32
  void asrs_imm(int rd, int rm, uint32_t shift);  // 1..32
  void lsls_reg(int rdn, int rm);
  void lsrs_reg(int rdn, int rm);
  void asrs_reg(int rdn, int rm);
  void rors_reg(int rdn, int rm);
  void muls(int rdm, int rn);
  void sxth(int rd, int rm);
  void sxtb(int rd, int rm);
  void uxth(int rd, int rm);
  void uxtb(int rd, int rm);
  void rev(int rd, int rm);

  // Loads and stores
  void ldr_imm(int rt, int rn, uint32_t off);   // off multiple of 4, < 128
  void str_imm(int rt, int rn, uint32_t off);
  void ldrb_imm(int rt, int rn, uint32_t off);  // off < 32
  void strb_imm(int rt, int rn, uint32_t off);
  void ldrh_imm(int rt, int rn, uint32_t off);  // off multiple of 2, < 64
  void strh_imm(int rt, int rn, uint32_t off);
  void ldr_reg(int rt, int rn, int rm);
  void str_reg(int rt, int rn, int rm);
  void ldrb_reg(int rt, int rn, int rm);
  void strb_reg(int rt, int rn, int rm);
  void ldrh_reg(int rt, int rn, int rm);
  void strh_reg(int rt, int rn, int rm);
  void ldrsb_reg(int rt, int rn, int rm);
  void ldrsh_reg(int rt, int rn, int rm);
  void ldr_sp(int rt, uint32_t off);   // off multiple of 4, < 1024
  void str_sp(int rt, uint32_t off);
  void ldr_lit(int rt, Label pool_word);  // PC-relative literal load
  void adr(int rd, Label target);
  void ldm(int rn, uint16_t list);  // low registers
  void stm(int rn, uint16_t list);
  void push(uint16_t list, bool lr = false);
  void pop(uint16_t list, bool pc = false);

  // Control flow
  void b(Label target);
  void b(Cond cond, Label target);
  void bl(Label target);
  void bl_abs(uint32_t target_addr);
  void bx(int rm);
  void bx_lr() { bx(REG_LR); }
  void blx(int rm);

  // Misc
  void nop();
  void bkpt(uint32_t imm8 = 0);
  void svc(uint32_t imm8 = 0);
  void wfi();

  // Raw data (for literal pools)
  void halfword(uint16_t v);
  void word(uint32_t v);     // 4-aligns first with a NOP if needed
  void align4();

  // Resolves all fixups and returns the bytes. Throws on unbound labels or
  // out-of-range offsets.
  std::vector<uint8_t> finish();

private:
  enum class Fix { CondBranch, Branch, Bl, LitLoad, Adr };
  struct Fixup {
    size_t index;  // halfword index
    Fix type;
    Label label;
  };

  void emit(uint16_t hw) { buf_.push_back(hw); }

  uint32_t base_;
  std::vector<uint16_t> buf_;
  std::vector<int64_t> labels_;  // -1 = unbound, else halfword index
  std::vector<Fixup> fixups_;
};

}  // namespace wcea
