#include "wcea/encoder.hpp"

#include "wcea/errors.hpp"

namespace wcea {

namespace {

void check_low(int r) {
  if (r < 0 || r > 7) throw Error("encoder: low register required, got r" + std::to_string(r));
}

void check_any(int r) {
  if (r < 0 || r > 15) throw Error("encoder: bad register r" + std::to_string(r));
}

}  // namespace

Assembler::Label Assembler::new_label() {
  labels_.push_back(-1);
  return Label(labels_.size() - 1);
}

void Assembler::bind(Label l) {
  if (labels_.at(l) != -1) throw Error("encoder: label bound twice");
  labels_[l] = int64_t(buf_.size());
}

uint32_t Assembler::address_of(Label l) const {
  int64_t idx = labels_.at(l);
  if (idx < 0) throw Error("encoder: label not bound");
  return base_ + uint32_t(idx) * 2;
}

void Assembler::movs_imm(int rd, uint32_t imm8) {
  check_low(rd);
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0x2000 | uint16_t(rd) << 8 | uint16_t(imm8));
}

void Assembler::movs_reg(int rd, int rm) {
  check_low(rd);
  check_low(rm);
  emit(uint16_t(rm) << 3 | uint16_t(rd));
}

void Assembler::mov_reg(int rd, int rm) {
  check_any(rd);
  check_any(rm);
  emit(0x4600 | uint16_t(rd & 8) << 4 | uint16_t(rm) << 3 | uint16_t(rd & 7));
}

void Assembler::adds_imm3(int rd, int rn, uint32_t imm3) {
  check_low(rd);
  check_low(rn);
  if (imm3 > 7) throw Error("encoder: imm3 out of range");
  emit(0x1c00 | uint16_t(imm3) << 6 | uint16_t(rn) << 3 | uint16_t(rd));
}

void Assembler::adds_imm8(int rdn, uint32_t imm8) {
  check_low(rdn);
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0x3000 | uint16_t(rdn) << 8 | uint16_t(imm8));
}

void Assembler::adds_reg(int rd, int rn, int rm) {
  check_low(rd);
  check_low(rn);
  check_low(rm);
  emit(0x1800 | uint16_t(rm) << 6 | uint16_t(rn) << 3 | uint16_t(rd));
}

void Assembler::add_reg(int rdn, int rm) {
  check_any(rdn);
  check_any(rm);
  emit(0x4400 | uint16_t(rdn & 8) << 4 | uint16_t(rm) << 3 | uint16_t(rdn & 7));
}

void Assembler::add_sp_imm7(uint32_t imm) {
  if (imm & 3 || imm > 508) throw Error("encoder: sp immediate out of range");
  emit(0xb000 | uint16_t(imm >> 2));
}

void Assembler::sub_sp_imm7(uint32_t imm) {
  if (imm & 3 || imm > 508) throw Error("encoder: sp immediate out of range");
  emit(0xb080 | uint16_t(imm >> 2));
}

void Assembler::add_rd_sp(int rd, uint32_t imm) {
  check_low(rd);
  if (imm & 3 || imm > 1020) throw Error("encoder: sp offset out of range");
  emit(0xa800 | uint16_t(rd) << 8 | uint16_t(imm >> 2));
}

void Assembler::subs_imm3(int rd, int rn, uint32_t imm3) {
  check_low(rd);
  check_low(rn);
  if (imm3 > 7) throw Error("encoder: imm3 out of range");
  emit(0x1e00 | uint16_t(imm3) << 6 | uint16_t(rn) << 3 | uint16_t(rd));
}

void Assembler::subs_imm8(int rdn, uint32_t imm8) {
  check_low(rdn);
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0x3800 | uint16_t(rdn) << 8 | uint16_t(imm8));
}

void Assembler::subs_reg(int rd, int rn, int rm) {
  check_low(rd);
  check_low(rn);
  check_low(rm);
  emit(0x1a00 | uint16_t(rm) << 6 | uint16_t(rn) << 3 | uint16_t(rd));
}

void Assembler::cmp_imm(int rn, uint32_t imm8) {
  check_low(rn);
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0x2800 | uint16_t(rn) << 8 | uint16_t(imm8));
}

void Assembler::cmp_reg(int rn, int rm) {
  check_low(rn);
  check_low(rm);
  emit(0x4280 | uint16_t(rm) << 3 | uint16_t(rn));
}

#define DP_OP(name, opc)                             \
  void Assembler::name(int rdn, int rm) {            \
    check_low(rdn);                                  \
    check_low(rm);                                   \
    emit(0x4000 | (opc) << 6 | uint16_t(rm) << 3 | uint16_t(rdn)); \
  }

DP_OP(ands_reg, 0x0)
DP_OP(eors_reg, 0x1)
DP_OP(lsls_reg, 0x2)
DP_OP(lsrs_reg, 0x3)
DP_OP(asrs_reg, 0x4)
DP_OP(adcs_reg, 0x5)
DP_OP(sbcs_reg, 0x6)
DP_OP(rors_reg, 0x7)
DP_OP(tst_reg, 0x8)
DP_OP(cmn_reg, 0xb)
DP_OP(orrs_reg, 0xc)
DP_OP(bics_reg, 0xe)
DP_OP(mvns_reg, 0xf)
#undef DP_OP

void Assembler::rsbs_reg(int rd, int rn) {
  check_low(rd);
  check_low(rn);
  emit(0x4240 | uint16_t(rn) << 3 | uint16_t(rd));
}

void Assembler::muls(int rdm, int rn) {
  check_low(rdm);
  check_low(rn);
  emit(0x4340 | uint16_t(rn) << 3 | uint16_t(rdm));
}

void Assembler::lsls_imm(int rd, int rm, uint32_t shift) {
  check_low(rd);
  check_low(rm);
  if (shift < 1 || shift > 31) throw Error("encoder: LSL shift out of range");
  emit(uint16_t(shift) << 6 | uint16_t(rm) << 3 | uint16_t(rd));
}

void Assembler::lsrs_imm(int rd, int rm, uint32_t shift) {
  check_low(rd);
  check_low(rm);
  if (shift < 1 || shift > 32) throw Error("encoder: LSR shift out of range");
  emit(0x0800 | uint16_t(shift & 31) << 6 | uint16_t(rm) << 3 | uint16_t(rd));
}

void Assembler::asrs_imm(int rd, int rm, uint32_t shift) {
  check_low(rd);
  check_low(rm);
  if (shift < 1 || shift > 32) throw Error("encoder: ASR shift out of range");
  emit(0x1000 | uint16_t(shift & 31) << 6 | uint16_t(rm) << 3 | uint16_t(rd));
}

void Assembler::sxth(int rd, int rm) { check_low(rd); check_low(rm); emit(0xb200 | uint16_t(rm) << 3 | uint16_t(rd)); }
void Assembler::sxtb(int rd, int rm) { check_low(rd); check_low(rm); emit(0xb240 | uint16_t(rm) << 3 | uint16_t(rd)); }
void Assembler::uxth(int rd, int rm) { check_low(rd); check_low(rm); emit(0xb280 | uint16_t(rm) << 3 | uint16_t(rd)); }
void Assembler::uxtb(int rd, int rm) { check_low(rd); check_low(rm); emit(0xb2c0 | uint16_t(rm) << 3 | uint16_t(rd)); }
void Assembler::rev(int rd, int rm) { check_low(rd); check_low(rm); emit(0xba00 | uint16_t(rm) << 3 | uint16_t(rd)); }

void Assembler::ldr_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off & 3 || off > 124) throw Error("encoder: word offset out of range");
  emit(0x6800 | uint16_t(off >> 2) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

void Assembler::str_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off & 3 || off > 124) throw Error("encoder: word offset out of range");
  emit(0x6000 | uint16_t(off >> 2) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

void Assembler::ldrb_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off > 31) throw Error("encoder: byte offset out of range");
  emit(0x7800 | uint16_t(off) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

void Assembler::strb_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off > 31) throw Error("encoder: byte offset out of range");
  emit(0x7000 | uint16_t(off) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

void Assembler::ldrh_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off & 1 || off > 62) throw Error("encoder: halfword offset out of range");
  emit(0x8800 | uint16_t(off >> 1) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

void Assembler::strh_imm(int rt, int rn, uint32_t off) {
  check_low(rt);
  check_low(rn);
  if (off & 1 || off > 62) throw Error("encoder: halfword offset out of range");
  emit(0x8000 | uint16_t(off >> 1) << 6 | uint16_t(rn) << 3 | uint16_t(rt));
}

#define LDST_REG(name, opc)                                  \
  void Assembler::name(int rt, int rn, int rm) {             \
    check_low(rt);                                           \
    check_low(rn);                                           \
    check_low(rm);                                           \
    emit(0x5000 | (opc) << 9 | uint16_t(rm) << 6 | uint16_t(rn) << 3 | uint16_t(rt)); \
  }

LDST_REG(str_reg, 0)
LDST_REG(strh_reg, 1)
LDST_REG(strb_reg, 2)
LDST_REG(ldrsb_reg, 3)
LDST_REG(ldr_reg, 4)
LDST_REG(ldrh_reg, 5)
LDST_REG(ldrb_reg, 6)
LDST_REG(ldrsh_reg, 7)
#undef LDST_REG

void Assembler::ldr_sp(int rt, uint32_t off) {
  check_low(rt);
  if (off & 3 || off > 1020) throw Error("encoder: sp offset out of range");
  emit(0x9800 | uint16_t(rt) << 8 | uint16_t(off >> 2));
}

void Assembler::str_sp(int rt, uint32_t off) {
  check_low(rt);
  if (off & 3 || off > 1020) throw Error("encoder: sp offset out of range");
  emit(0x9000 | uint16_t(rt) << 8 | uint16_t(off >> 2));
}

void Assembler::ldr_lit(int rt, Label pool_word) {
  check_low(rt);
  fixups_.push_back({buf_.size(), Fix::LitLoad, pool_word});
  emit(0x4800 | uint16_t(rt) << 8);
}

void Assembler::adr(int rd, Label target) {
  check_low(rd);
  fixups_.push_back({buf_.size(), Fix::Adr, target});
  emit(0xa000 | uint16_t(rd) << 8);
}

void Assembler::ldm(int rn, uint16_t list) {
  check_low(rn);
  if (!list || list > 0xff) throw Error("encoder: bad LDM register list");
  emit(0xc800 | uint16_t(rn) << 8 | list);
}

void Assembler::stm(int rn, uint16_t list) {
  check_low(rn);
  if (!list || list > 0xff) throw Error("encoder: bad STM register list");
  emit(0xc000 | uint16_t(rn) << 8 | list);
}

void Assembler::push(uint16_t list, bool lr) {
  if ((!list && !lr) || list > 0xff) throw Error("encoder: bad PUSH register list");
  emit(0xb400 | uint16_t(lr) << 8 | list);
}

void Assembler::pop(uint16_t list, bool pc) {
  if ((!list && !pc) || list > 0xff) throw Error("encoder: bad POP register list");
  emit(0xbc00 | uint16_t(pc) << 8 | list);
}

void Assembler::b(Label target) {
  fixups_.push_back({buf_.size(), Fix::Branch, target});
  emit(0xe000);
}

void Assembler::b(Cond cond, Label target) {
  if (cond == Cond::AL) {
    b(target);
    return;
  }
  fixups_.push_back({buf_.size(), Fix::CondBranch, target});
  emit(0xd000 | uint16_t(cond) << 8);
}

void Assembler::bl(Label target) {
  fixups_.push_back({buf_.size(), Fix::Bl, target});
  emit(0xf000);
  emit(0xd000);
}

void Assembler::bl_abs(uint32_t target_addr) {
  Label l = new_label();
  int64_t idx = (int64_t(target_addr) - int64_t(base_)) / 2;
  labels_[l] = idx;
  fixups_.push_back({buf_.size(), Fix::Bl, l});
  emit(0xf000);
  emit(0xd000);
}

void Assembler::bx(int rm) {
  check_any(rm);
  emit(0x4700 | uint16_t(rm) << 3);
}

void Assembler::blx(int rm) {
  check_any(rm);
  emit(0x4780 | uint16_t(rm) << 3);
}

void Assembler::nop() { emit(0xbf00); }
void Assembler::wfi() { emit(0xbf30); }

void Assembler::bkpt(uint32_t imm8) {
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0xbe00 | uint16_t(imm8));
}

void Assembler::svc(uint32_t imm8) {
  if (imm8 > 255) throw Error("encoder: imm8 out of range");
  emit(0xdf00 | uint16_t(imm8));
}

void Assembler::halfword(uint16_t v) { emit(v); }

void Assembler::word(uint32_t v) {
  align4();
  emit(uint16_t(v & 0xffff));
  emit(uint16_t(v >> 16));
}

void Assembler::align4() {
  if (here() & 3) nop();
}

std::vector<uint8_t> Assembler::finish() {
  for (const auto& f : fixups_) {
    int64_t target_idx = labels_.at(f.label);
    if (target_idx < 0) throw Error("encoder: unbound label in fixup");
    int64_t pc = int64_t(f.index) * 2 + 4;  // offsets are relative to instr+4
    int64_t target = target_idx * 2;
    int64_t off = target - pc;
    switch (f.type) {
      case Fix::CondBranch:
        if (off < -256 || off > 254 || (off & 1))
          throw Error("encoder: conditional branch out of range");
        buf_[f.index] |= uint16_t((off >> 1) & 0xff);
        break;
      case Fix::Branch:
        if (off < -2048 || off > 2046 || (off & 1))
          throw Error("encoder: branch out of range");
        buf_[f.index] |= uint16_t((off >> 1) & 0x7ff);
        break;
      case Fix::Bl: {
        if (off < -(1 << 24) || off >= (1 << 24) || (off & 1))
          throw Error("encoder: BL out of range");
        uint32_t v = uint32_t(off);
        uint32_t s = (v >> 24) & 1;
        uint32_t i1 = (v >> 23) & 1;
        uint32_t i2 = (v >> 22) & 1;
        uint32_t imm10 = (v >> 12) & 0x3ff;
        uint32_t imm11 = (v >> 1) & 0x7ff;
        uint32_t j1 = (~i1 ^ s) & 1;
        uint32_t j2 = (~i2 ^ s) & 1;
        buf_[f.index] |= uint16_t(s << 10 | imm10);
        buf_[f.index + 1] |= uint16_t(j1 << 13 | j2 << 11 | imm11);
        break;
      }
      case Fix::LitLoad:
      case Fix::Adr: {
        int64_t aligned_pc = (int64_t(f.index) * 2 + 4) & ~3;
        int64_t o = target - aligned_pc;
        if (o < 0 || o > 1020 || (o & 3))
          throw Error("encoder: literal offset out of range");
        buf_[f.index] |= uint16_t(o >> 2);
        break;
      }
    }
  }
  fixups_.clear();
  std::vector<uint8_t> out;
  out.reserve(buf_.size() * 2);
  for (uint16_t hw : buf_) {
    out.push_back(uint8_t(hw & 0xff));
    out.push_back(uint8_t(hw >> 8));
  }
  return out;
}

}  // namespace wcea
