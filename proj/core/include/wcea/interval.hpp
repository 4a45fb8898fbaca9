#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wcea {

// Integer interval over a 33-bit signed window [-2^32, 2^32), wide enough to
// hold both the signed and the unsigned reading of any 32-bit register.
// Bottom is an explicit state, never an inverted pair. Results that would
// leave the window go to top (wraparound is not tracked).
class Interval {
public:
  static constexpr int64_t kMin = -(int64_t(1) << 32);
  static constexpr int64_t kMax = (int64_t(1) << 32) - 1;

  Interval() : lo_(kMin), hi_(kMax), bottom_(false) {}  // top

  static Interval top() { return Interval(); }
  static Interval bottom() {
    Interval i;
    i.bottom_ = true;
    return i;
  }
  static Interval of(int64_t lo, int64_t hi);
  static Interval constant(int64_t v) { return of(v, v); }
  // The unsigned reading of a concrete 32-bit register value.
  static Interval of_u32(uint32_t v) { return constant(int64_t(v)); }

  bool is_bottom() const { return bottom_; }
  bool is_top() const { return !bottom_ && lo_ == kMin && hi_ == kMax; }
  bool is_constant() const { return !bottom_ && lo_ == hi_; }
  int64_t lo() const { return lo_; }
  int64_t hi() const { return hi_; }
  int64_t constant_value() const { return lo_; }

  // A concrete register value is covered when either its unsigned or its
  // signed reading lies inside. This is the containment the soundness
  // property tests check.
  bool contains_u32(uint32_t v) const {
    if (bottom_) return false;
    int64_t u = int64_t(v);
    int64_t s = int64_t(int32_t(v));
    return (u >= lo_ && u <= hi_) || (s >= lo_ && s <= hi_);
  }

  bool contains(int64_t v) const { return !bottom_ && v >= lo_ && v <= hi_; }

  Interval join(const Interval& o) const;
  Interval meet(const Interval& o) const;
  // Widening to the given ascending threshold set (which implicitly
  // includes the window bounds).
  Interval widen(const Interval& newer, const std::vector<int64_t>& thresholds) const;
  Interval narrow(const Interval& newer) const;

  Interval add(const Interval& o) const;
  Interval sub(const Interval& o) const;
  Interval neg() const;
  Interval mul(const Interval& o) const;
  Interval shl(const Interval& amount) const;
  Interval lshr(const Interval& amount) const;  // logical, needs unsigned range
  Interval ashr(const Interval& amount) const;
  Interval bit_and(const Interval& o) const;
  Interval bit_or(const Interval& o) const;
  Interval bit_xor(const Interval& o) const;

  // Restrictions used for guard refinement. Signed comparisons.
  Interval restrict_lt(int64_t bound) const { return meet(of(kMin, bound - 1)); }
  Interval restrict_le(int64_t bound) const { return meet(of(kMin, bound)); }
  Interval restrict_gt(int64_t bound) const { return meet(of(bound + 1, kMax)); }
  Interval restrict_ge(int64_t bound) const { return meet(of(bound, kMax)); }
  Interval restrict_eq(const Interval& o) const { return meet(o); }
  Interval restrict_ne(const Interval& o) const;

  // True when every value has one unambiguous 32-bit representation for
  // unsigned ( [0, 2^32) ) respectively signed ( [-2^31, 2^31) ) reading.
  bool pure_unsigned() const { return !bottom_ && lo_ >= 0; }
  bool pure_signed() const {
    return !bottom_ && lo_ >= -(int64_t(1) << 31) && hi_ < (int64_t(1) << 31);
  }

  std::string to_string() const;

  bool operator==(const Interval& o) const = default;

private:
  int64_t lo_, hi_;
  bool bottom_;
};

}  // namespace wcea
