#include "wcea/interval.hpp"

#include <algorithm>

namespace wcea {

namespace {

int64_t clamp_lo(int64_t v) { return std::max(v, Interval::kMin); }
int64_t clamp_hi(int64_t v) { return std::min(v, Interval::kMax); }

}  // namespace

Interval Interval::of(int64_t lo, int64_t hi) {
  if (lo > hi) return bottom();
  Interval i;
  i.lo_ = clamp_lo(lo);
  i.hi_ = clamp_hi(hi);
  if (i.lo_ > i.hi_) return bottom();
  return i;
}

Interval Interval::join(const Interval& o) const {
  if (bottom_) return o;
  if (o.bottom_) return *this;
  return of(std::min(lo_, o.lo_), std::max(hi_, o.hi_));
}

Interval Interval::meet(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  return of(std::max(lo_, o.lo_), std::min(hi_, o.hi_));
}

Interval Interval::widen(const Interval& newer, const std::vector<int64_t>& thresholds) const {
  if (bottom_) return newer;
  if (newer.bottom_) return *this;
  int64_t lo = lo_;
  int64_t hi = hi_;
  if (newer.lo_ < lo_) {
    lo = kMin;
    for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
      if (*it <= newer.lo_) {
        lo = *it;
        break;
      }
    }
  }
  if (newer.hi_ > hi_) {
    hi = kMax;
    for (int64_t t : thresholds) {
      if (t >= newer.hi_) {
        hi = t;
        break;
      }
    }
  }
  return of(lo, hi);
}

Interval Interval::narrow(const Interval& newer) const {
  if (bottom_ || newer.bottom_) return newer;
  // Refine only the bounds that widening pushed to the window edge.
  int64_t lo = lo_ == kMin ? newer.lo_ : lo_;
  int64_t hi = hi_ == kMax ? newer.hi_ : hi_;
  return of(lo, hi);
}

Interval Interval::add(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  int64_t lo = lo_ + o.lo_;
  int64_t hi = hi_ + o.hi_;
  if (lo < kMin || hi > kMax) return top();
  return of(lo, hi);
}

Interval Interval::sub(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  int64_t lo = lo_ - o.hi_;
  int64_t hi = hi_ - o.lo_;
  if (lo < kMin || hi > kMax) return top();
  return of(lo, hi);
}

Interval Interval::neg() const {
  if (bottom_) return bottom();
  if (lo_ == kMin) return top();
  return of(-hi_, -lo_);
}

Interval Interval::mul(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  // Avoid overflow: bail to top unless operands are comfortably small.
  constexpr int64_t kSafe = int64_t(1) << 31;
  if (std::max(std::abs(lo_), std::abs(hi_)) > kSafe ||
      std::max(std::abs(o.lo_), std::abs(o.hi_)) > kSafe)
    return top();
  int64_t c[4] = {lo_ * o.lo_, lo_ * o.hi_, hi_ * o.lo_, hi_ * o.hi_};
  int64_t lo = *std::min_element(c, c + 4);
  int64_t hi = *std::max_element(c, c + 4);
  if (lo < kMin || hi > kMax) return top();
  return of(lo, hi);
}

Interval Interval::shl(const Interval& amount) const {
  if (bottom_ || amount.bottom_) return bottom();
  if (!amount.is_constant() || amount.lo_ < 0 || amount.lo_ > 31) return top();
  Interval factor = constant(int64_t(1) << amount.lo_);
  return mul(factor);
}

Interval Interval::lshr(const Interval& amount) const {
  if (bottom_ || amount.bottom_) return bottom();
  if (!amount.is_constant() || amount.lo_ < 0 || amount.lo_ > 32 || !pure_unsigned())
    return top();
  if (amount.lo_ == 32) return constant(0);
  return of(lo_ >> amount.lo_, hi_ >> amount.lo_);
}

Interval Interval::ashr(const Interval& amount) const {
  if (bottom_ || amount.bottom_) return bottom();
  if (!amount.is_constant() || amount.lo_ < 0 || amount.lo_ > 32 || !pure_signed())
    return top();
  int64_t sh = std::min<int64_t>(amount.lo_, 31);
  return of(lo_ >> sh, hi_ >> sh);
}

Interval Interval::bit_and(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  if (is_constant() && o.is_constant() && pure_unsigned() && o.pure_unsigned())
    return constant(lo_ & o.lo_);
  // x & mask is bounded by the mask for non-negative operands.
  if (pure_unsigned() && o.pure_unsigned()) return of(0, std::min(hi_, o.hi_));
  return top();
}

Interval Interval::bit_or(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  if (is_constant() && o.is_constant() && pure_unsigned() && o.pure_unsigned())
    return constant(lo_ | o.lo_);
  return top();
}

Interval Interval::bit_xor(const Interval& o) const {
  if (bottom_ || o.bottom_) return bottom();
  if (is_constant() && o.is_constant() && pure_unsigned() && o.pure_unsigned())
    return constant(lo_ ^ o.lo_);
  return top();
}

Interval Interval::restrict_ne(const Interval& o) const {
  if (bottom_) return bottom();
  if (!o.is_constant()) return *this;
  int64_t v = o.lo_;
  if (lo_ == v && hi_ == v) return bottom();
  if (lo_ == v) return of(lo_ + 1, hi_);
  if (hi_ == v) return of(lo_, hi_ - 1);
  return *this;
}

std::string Interval::to_string() const {
  if (bottom_) return "_|_";
  if (is_top()) return "top";
  std::string lo = lo_ == kMin ? "-inf" : std::to_string(lo_);
  std::string hi = hi_ == kMax ? "+inf" : std::to_string(hi_);
  return "[" + lo + ", " + hi + "]";
}

}  // namespace wcea
