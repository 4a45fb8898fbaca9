#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace wcea {

// Exact rational arithmetic. Energy coefficients enter the system as decimal
// strings and stay rational end to end, so results are bit-reproducible
// across platforms. Doubles appear only in fitting internals and MAPE
// reporting.
using Rat = mpq_class;

// Parses "12", "-0.5", "3.93365e-08", "1/3" into an exact rational.
// Throws wcea::Error on malformed input.
Rat rat_parse(std::string_view text);

// Exact decimal rendering without trailing zeros ("0.0393365", "-2", "0.1").
// Only defined when the denominator is of the form 2^a * 5^b; throws
// std::domain_error otherwise. Everything priced from decimal-born model
// coefficients satisfies this.
std::string rat_to_decimal(const Rat& q);

// True when rat_to_decimal(q) is defined.
bool rat_has_finite_decimal(const Rat& q);

// Decimal if possible, "p/q" otherwise. For diagnostics.
std::string rat_to_string(const Rat& q);

// Exact conversion from an integer count.
inline Rat rat_of(uint64_t n) {
  Rat r;
  mpz_import(r.get_num_mpz_t(), 1, 1, sizeof(n), 0, 0, &n);
  r.get_den() = 1;
  return r;
}

inline Rat rat_of(int64_t n) {
  if (n >= 0) return rat_of(static_cast<uint64_t>(n));
  Rat r = rat_of(static_cast<uint64_t>(-(n + 1)) + 1);
  return -r;
}

// Nearest dyadic rational of a double (exact; doubles are binary fractions).
Rat rat_of_double(double d);

double rat_to_double(const Rat& q);

}  // namespace wcea
