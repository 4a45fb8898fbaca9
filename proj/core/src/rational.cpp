#include "wcea/rational.hpp"

#include <cctype>
#include <stdexcept>

#include "wcea/errors.hpp"

namespace wcea {

Rat rat_parse(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error("empty number");

  // a/b form
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    try {
      mpz_class n(num), d(den);
      if (d == 0) throw Error("zero denominator: " + s);
      Rat q(n, d);
      q.canonicalize();
      return q;
    } catch (const std::invalid_argument&) {
      throw Error("malformed rational: " + s);
    }
  }

  // decimal with optional exponent: [-]digits[.digits][eE[-]digits]
  bool neg = false;
  size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    i++;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  long exp10 = 0;
  for (; i < s.size(); i++) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) frac_digits++;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      try {
        exp10 = std::stol(s.substr(i + 1));
      } catch (...) {
        throw Error("malformed exponent: " + s);
      }
      break;
    } else {
      throw Error("malformed number: " + s);
    }
  }
  if (!seen_digit) throw Error("malformed number: " + s);

  mpz_class mant(digits.empty() ? "0" : digits);
  long shift = exp10 - frac_digits;
  Rat q(mant);
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  if (shift >= 0)
    q *= Rat(pow10);
  else
    q /= Rat(pow10);
  q.canonicalize();
  return neg ? Rat(-q) : q;
}

bool rat_has_finite_decimal(const Rat& q) {
  mpz_class d = q.get_den();
  if (d == 1) return true;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 2);
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 5);
  return d == 1;
}

std::string rat_to_decimal(const Rat& q) {
  if (q == 0) return "0";
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  bool neg = num < 0;
  if (neg) num = -num;

  // den = 2^a * 5^b; scale to 10^max(a,b)
  unsigned long twos = 0, fives = 0;
  mpz_class d = den;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) {
    mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 2);
    twos++;
  }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
    mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 5);
    fives++;
  }
  if (d != 1)
    throw std::domain_error("no finite decimal expansion: " + q.get_num().get_str() + "/" +
                            q.get_den().get_str());
  unsigned long places = twos > fives ? twos : fives;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
  mpz_class scaled = num * scale / den;

  std::string s = scaled.get_str();
  if (places == 0) return (neg ? "-" : "") + s;
  if (s.size() <= places) s.insert(0, places - s.size() + 1, '0');
  s.insert(s.size() - places, ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return (neg ? "-" : "") + s;
}

std::string rat_to_string(const Rat& q) {
  if (rat_has_finite_decimal(q)) return rat_to_decimal(q);
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rat rat_of_double(double d) {
  Rat q;
  mpq_set_d(q.get_mpq_t(), d);
  return q;
}

double rat_to_double(const Rat& q) { return q.get_d(); }

}  // namespace wcea
