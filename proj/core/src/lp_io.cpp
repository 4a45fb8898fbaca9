#include <cctype>
#include <map>
#include <sstream>

#include "wcea/ilp.hpp"

namespace wcea {

namespace {

// Scales a constraint so every coefficient and the rhs become integers.
mpz_class common_denominator(const LinConstraint& c) {
  mpz_class lcm = c.rhs.get_den();
  for (const LinTerm& t : c.terms) {
    mpz_class den = t.coef.get_den();
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
  }
  return lcm;
}

std::string int_str(const Rat& scaled) {
  // scaled is integral by construction
  return scaled.get_num().get_str();
}

}  // namespace

std::string export_lp(const IlpProblem& p) {
  std::ostringstream os;
  os << "\\ linear program, " << p.num_vars() << " variables, " << p.constraints.size()
     << " constraints\n";
  os << "Maximize\n obj:";
  // Every variable appears, zero coefficients included, so the parse side
  // reconstructs the exact variable order.
  for (size_t j = 0; j < p.num_vars(); j++) {
    const Rat& c = p.objective[j];
    if (c < 0)
      os << " - " << rat_to_decimal(-c);
    else
      os << " + " << rat_to_decimal(c);
    os << " " << p.var_names[j];
  }
  os << "\nSubject To\n";
  for (const LinConstraint& c : p.constraints) {
    mpz_class scale = common_denominator(c);
    os << " " << c.name << ":";
    for (const LinTerm& t : c.terms) {
      Rat scaled = t.coef * Rat(scale);
      if (scaled < 0)
        os << " - " << int_str(-scaled);
      else
        os << " + " << int_str(scaled);
      os << " " << p.var_names[size_t(t.var)];
    }
    os << (c.rel == Rel::Le ? " <= " : c.rel == Rel::Ge ? " >= " : " = ");
    os << int_str(c.rhs * Rat(scale)) << "\n";
  }
  os << "Bounds\n";  // all variables default to >= 0
  os << "General\n";
  for (const auto& name : p.var_names) os << " " << name << "\n";
  os << "End\n";
  return os.str();
}

namespace {

struct Tokenizer {
  explicit Tokenizer(const std::string& text) : text_(text) {}

  // Lines, with comments stripped.
  std::vector<std::string> lines() {
    std::vector<std::string> out;
    std::istringstream in(text_);
    std::string line;
    while (std::getline(in, line)) {
      if (auto c = line.find('\\'); c != std::string::npos) line.erase(c);
      while (!line.empty() && std::isspace(u(line.back()))) line.pop_back();
      out.push_back(line);
    }
    return out;
  }

  static int u(char c) { return static_cast<unsigned char>(c); }

  const std::string& text_;
};

bool is_section(const std::string& line, const char* word) {
  std::string lower;
  for (char c : line) lower.push_back(char(std::tolower(Tokenizer::u(c))));
  std::string target = word;
  // trim leading space
  size_t start = lower.find_first_not_of(" \t");
  if (start == std::string::npos) return false;
  return lower.compare(start, target.size(), target) == 0 &&
         (start + target.size() == lower.size() ||
          lower.find_first_not_of(" \t", start + target.size()) == std::string::npos);
}

struct ExprParser {
  // Parses "+ 3 x - y + 0.5 z" into terms against the variable interner.
  ExprParser(IlpProblem& p, std::map<std::string, int>& index) : p_(p), index_(index) {}

  int var_of(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int id = p_.add_var(name);
    index_[name] = id;
    return id;
  }

  std::vector<LinTerm> parse(const std::string& text, Rat* rhs, Rel* rel) {
    std::vector<LinTerm> terms;
    std::istringstream in(text);
    std::string tok;
    Rat sign = 1;
    std::optional<Rat> pending_coef;
    bool after_rel = false;
    while (in >> tok) {
      if (tok == "+") {
        sign = 1;
        continue;
      }
      if (tok == "-") {
        sign = -1;
        continue;
      }
      if (tok == "<=" || tok == "=<") {
        *rel = Rel::Le;
        after_rel = true;
        continue;
      }
      if (tok == ">=" || tok == "=>") {
        *rel = Rel::Ge;
        after_rel = true;
        continue;
      }
      if (tok == "=") {
        *rel = Rel::Eq;
        after_rel = true;
        continue;
      }
      // A token is a number iff it starts with a digit (or sign/dot followed
      // by one); variable names like "e12" stay names.
      char c0 = tok[0];
      bool numeric = std::isdigit(Tokenizer::u(c0)) ||
                     ((c0 == '-' || c0 == '+' || c0 == '.') && tok.size() > 1 &&
                      std::isdigit(Tokenizer::u(tok[1])));
      if (numeric) {
        Rat v = rat_parse(tok) * sign;
        sign = 1;
        if (after_rel) {
          *rhs = v;
        } else {
          pending_coef = v;
        }
        continue;
      }
      // Variable name.
      Rat coef = pending_coef ? *pending_coef : sign;
      pending_coef.reset();
      sign = 1;
      terms.push_back({var_of(tok), coef});
    }
    return terms;
  }

  IlpProblem& p_;
  std::map<std::string, int>& index_;
};

}  // namespace

IlpProblem parse_lp(const std::string& text) {
  IlpProblem p;
  std::map<std::string, int> index;
  ExprParser expr(p, index);

  enum class Section { None, Objective, Constraints, Bounds, General, End };
  Section section = Section::None;

  std::string pending;  // accumulates a logical statement (may span lines)
  auto flush_statement = [&](Section sec, const std::string& stmt) {
    if (stmt.find_first_not_of(" \t") == std::string::npos) return;
    std::string body = stmt;
    std::string name;
    if (auto colon = stmt.find(':'); colon != std::string::npos) {
      name = stmt.substr(0, colon);
      if (auto s = name.find_first_not_of(" \t"); s != std::string::npos) name = name.substr(s);
      body = stmt.substr(colon + 1);
    }
    if (sec == Section::Objective) {
      Rat rhs;
      Rel rel = Rel::Le;
      std::vector<LinTerm> terms = expr.parse(body, &rhs, &rel);
      for (const LinTerm& t : terms) p.objective[size_t(t.var)] += t.coef;
    } else if (sec == Section::Constraints) {
      LinConstraint c;
      c.name = name;
      c.rel = Rel::Le;
      c.terms = expr.parse(body, &c.rhs, &c.rel);
      p.constraints.push_back(std::move(c));
    }
    // Bounds and General entries carry no information here: every variable
    // is a non-negative integer by construction.
  };

  Tokenizer tz(text);
  for (const std::string& line : tz.lines()) {
    if (is_section(line, "maximize") || is_section(line, "max")) {
      section = Section::Objective;
      pending.clear();
      continue;
    }
    if (is_section(line, "subject to") || is_section(line, "st") || is_section(line, "s.t.")) {
      flush_statement(Section::Objective, pending);
      pending.clear();
      section = Section::Constraints;
      continue;
    }
    if (is_section(line, "bounds")) {
      flush_statement(section == Section::Objective ? Section::Objective : Section::Constraints,
                      pending);
      pending.clear();
      section = Section::Bounds;
      continue;
    }
    if (is_section(line, "general") || is_section(line, "generals") || is_section(line, "integer")) {
      pending.clear();
      section = Section::General;
      continue;
    }
    if (is_section(line, "end")) {
      pending.clear();
      section = Section::End;
      continue;
    }
    switch (section) {
      case Section::Objective:
        pending += " " + line;
        break;
      case Section::Constraints: {
        // A new named constraint starts when the line contains ':'; our own
        // exporter emits one constraint per line.
        std::string stmt = line;
        flush_statement(Section::Constraints, stmt);
        break;
      }
      case Section::General: {
        std::istringstream in(line);
        std::string name;
        while (in >> name) expr.var_of(name);
        break;
      }
      default:
        break;
    }
  }
  flush_statement(section == Section::Objective ? Section::Objective : Section::None, pending);
  return p;
}

}  // namespace wcea
