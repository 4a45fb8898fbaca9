#include "wcea/annotations.hpp"

#include <cctype>

#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(BoundProvenance p) {
  switch (p) {
    case BoundProvenance::Analysis: return "analysis";
    case BoundProvenance::Annotation: return "annotation";
    case BoundProvenance::Trace: return "trace";
  }
  return "?";
}

namespace {

// Hand-rolled scanner with line/column tracking; the language is small
// enough that a tokenizer per statement keeps diagnostics precise.
class Scanner {
public:
  explicit Scanner(const std::string& text) : text_(text) {}

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw AnnotationError(msg + " at line " + std::to_string(line_) + ", column " +
                              std::to_string(col_),
                          line_, col_);
  }

  std::string word() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '.' ||
            text_[pos_] == '-'))
      advance();
    if (start == pos_) fail("expected a word");
    return text_.substr(start, pos_ - start);
  }

  // Number token, including "0x..", "1.5", "1/3", "..", negative values.
  std::string number() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) advance();
    while (pos_ < text_.size() &&
           (std::isalnum(uc(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == '/'))
      advance();
    if (start == pos_) fail("expected a number");
    return text_.substr(start, pos_ - start);
  }

  bool peek_char(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek_char(c)) return false;
    advance();
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool peek_word(const std::string& w) {
    skip_ws();
    if (text_.compare(pos_, w.size(), w) != 0) return false;
    size_t after = pos_ + w.size();
    return after >= text_.size() || !(std::isalnum(uc(text_[after])) || text_[after] == '_');
  }

  bool accept_word(const std::string& w) {
    if (!peek_word(w)) return false;
    for (size_t i = 0; i < w.size(); i++) advance();
    return true;
  }

  int line() const { return line_; }
  int column() const { return col_; }

private:
  static int uc(char c) { return static_cast<unsigned char>(c); }

  void advance() {
    if (text_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(uc(text_[pos_]))) advance();
      if (pos_ < text_.size() && text_[pos_] == '#') {  // comment to end of line
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

uint32_t parse_addr(Scanner& s, const std::string& tok) {
  if (tok.size() < 3 || tok[0] != '0' || (tok[1] != 'x' && tok[1] != 'X'))
    s.fail("expected a hex address with 0x prefix, got '" + tok + "'");
  try {
    unsigned long v = std::stoul(tok.substr(2), nullptr, 16);
    if (v > 0xffffffffull) s.fail("address out of 32-bit range: " + tok);
    return uint32_t(v);
  } catch (const AnnotationError&) {
    throw;
  } catch (...) {
    s.fail("malformed address '" + tok + "'");
  }
}

uint64_t parse_count(Scanner& s, const std::string& tok) {
  try {
    return std::stoull(tok, nullptr, 10);
  } catch (...) {
    s.fail("malformed count '" + tok + "'");
  }
}

bool is_address_token(const std::string& tok) {
  return tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X');
}

FlowExpr parse_flow_expr(Scanner& s) {
  FlowExpr e;
  bool first = true;
  for (;;) {
    Rat sign = 1;
    if (s.accept('+')) {
      // explicit plus
    } else if (s.accept('-')) {
      sign = -1;
    } else if (!first) {
      break;
    }
    first = false;
    if (s.peek_word("sum")) {
      s.word();
      s.expect('(');
      std::string kw = s.word();
      if (kw != "block") s.fail("expected 'block' inside sum(), got '" + kw + "'");
      uint32_t addr = parse_addr(s, s.number());
      s.expect(')');
      e.terms.emplace_back(sign, addr);
      continue;
    }
    std::string num = s.number();
    Rat coef;
    try {
      coef = rat_parse(num);
    } catch (const Error& err) {
      s.fail(err.what());
    }
    coef *= sign;
    if (s.accept('*')) {
      std::string kw = s.word();
      if (kw != "sum") s.fail("expected 'sum' after coefficient, got '" + kw + "'");
      s.expect('(');
      kw = s.word();
      if (kw != "block") s.fail("expected 'block' inside sum(), got '" + kw + "'");
      uint32_t addr = parse_addr(s, s.number());
      s.expect(')');
      e.terms.emplace_back(coef, addr);
    } else {
      e.constant += coef;
    }
  }
  return e;
}

}  // namespace

AnnotationSet parse_annotations(const std::string& text) {
  AnnotationSet out;
  Scanner s(text);
  while (!s.at_end()) {
    std::string key = s.word();
    if (key == "entry") {
      std::string tok = s.word();
      if (is_address_token(tok))
        out.entry_addr = parse_addr(s, tok);
      else
        out.entry_symbol = tok;
    } else if (key == "loop") {
      uint32_t addr = parse_addr(s, s.number());
      std::string kw = s.word();
      if (kw != "bound") s.fail("expected 'bound', got '" + kw + "'");
      uint64_t min = parse_count(s, s.number());
      s.expect('.');
      s.expect('.');
      uint64_t max = parse_count(s, s.number());
      if (min > max) s.fail("loop bound has min > max");
      if (out.loop_bounds.count(addr))
        s.fail("duplicate loop bound for 0x" + std::to_string(addr));
      out.loop_bounds[addr] = LoopBoundAnn{min, max, BoundProvenance::Annotation};
    } else if (key == "target") {
      uint32_t site = parse_addr(s, s.number());
      s.expect('=');
      std::vector<uint32_t> targets;
      targets.push_back(parse_addr(s, s.number()));
      while (s.accept(',')) targets.push_back(parse_addr(s, s.number()));
      out.indirect_targets[site] = std::move(targets);
    } else if (key == "infeasible") {
      out.infeasible.insert(parse_addr(s, s.number()));
    } else if (key == "flow") {
      FlowConstraintAnn c;
      c.lhs = parse_flow_expr(s);
      if (s.accept('<')) {
        s.expect('=');
        c.rel = FlowRel::Le;
      } else if (s.accept('>')) {
        s.expect('=');
        c.rel = FlowRel::Ge;
      } else if (s.accept('=')) {
        c.rel = FlowRel::Eq;
      } else {
        s.fail("expected a relation (<=, >=, =)");
      }
      c.rhs = parse_flow_expr(s);
      out.flow_constraints.push_back(std::move(c));
    } else if (key == "region") {
      uint32_t addr = parse_addr(s, s.number());
      s.expect('=');
      std::string kind = s.word();
      if (kind == "flash")
        out.region_facts[addr] = AddressClass::Flash;
      else if (kind == "ram")
        out.region_facts[addr] = AddressClass::Ram;
      else
        s.fail("expected flash|ram, got '" + kind + "'");
    } else if (key == "recursion") {
      std::string sym = s.word();
      std::string kw = s.word();
      if (kw != "depth") s.fail("expected 'depth', got '" + kw + "'");
      out.recursion_depths[sym] = parse_count(s, s.number());
    } else {
      s.fail("unknown annotation key '" + key + "'");
    }
    s.expect(';');
  }
  return out;
}

void AnnotationSet::merge_trace_facts(const AnnotationSet& trace) {
  for (const auto& [addr, bound] : trace.loop_bounds)
    loop_bounds.emplace(addr, bound);  // existing annotations win
}

}  // namespace wcea
