#include "wcea/model.hpp"

#include <sstream>

#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(EnergyUnit u) {
  return u == EnergyUnit::NanoJoule ? "nJ" : "J";
}

const CounterDef* EnergyModel::find(const std::string& id) const {
  for (const auto& c : counters)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

EnergyModel make_model(std::string name, EnergyUnit unit, ModelMode mode, std::string target,
                       const char* alpha,
                       std::initializer_list<std::tuple<const char*, const char*, const char*>> cs) {
  EnergyModel m;
  m.name = std::move(name);
  m.unit = unit;
  m.mode = mode;
  m.target = std::move(target);
  m.alpha = rat_parse(alpha);
  for (const auto& [id, label, beta] : cs)
    m.counters.push_back({id, label, rat_parse(beta)});
  return m;
}

std::vector<EnergyModel> build_builtins() {
  using namespace counters;
  std::vector<EnergyModel> models;

  models.push_back(make_model(
      "cortex-m0.v1", EnergyUnit::NanoJoule, ModelMode::StaticCapable, "ARM Cortex-M0 (STM32F051)",
      "0",
      {
          {kInsnNonMul.c_str(), "executed instructions without multiplications", "0.972565030"},
          {kRamReads.c_str(), "RAM data reads", "0.652871770"},
          {kRamWrites.c_str(), "RAM writes", "1.031341343"},
          {kFlashReads.c_str(), "Flash data reads", "1.037625441"},
          {kTakenBranches.c_str(), "taken branches", "1.354953706"},
          {kMuls.c_str(), "multiplication instructions", "2.274650563"},
      }));

  auto leon3 = [&](const char* name, const char* alpha,
                   std::initializer_list<std::tuple<const char*, const char*, const char*>> cs) {
    models.push_back(make_model(name, EnergyUnit::Joule, ModelMode::ReplayOnly,
                                "Gaisler LEON3 (GR712RC)", alpha, cs));
  };

  leon3("leon3.allsupported.allevents", "0.155261",
        {{"TIME", "TIME (C0)", "2.94155e-08"},
         {"ICHOLD", "ICHOLD (C2)", "2.5661e-09"},
         {"WBHOLD", "WBHOLD (C5)", "9.93453e-09"},
         {"CALL", "CALL (C12)", "8.97535e-10"},
         {"TYPE2", "TYPE2 (C13)", "3.21255e-09"},
         {"LOAD", "LOAD (C15)", "6.14384e-09"},
         {"STORE", "STORE (C16)", "4.54827e-08"}});
  leon3("leon3.allsupported.bottomup", "0",
        {{"TIME", "TIME (C0)", "3.19557e-08"}, {"STORE", "STORE (C16)", "5.79224e-08"}});
  leon3("leon3.allsupported.topdown", "0.131077",
        {{"TIME", "TIME (C0)", "3.13122e-08"},
         {"WBHOLD", "WBHOLD (C5)", "9.17778e-09"},
         {"LOAD", "LOAD (C15)", "2.99043e-09"},
         {"STORE", "STORE (C16)", "3.92999e-08"}});
  leon3("leon3.allsupported.fullexhaustive", "0.131087",
        {{"TIME", "TIME (C0)", "3.13122e-08"},
         {"WBHOLD", "WBHOLD (C5)", "9.17779e-09"},
         {"LDST", "LDST (C14)", "2.99043e-09"},
         {"STORE", "STORE (C16)", "3.63095e-08"}});
  leon3("leon3.isacache.allevents", "0",
        {{"DCMISS", "DCMISS (C3)", "1.18567e-06"},
         {"CALL", "CALL (C12)", "5.9072e-07"},
         {"TYPE2", "TYPE2 (C13)", "3.88949e-08"},
         {"LDST", "LDST (C14)", "8.03337e-08"},
         {"STORE", "STORE (C16)", "6.89885e-08"}});
  leon3("leon3.isacache.bottomup", "0",
        {{"IINST", "IINST (C7)", "3.93365e-08"}, {"STORE", "STORE (C16)", "1.87111e-07"}});
  leon3("leon3.isacache.topdown", "0",
        {{"IINST", "IINST (C7)", "3.93365e-08"}, {"STORE", "STORE (C16)", "1.87111e-07"}});
  leon3("leon3.isacache.fullexhaustive", "0",
        {{"IINST", "IINST (C7)", "3.93365e-08"}, {"STORE", "STORE (C16)", "1.87111e-07"}});
  return models;
}

// The statically predictable counter set of the ARMv6-M frontend.
bool statically_predictable(const std::string& id) {
  using namespace counters;
  return id == kInsnNonMul || id == kRamReads || id == kRamWrites || id == kFlashReads ||
         id == kTakenBranches || id == kMuls;
}

void validate(const EnergyModel& m) {
  if (m.name.empty()) throw ModelError("model has no name");
  if (m.alpha < 0) throw ModelError("model '" + m.name + "' has negative intercept");
  for (const auto& c : m.counters) {
    if (c.beta < 0)
      throw ModelError("model '" + m.name + "' has negative coefficient for " + c.id);
  }
  if (m.mode == ModelMode::StaticCapable) {
    if (m.alpha != 0)
      throw ModelError("model '" + m.name + "' declares static mode with nonzero intercept");
    for (const auto& c : m.counters)
      if (!statically_predictable(c.id))
        throw ModelError("model '" + m.name + "' declares static mode but counter '" + c.id +
                         "' is not statically predictable");
  }
}

}  // namespace

const std::vector<EnergyModel>& builtin_models() {
  static const std::vector<EnergyModel> models = build_builtins();
  return models;
}

const EnergyModel& builtin_model(const std::string& name) {
  for (const auto& m : builtin_models())
    if (m.name == name) return m;
  throw ModelError("no built-in model named '" + name + "'");
}

EnergyModel parse_model_file(const std::string& text) {
  EnergyModel m;
  m.mode = ModelMode::ReplayOnly;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    auto err = [&](const std::string& msg) {
      throw ModelError("model file line " + std::to_string(lineno) + ": " + msg);
    };
    if (line.rfind("counter ", 0) == 0) {
      std::istringstream ls(line.substr(8));
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() < 2) err("counter needs '<id> [label...] <beta>'");
      CounterDef c;
      c.id = tokens.front();
      c.beta = rat_parse(tokens.back());
      for (size_t i = 1; i + 1 < tokens.size(); i++) {
        if (!c.label.empty()) c.label += ' ';
        c.label += tokens[i];
      }
      if (c.label.empty()) c.label = c.id;
      m.counters.push_back(std::move(c));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) err("expected key=value or counter line");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "name") m.name = value;
    else if (key == "unit") {
      if (value == "nJ") m.unit = EnergyUnit::NanoJoule;
      else if (value == "J") m.unit = EnergyUnit::Joule;
      else err("unit must be nJ or J");
    } else if (key == "mode") {
      if (value == "static") m.mode = ModelMode::StaticCapable;
      else if (value == "replay") m.mode = ModelMode::ReplayOnly;
      else err("mode must be static or replay");
    } else if (key == "alpha") m.alpha = rat_parse(value);
    else if (key == "target") m.target = value;
    else err("unknown key '" + key + "'");
  }
  validate(m);
  return m;
}

std::string write_model_file(const EnergyModel& m) {
  std::ostringstream os;
  os << "name=" << m.name << "\n";
  os << "unit=" << to_string(m.unit) << "\n";
  os << "mode=" << (m.mode == ModelMode::StaticCapable ? "static" : "replay") << "\n";
  if (!m.target.empty()) os << "target=" << m.target << "\n";
  os << "alpha=" << rat_to_decimal(m.alpha) << "\n";
  for (const auto& c : m.counters)
    os << "counter " << c.id << " " << c.label << " " << rat_to_decimal(c.beta) << "\n";
  return os.str();
}

CounterTrace parse_trace_csv(const std::string& text) {
  CounterTrace trace;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ModelError("trace CSV is missing a header row");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };

  std::vector<std::string> header = split(line);
  bool has_label = !header.empty() && header.front() == "label";
  bool has_energy = !header.empty() && header.back() == "energy";
  size_t first = has_label ? 1 : 0;
  size_t last = header.size() - (has_energy ? 1 : 0);
  for (size_t i = first; i < last; i++) {
    if (header[i].empty()) throw ModelError("trace CSV has an empty counter id in the header");
    trace.counter_ids.push_back(header[i]);
  }

  int rowno = 1;
  while (std::getline(in, line)) {
    rowno++;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw ModelError("trace CSV row " + std::to_string(rowno) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    TraceRow row;
    row.label = has_label ? cells[0] : "row" + std::to_string(rowno - 1);
    for (size_t i = first; i < last; i++) {
      try {
        row.events[trace.counter_ids[i - first]] = std::stoull(cells[i]);
      } catch (...) {
        throw ModelError("trace CSV row " + std::to_string(rowno) + ": bad count '" + cells[i] +
                         "'");
      }
    }
    if (has_energy && !cells.back().empty()) row.energy = rat_parse(cells.back());
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

std::string write_trace_csv(const CounterTrace& trace) {
  std::ostringstream os;
  bool any_energy = false;
  for (const auto& r : trace.rows) any_energy |= r.energy.has_value();
  os << "label";
  for (const auto& id : trace.counter_ids) os << "," << id;
  if (any_energy) os << ",energy";
  os << "\n";
  for (const auto& r : trace.rows) {
    os << r.label;
    for (const auto& id : trace.counter_ids) {
      auto it = r.events.find(id);
      os << "," << (it == r.events.end() ? 0 : it->second);
    }
    if (any_energy) {
      os << ",";
      if (r.energy) os << rat_to_decimal(*r.energy);
    }
    os << "\n";
  }
  return os.str();
}

Rat price(const EventVector& events, const EnergyModel& model) {
  Rat total = model.alpha;
  for (const auto& [id, count] : events) {
    const CounterDef* c = model.find(id);
    if (!c) throw ModelError("counter '" + id + "' is not in model '" + model.name + "'");
    total += c->beta * rat_of(count);
  }
  return total;
}

ReplayResult replay(const EnergyModel& model, const CounterTrace& trace) {
  for (const auto& c : model.counters) {
    bool found = false;
    for (const auto& id : trace.counter_ids) found |= id == c.id;
    if (!found)
      throw ModelError("trace is missing counter column '" + c.id + "' required by model '" +
                       model.name + "'");
  }
  ReplayResult result;
  for (const auto& row : trace.rows) {
    Rat e = model.alpha;
    for (const auto& c : model.counters) {
      auto it = row.events.find(c.id);
      uint64_t count = it == row.events.end() ? 0 : it->second;
      e += c.beta * rat_of(count);
    }
    result.per_row.push_back(e);
    result.total += e;
  }
  // An empty trace evaluates to the intercept alone.
  if (trace.rows.empty()) result.total = model.alpha;
  return result;
}

}  // namespace wcea
