#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcea/events.hpp"
#include "wcea/rational.hpp"

namespace wcea {

enum class EnergyUnit : uint8_t { NanoJoule, Joule };
enum class ModelMode : uint8_t { StaticCapable, ReplayOnly };

const char* to_string(EnergyUnit u);

struct CounterDef {
  std::string id;
  std::string label;
  Rat beta;  // >= 0 by construction (NNLS) and validated at load
};

// A named linear energy model E = sum(beta_x * C_x) + alpha. Static-capable
// models must have alpha == 0 (block-level analysis has nowhere to put a
// per-run constant) and may only use counters the frontend can predict;
// everything else is replay-only.
struct EnergyModel {
  std::string name;
  EnergyUnit unit = EnergyUnit::NanoJoule;
  std::vector<CounterDef> counters;
  Rat alpha = 0;
  std::string target;
  ModelMode mode = ModelMode::ReplayOnly;

  const CounterDef* find(const std::string& id) const;
};

struct TraceRow {
  std::string label;
  EventVector events;
  std::optional<Rat> energy;  // measured, when present
};

// Rows of counter vectors at block or benchmark granularity, all sharing one
// counter set.
struct CounterTrace {
  std::vector<std::string> counter_ids;
  std::vector<TraceRow> rows;
};

// The built-in models: cortex-m0.v1 (six counters, nJ, static-capable) and
// the eight LEON3 coarse-grained J models (replay-only).
const std::vector<EnergyModel>& builtin_models();

// Lookup by name among the built-ins. Throws ModelError when unknown.
const EnergyModel& builtin_model(const std::string& name);

// Flat textual model file: name=, unit=nJ|J, mode=static|replay,
// alpha=<decimal>, target=<string>, and one `counter <id> <label...> <beta>`
// line per counter. Validates the static-capable invariants.
EnergyModel parse_model_file(const std::string& text);
std::string write_model_file(const EnergyModel& model);

// CSV with a header of counter ids plus optional trailing `energy` column.
CounterTrace parse_trace_csv(const std::string& text);
std::string write_trace_csv(const CounterTrace& trace);

struct ReplayResult {
  std::vector<Rat> per_row;
  Rat total = 0;
};

// Evaluates the model on measured counters (the counter-replay mode used for
// the LEON3 targets). Missing counter columns are an error; extra columns
// are ignored. Alpha is added once per row.
ReplayResult replay(const EnergyModel& model, const CounterTrace& trace);

// Exact dot product plus intercept for a single event vector. Unknown
// counter ids in `events` are an error.
Rat price(const EventVector& events, const EnergyModel& model);

}  // namespace wcea
