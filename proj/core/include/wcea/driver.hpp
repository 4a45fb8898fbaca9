#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wcea/annotations.hpp"
#include "wcea/cfg.hpp"
#include "wcea/contexts.hpp"
#include "wcea/event_analysis.hpp"
#include "wcea/ilp.hpp"
#include "wcea/ipet.hpp"
#include "wcea/model.hpp"
#include "wcea/simulator.hpp"
#include "wcea/value_analysis.hpp"

namespace wcea {

// One code per distinct warning condition; stable for downstream tooling.
enum class WarningCode : uint8_t {
  TraceDerivedBound,    // W001: loop bound from a simulation trace, may undershoot
  UnknownRegionAccess,  // W002: access priced under the worst-coefficient rule
  OpaqueInstruction,    // W003: SVC/BKPT/WFI/WFE treated as leaving scope
  RelaxationBoundOnly,  // W004: solver budget hit, value is an LP bound
  DeviceAccess,         // W005: device-region access priced worst-case
  UndefinedHint,        // W006: unallocated hint executed as NOP
};

const char* code_string(WarningCode c);

struct Warning {
  WarningCode code;
  uint32_t addr = 0;
  std::string text;
};

struct BlockReport {
  int node = -1;
  uint32_t addr = 0;
  int ctx = 0;
  int routine = -1;
  Rat energy;  // per execution
  uint64_t frequency = 0;
};

struct RoutineReport {
  int routine = -1;
  std::string name;
  uint32_t addr = 0;
  Rat energy;  // witness-weighted, including edges attributed to the routine
};

struct LoopBoundReport {
  int instance = -1;
  uint32_t head_addr = 0;
  uint64_t min = 0, max = 0;
  BoundProvenance provenance = BoundProvenance::Analysis;
};

struct OracleReport {
  EventVector counters;
  Rat model_energy;
  double delta_percent = 0;  // (static - model) / model * 100
  std::string delta_band;    // "0%", "<1%", "<-1%", "N%"
  uint64_t executed = 0;
  StopReason stop = StopReason::MaxSteps;
};

struct AnalysisReport {
  std::string status;  // "ok" or "budget-exceeded"
  Rat wcec;
  EnergyUnit unit = EnergyUnit::NanoJoule;
  std::string model_name;
  std::string target;
  uint32_t entry = 0;
  std::vector<RoutineReport> routines;
  std::vector<BlockReport> blocks;
  std::vector<LoopBoundReport> loop_bounds;
  std::vector<Warning> warnings;
  std::optional<OracleReport> oracle;
  EventVector static_totals;  // witness-weighted per-counter totals
};

struct DriverOptions {
  int contexts = 1;
  LoopContextMode loop_mode = LoopContextMode::FirstRest;
  std::chrono::milliseconds budget = std::chrono::minutes(10);
  bool oracle = false;
  std::set<uint32_t> stop;
  uint64_t max_steps = 10'000'000;
  std::optional<uint32_t> initial_sp;
  std::optional<uint32_t> stack_limit;
  ValueAnalysisConfig value_config;
};

// Everything one analysis produced; keeps the graphs alive for DOT export
// and tests.
struct AnalysisRun {
  std::unique_ptr<MemoryImage> image;
  std::unique_ptr<Cfg> cfg;
  std::unique_ptr<ContextualCfg> ctx_cfg;
  EventCosts costs;
  IpetProblem ipet;
  std::vector<uint64_t> node_freq;
  std::vector<uint64_t> edge_freq;
  AnalysisReport report;
};

// Full pipeline over an already-loaded image: reconstruct, contexts, value
// analysis, bounds (trace-derived when the oracle is enabled and a loop has
// no bound), event pricing, IPET, witness checks, report assembly.
AnalysisRun run_analysis(MemoryImage image, const AnnotationSet& annotations,
                         const EnergyModel& model, const DriverOptions& options);

// File-based front door used by the CLI.
struct AnalysisConfig {
  std::string binary_path;
  bool raw = false;
  uint32_t raw_base = 0;
  std::optional<uint32_t> entry;
  std::optional<std::string> entry_symbol;
  std::optional<std::string> annotations_path;
  std::string model_spec = "cortex-m0.v1";  // built-in name or model file path
  std::optional<std::string> map_path;
  std::optional<std::string> report_path;
  std::optional<std::string> dot_dir;
  std::optional<std::string> lp_path;
  DriverOptions options;
};

AnalysisRun analyze(const AnalysisConfig& config);

// Deterministic XML serialization of the report.
std::string report_to_xml(const AnalysisReport& report);
void emit_report_xml(const AnalysisReport& report, const std::string& path);

// One DOT graph per routine, written to <dir>/<routine>.dot; block labels
// carry address, per-execution energy and worst-case frequency, and
// zero-frequency nodes render gray.
std::string routine_to_dot(const AnalysisRun& run, int routine);
void emit_dot(const AnalysisRun& run, const std::string& dir);

// Resolves a model spec: a built-in name or a path to a model file.
EnergyModel resolve_model(const std::string& spec);

}  // namespace wcea
