#include "wcea/driver.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "wcea/loader.hpp"

namespace wcea {

namespace {

std::string hex(uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

uint64_t to_u64(const Rat& v) {
  if (v.get_den() != 1 || v < 0) throw AnalysisError("witness frequency is not a natural number");
  return mpz_get_ui(v.get_num().get_mpz_t());
}

std::string delta_band_of(double delta) {
  if (delta == 0) return "0%";
  if (delta > 0 && delta < 1) return "<1%";
  if (delta < 0 && delta > -1) return "<-1%";
  std::ostringstream os;
  os << int64_t(delta < 0 ? delta - 0.5 : delta + 0.5) << "%";
  return os.str();
}

}  // namespace

const char* code_string(WarningCode c) {
  switch (c) {
    case WarningCode::TraceDerivedBound: return "W001";
    case WarningCode::UnknownRegionAccess: return "W002";
    case WarningCode::OpaqueInstruction: return "W003";
    case WarningCode::RelaxationBoundOnly: return "W004";
    case WarningCode::DeviceAccess: return "W005";
    case WarningCode::UndefinedHint: return "W006";
  }
  return "W???";
}

EnergyModel resolve_model(const std::string& spec) {
  for (const auto& m : builtin_models())
    if (m.name == spec) return m;
  std::ifstream probe(spec);
  if (!probe) throw ConfigError("model '" + spec + "' is neither a built-in nor a readable file");
  std::ostringstream os;
  os << probe.rdbuf();
  return parse_model_file(os.str());
}

AnalysisRun run_analysis(MemoryImage image_in, const AnnotationSet& annotations,
                         const EnergyModel& model, const DriverOptions& options) {
  if (model.mode != ModelMode::StaticCapable)
    throw ConfigError("model '" + model.name + "' is replay-only; static analysis needs a static-capable model");

  AnalysisRun out;
  out.image = std::make_unique<MemoryImage>(std::move(image_in));
  const MemoryImage& image = *out.image;
  AnnotationSet ann = annotations;

  uint32_t entry = image.entry();
  if (ann.entry_symbol) {
    auto a = image.symbol_address(*ann.entry_symbol);
    if (!a) throw ConfigError("entry symbol '" + *ann.entry_symbol + "' not found");
    entry = *a & ~1u;
  }
  if (ann.entry_addr) entry = *ann.entry_addr & ~1u;

  out.cfg = std::make_unique<Cfg>(reconstruct(image, entry, ann));
  const Cfg& cfg = *out.cfg;
  out.ctx_cfg = std::make_unique<ContextualCfg>(
      expand_contexts(cfg, options.contexts, options.loop_mode));
  const ContextualCfg& g = *out.ctx_cfg;

  ValueAnalysisConfig vcfg = options.value_config;
  if (options.initial_sp) vcfg.initial_sp = *options.initial_sp;
  ValueResults values = analyze(g, image, ann, vcfg);

  AnalysisReport& report = out.report;
  report.model_name = model.name;
  report.target = model.target;
  report.unit = model.unit;
  report.entry = entry;
  report.status = "ok";

  // Resolve loop bounds; when the oracle is on, derive trace bounds for
  // anything the analysis and annotations left open.
  std::optional<SimResult> oracle_sim;
  auto run_oracle = [&]() -> const SimResult& {
    if (!oracle_sim) {
      SimOptions sopt;
      sopt.start = entry;
      sopt.stop = options.stop;
      sopt.max_steps = options.max_steps;
      if (options.initial_sp) sopt.initial_sp = *options.initial_sp;
      sopt.stack_limit = options.stack_limit;
      oracle_sim = wcea::run(image, sopt);
      if (oracle_sim->stop == StopReason::Fault)
        throw AnalysisError("oracle simulation faulted at " + hex(oracle_sim->stop_pc) + ": " +
                            oracle_sim->fault_cause);
    }
    return *oracle_sim;
  };

  const auto& instances = g.loop_instances();
  std::map<int, LoopBound> final_bounds;
  std::vector<int> unbounded;
  for (size_t i = 0; i < instances.size(); i++) {
    try {
      final_bounds[int(i)] = bound_for(g, int(i), values, ann);
    } catch (const UnboundedLoopError&) {
      unbounded.push_back(int(i));
    }
  }
  if (!unbounded.empty() && options.oracle) {
    AnnotationSet trace_facts = derive_flow_facts(run_oracle(), cfg);
    ann.merge_trace_facts(trace_facts);
    for (int i : unbounded) final_bounds[i] = bound_for(g, i, values, ann);
  } else if (!unbounded.empty()) {
    uint32_t head =
        cfg.block(cfg.loop(instances[size_t(unbounded.front())].loop).header).start;
    throw UnboundedLoopError("loop at " + hex(head) +
                                 " has no bound (annotate it or enable the oracle)",
                             head);
  }

  for (const auto& [i, b] : final_bounds) {
    LoopBoundReport lr;
    lr.instance = i;
    lr.head_addr = cfg.block(cfg.loop(instances[size_t(i)].loop).header).start;
    lr.min = b.min;
    lr.max = b.max;
    lr.provenance = b.provenance;
    report.loop_bounds.push_back(lr);
    if (b.provenance == BoundProvenance::Trace)
      report.warnings.push_back({WarningCode::TraceDerivedBound, lr.head_addr,
                                 "loop bound 0.." + std::to_string(b.max) +
                                     " derived from a simulation trace; the run may not "
                                     "exercise the worst case"});
  }

  // Event pricing.
  out.costs = compute_costs(g, values, model);
  for (const auto& [node, addr, cls] : out.costs.worst_case_accesses) {
    WarningCode code =
        cls == AddressClass::Device ? WarningCode::DeviceAccess : WarningCode::UnknownRegionAccess;
    report.warnings.push_back({code, addr,
                               std::string(cls == AddressClass::Device
                                               ? "device-region access priced worst-case"
                                               : "unknown-region access priced worst-case")});
  }
  for (const BasicBlock& bb : cfg.blocks()) {
    for (const Instr& in : bb.instrs) {
      if (in.analysis_opaque)
        report.warnings.push_back({WarningCode::OpaqueInstruction, in.addr,
                                   std::string(to_string(in.mnem)) +
                                       " treated as leaving the analyzed scope"});
      if (in.undefined_hint)
        report.warnings.push_back(
            {WarningCode::UndefinedHint, in.addr, "unallocated hint executes as NOP"});
    }
  }

  // IPET.
  IpetInputs inputs;
  inputs.loop_bounds = final_bounds;
  inputs.flow_constraints = ann.flow_constraints;
  inputs.infeasible_edges = values.infeasible_edges;
  for (uint32_t addr : ann.infeasible) {
    bool any = false;
    for (const BasicBlock& bb : cfg.blocks()) {
      if (addr < bb.start || addr >= bb.end) continue;
      for (int nid : g.nodes_of_block(bb.id)) {
        inputs.infeasible_nodes.insert(nid);
        any = true;
      }
    }
    if (!any)
      throw ConfigError("infeasible annotation at " + hex(addr) + " matches no block");
  }
  for (const auto& [sym, depth] : ann.recursion_depths) {
    std::optional<uint32_t> addr = image.symbol_address(sym);
    if (!addr && sym.rfind("0x", 0) == 0)
      addr = uint32_t(std::stoul(sym.substr(2), nullptr, 16));
    if (!addr) throw ConfigError("recursion symbol '" + sym + "' not found");
    for (const Routine& r : cfg.routines())
      if (r.entry_addr == (*addr & ~1u)) inputs.recursion_depths[r.id] = depth;
  }

  out.ipet = build_ipet(g, out.costs, inputs);
  const IpetProblem& ipet = out.ipet;
  out.node_freq.assign(g.nodes().size(), 0);
  out.edge_freq.assign(g.edges().size(), 0);

  PathSolution solution;
  bool budget_hit = false;
  Rat relaxation_bound = 0;
  try {
    solution = solve_ilp(ipet.ilp, options.budget);
  } catch (const SolverBudgetError& e) {
    if (!e.has_bound) throw;
    budget_hit = true;
    relaxation_bound = e.relaxation_bound;
  }

  if (budget_hit) {
    report.status = "budget-exceeded";
    report.wcec = relaxation_bound;
    report.warnings.push_back({WarningCode::RelaxationBoundOnly, 0,
                               "solver budget exceeded; the value is an LP relaxation bound, "
                               "not a worst-case path"});
  } else {
    if (solution.status == SolveStatus::Infeasible)
      throw AnalysisError("path ILP is infeasible (contradictory flow constraints)");
    if (solution.status == SolveStatus::Unbounded)
      throw AnalysisError("path ILP is unbounded (missing loop bound?)");
    report.wcec = solution.objective;

    // Witness extraction plus the invariants the solver is not trusted for:
    // flow conservation and objective reproducibility.
    for (size_t n = 0; n < g.nodes().size(); n++)
      out.node_freq[n] = to_u64(solution.values[size_t(ipet.node_var[n])]);
    for (size_t e = 0; e < g.edges().size(); e++)
      out.edge_freq[e] = to_u64(solution.values[size_t(ipet.edge_var[e])]);
    if (to_u64(solution.values[size_t(ipet.entry_var)]) != 1)
      throw AnalysisError("witness violates the unit-entry constraint");
    for (size_t n = 0; n < g.nodes().size(); n++) {
      uint64_t in_sum = int(n) == g.entry_node() ? 1 : 0;
      for (int eid : g.in_edges(int(n))) in_sum += out.edge_freq[size_t(eid)];
      uint64_t out_sum = 0;
      for (int eid : g.out_edges(int(n))) out_sum += out.edge_freq[size_t(eid)];
      if (in_sum != out.node_freq[n] || out_sum != out.node_freq[n])
        throw AnalysisError("witness violates flow conservation at node " + std::to_string(n));
    }
    Rat repriced = 0;
    for (size_t n = 0; n < g.nodes().size(); n++)
      repriced += out.costs.node_costs[n].energy * rat_of(out.node_freq[n]);
    for (size_t e = 0; e < g.edges().size(); e++)
      repriced += out.costs.edge_costs[e].energy * rat_of(out.edge_freq[e]);
    if (repriced != solution.objective)
      throw AnalysisError("witness re-pricing does not reproduce the objective");
  }

  // Static per-counter totals over the witness.
  for (size_t n = 0; n < g.nodes().size(); n++)
    report.static_totals += scale(out.costs.node_costs[n].events, out.node_freq[n]);
  for (size_t e = 0; e < g.edges().size(); e++)
    report.static_totals += scale(out.costs.edge_costs[e].events, out.edge_freq[e]);

  // Per-(block, context) and per-routine breakdowns.
  for (size_t n = 0; n < g.nodes().size(); n++) {
    const CtxNode& node = g.nodes()[n];
    BlockReport br;
    br.node = int(n);
    br.addr = cfg.block(node.block).start;
    br.ctx = node.ctx;
    br.routine = cfg.block(node.block).routine;
    br.energy = out.costs.node_costs[n].energy;
    br.frequency = out.node_freq[n];
    report.blocks.push_back(br);
  }
  std::sort(report.blocks.begin(), report.blocks.end(), [](const BlockReport& a, const BlockReport& b) {
    return std::tie(a.routine, a.addr, a.ctx) < std::tie(b.routine, b.addr, b.ctx);
  });

  std::map<int, Rat> routine_energy;
  for (size_t n = 0; n < g.nodes().size(); n++) {
    int r = cfg.block(g.nodes()[n].block).routine;
    routine_energy[r] += out.costs.node_costs[n].energy * rat_of(out.node_freq[n]);
  }
  for (size_t e = 0; e < g.edges().size(); e++) {
    // Edge energy is attributed to the source block's routine.
    int src_node = g.edges()[e].src_node;
    int r = cfg.block(g.nodes()[size_t(src_node)].block).routine;
    routine_energy[r] += out.costs.edge_costs[e].energy * rat_of(out.edge_freq[e]);
  }
  for (const Routine& r : cfg.routines()) {
    RoutineReport rr;
    rr.routine = r.id;
    rr.name = r.name;
    rr.addr = r.entry_addr;
    rr.energy = routine_energy[r.id];
    report.routines.push_back(rr);
  }
  std::sort(report.routines.begin(), report.routines.end(),
            [](const RoutineReport& a, const RoutineReport& b) { return a.addr < b.addr; });

  std::sort(report.loop_bounds.begin(), report.loop_bounds.end(),
            [](const LoopBoundReport& a, const LoopBoundReport& b) {
              return std::tie(a.head_addr, a.instance) < std::tie(b.head_addr, b.instance);
            });
  std::sort(report.warnings.begin(), report.warnings.end(), [](const Warning& a, const Warning& b) {
    return std::tie(a.code, a.addr, a.text) < std::tie(b.code, b.addr, b.text);
  });
  report.warnings.erase(std::unique(report.warnings.begin(), report.warnings.end(),
                                    [](const Warning& a, const Warning& b) {
                                      return a.code == b.code && a.addr == b.addr &&
                                             a.text == b.text;
                                    }),
                        report.warnings.end());

  // Oracle comparison.
  if (options.oracle) {
    const SimResult& sim = run_oracle();
    OracleReport oracle;
    oracle.counters = sim.counters;
    oracle.model_energy = model_result(sim, model);
    oracle.executed = sim.executed;
    oracle.stop = sim.stop;
    double static_e = rat_to_double(report.wcec);
    double model_e = rat_to_double(oracle.model_energy);
    if (model_e == 0)
      oracle.delta_percent = static_e == 0 ? 0 : std::numeric_limits<double>::infinity();
    else
      oracle.delta_percent = (static_e - model_e) / model_e * 100.0;
    oracle.delta_band = delta_band_of(oracle.delta_percent);
    report.oracle = std::move(oracle);
  }

  return out;
}

AnalysisRun analyze(const AnalysisConfig& config) {
  MemoryMap map = MemoryMap::cortex_m0_default();
  if (config.map_path) map = parse_memory_map(read_file(*config.map_path));

  std::string binary = read_file(config.binary_path);
  std::span<const uint8_t> bytes(reinterpret_cast<const uint8_t*>(binary.data()), binary.size());

  AnnotationSet ann;
  if (config.annotations_path) ann = parse_annotations(read_file(*config.annotations_path));
  if (config.entry) ann.entry_addr = config.entry;
  if (config.entry_symbol) ann.entry_symbol = config.entry_symbol;

  MemoryImage image = config.raw
                          ? load_raw(bytes, config.raw_base,
                                     ann.entry_addr.value_or(config.raw_base), map)
                          : load_elf(bytes, map);

  EnergyModel model = resolve_model(config.model_spec);
  AnalysisRun result = run_analysis(std::move(image), ann, model, config.options);

  if (config.lp_path) {
    std::ofstream lp(*config.lp_path, std::ios::binary);
    if (!lp) throw ConfigError("cannot write LP file: " + *config.lp_path);
    lp << export_lp(result.ipet.ilp);
  }
  if (config.report_path) emit_report_xml(result.report, *config.report_path);
  if (config.dot_dir) emit_dot(result, *config.dot_dir);
  return result;
}

}  // namespace wcea
