#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "wcea/errors.hpp"
#include "wcea/rational.hpp"

namespace wcea {

struct LinTerm {
  int var = -1;
  Rat coef;
};

enum class Rel : uint8_t { Le, Eq, Ge };

struct LinConstraint {
  std::string name;
  std::vector<LinTerm> terms;
  Rel rel = Rel::Le;
  Rat rhs = 0;
};

// Maximization ILP over non-negative integer variables.
struct IlpProblem {
  std::vector<std::string> var_names;
  std::vector<Rat> objective;
  std::vector<LinConstraint> constraints;

  int add_var(std::string name, Rat obj_coef = 0) {
    var_names.push_back(std::move(name));
    objective.push_back(std::move(obj_coef));
    return int(var_names.size()) - 1;
  }
  size_t num_vars() const { return var_names.size(); }
};

enum class SolveStatus : uint8_t { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus s);

struct PathSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Rat objective = 0;
  std::vector<Rat> values;  // integral when Optimal
};

// Raised when the time budget runs out. Carries the best LP relaxation
// bound found, which upper-bounds the true optimum but is not a result.
class SolverBudgetError : public Error {
public:
  SolverBudgetError(const std::string& msg, Rat bound, bool bound_valid)
      : Error(msg), relaxation_bound(std::move(bound)), has_bound(bound_valid) {}
  Rat relaxation_bound;
  bool has_bound;
};

// Exact rational simplex (Bland's rule, two phases) on the LP relaxation,
// then branch-and-bound on the most fractional variable (ties: lowest
// index), exploring the round-up branch first. Fully deterministic.
PathSolution solve_ilp(const IlpProblem& problem,
                       std::chrono::milliseconds time_budget = std::chrono::minutes(10));

// LP relaxation only (used internally and by tests).
PathSolution solve_lp_relaxation(const IlpProblem& problem);

// CPLEX-style LP text. Every variable appears in the objective (zero
// coefficients included) so a round trip through parse_lp reproduces the
// problem exactly, including variable order.
std::string export_lp(const IlpProblem& problem);
IlpProblem parse_lp(const std::string& text);

}  // namespace wcea
