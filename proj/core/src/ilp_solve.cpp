#include <algorithm>
#include <optional>

#include "wcea/ilp.hpp"

namespace wcea {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
  Clock::time_point at;
  bool enabled;
  bool expired() const { return enabled && Clock::now() > at; }
};

// Dense exact-rational simplex tableau. Sized for IPET problems (tens of
// variables); Bland's rule keeps it deterministic and cycle-free.
class Simplex {
public:
  // rows: constraints normalized to rhs >= 0. Returns feasibility.
  Simplex(const IlpProblem& p, const Deadline& deadline) : p_(p), deadline_(deadline) {}

  SolveStatus solve(std::vector<Rat>& values, Rat& objective) {
    build();
    if (!phase1()) return SolveStatus::Infeasible;
    SolveStatus st = phase2();
    if (st != SolveStatus::Optimal) return st;
    values.assign(n_orig_, Rat(0));
    for (size_t r = 0; r < basis_.size(); r++) {
      if (basis_[r] < n_orig_) values[size_t(basis_[r])] = tab_[r].back();
    }
    objective = 0;
    for (size_t j = 0; j < n_orig_; j++) objective += p_.objective[j] * values[j];
    return SolveStatus::Optimal;
  }

private:
  void build() {
    n_orig_ = p_.num_vars();
    size_t m = p_.constraints.size();
    // Column layout: original vars, then one slack/surplus per inequality,
    // then artificials.
    size_t n_slack = 0;
    for (const auto& c : p_.constraints)
      if (c.rel != Rel::Eq) n_slack++;
    n_cols_ = n_orig_ + n_slack;

    std::vector<std::vector<Rat>> rows(m, std::vector<Rat>(n_cols_ + 1, Rat(0)));
    std::vector<int> slack_of(m, -1);
    size_t next_slack = n_orig_;
    for (size_t r = 0; r < m; r++) {
      const LinConstraint& c = p_.constraints[r];
      for (const LinTerm& t : c.terms) rows[r][size_t(t.var)] += t.coef;
      rows[r][n_cols_] = c.rhs;
      Rel rel = c.rel;
      if (rows[r][n_cols_] < 0) {
        for (auto& v : rows[r]) v = -v;
        rel = rel == Rel::Le ? Rel::Ge : rel == Rel::Ge ? Rel::Le : Rel::Eq;
      }
      if (rel == Rel::Le) {
        rows[r][next_slack] = 1;
        slack_of[r] = int(next_slack++);
      } else if (rel == Rel::Ge) {
        rows[r][next_slack] = -1;
        slack_of[r] = ~int(next_slack++);  // mark surplus with complement
      }
    }

    // Basis: slack where available with +1 coefficient, artificial otherwise.
    basis_.assign(m, -1);
    std::vector<size_t> need_artificial;
    for (size_t r = 0; r < m; r++) {
      if (slack_of[r] >= 0) {
        basis_[r] = slack_of[r];
      } else {
        need_artificial.push_back(r);
      }
    }
    n_art_ = need_artificial.size();
    size_t total = n_cols_ + n_art_;
    tab_.assign(m, std::vector<Rat>(total + 1, Rat(0)));
    for (size_t r = 0; r < m; r++) {
      for (size_t j = 0; j < n_cols_; j++) tab_[r][j] = rows[r][j];
      tab_[r][total] = rows[r][n_cols_];
    }
    size_t art = n_cols_;
    for (size_t r : need_artificial) {
      tab_[r][art] = 1;
      basis_[r] = int(art);
      art++;
    }
    n_total_ = total;
  }

  // Reduced-cost row for a given objective vector (col -> coef).
  std::vector<Rat> reduced_costs(const std::vector<Rat>& obj) const {
    std::vector<Rat> z(n_total_ + 1, Rat(0));
    for (size_t r = 0; r < basis_.size(); r++) {
      const Rat& cb = obj[size_t(basis_[r])];
      if (cb == 0) continue;
      for (size_t j = 0; j <= n_total_; j++) z[j] += cb * tab_[r][j];
    }
    for (size_t j = 0; j < n_total_; j++) z[j] = obj[j] - z[j];
    // z[n_total_] ends up holding -objective value offset; recompute outside.
    return z;
  }

  // One simplex run maximizing obj over the current tableau.
  // Returns Optimal or Unbounded.
  SolveStatus iterate(const std::vector<Rat>& obj, const std::vector<bool>& allowed) {
    for (;;) {
      if (deadline_.expired()) throw SolverBudgetError("solver time budget exceeded", 0, false);
      std::vector<Rat> rc = reduced_costs(obj);
      int enter = -1;
      for (size_t j = 0; j < n_total_; j++) {  // Bland: lowest index
        if (!allowed[j]) continue;
        if (rc[j] > 0) {
          enter = int(j);
          break;
        }
      }
      if (enter < 0) return SolveStatus::Optimal;
      int leave = -1;
      Rat best_ratio;
      for (size_t r = 0; r < tab_.size(); r++) {
        if (tab_[r][size_t(enter)] <= 0) continue;
        Rat ratio = tab_[r].back() / tab_[r][size_t(enter)];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[size_t(leave)])) {
          leave = int(r);
          best_ratio = ratio;
        }
      }
      if (leave < 0) return SolveStatus::Unbounded;
      pivot(size_t(leave), size_t(enter));
    }
  }

  void pivot(size_t row, size_t col) {
    Rat p = tab_[row][col];
    for (auto& v : tab_[row]) v /= p;
    for (size_t r = 0; r < tab_.size(); r++) {
      if (r == row) continue;
      Rat f = tab_[r][col];
      if (f == 0) continue;
      for (size_t j = 0; j <= n_total_; j++) tab_[r][j] -= f * tab_[row][j];
    }
    basis_[row] = int(col);
  }

  bool phase1() {
    if (n_art_ == 0) return true;
    std::vector<Rat> obj(n_total_ + 1, Rat(0));
    for (size_t j = n_cols_; j < n_total_; j++) obj[j] = -1;  // maximize -sum(artificials)
    std::vector<bool> allowed(n_total_, true);
    SolveStatus st = iterate(obj, allowed);
    (void)st;  // cannot be unbounded: objective bounded above by 0
    Rat value = 0;
    for (size_t r = 0; r < basis_.size(); r++)
      if (size_t(basis_[r]) >= n_cols_) value += tab_[r].back();
    if (value != 0) return false;
    // Pivot remaining artificials out of the basis; a row that cannot pivot
    // is all zero in the original columns (redundant constraint) and gets
    // dropped so phase 2 can never move its artificial off zero.
    for (size_t r = 0; r < basis_.size();) {
      if (size_t(basis_[r]) < n_cols_) {
        r++;
        continue;
      }
      bool pivoted = false;
      for (size_t j = 0; j < n_cols_ && !pivoted; j++) {
        if (tab_[r][j] != 0) {
          pivot(r, j);
          pivoted = true;
        }
      }
      if (pivoted) {
        r++;
      } else {
        tab_.erase(tab_.begin() + long(r));
        basis_.erase(basis_.begin() + long(r));
      }
    }
    return true;
  }

  SolveStatus phase2() {
    std::vector<Rat> obj(n_total_ + 1, Rat(0));
    for (size_t j = 0; j < n_orig_; j++) obj[j] = p_.objective[j];
    std::vector<bool> allowed(n_total_, true);
    for (size_t j = n_cols_; j < n_total_; j++) allowed[j] = false;  // artificials stay out
    return iterate(obj, allowed);
  }

  const IlpProblem& p_;
  const Deadline& deadline_;
  std::vector<std::vector<Rat>> tab_;
  std::vector<int> basis_;
  size_t n_orig_ = 0, n_cols_ = 0, n_art_ = 0, n_total_ = 0;
};

PathSolution solve_relaxation(const IlpProblem& p, const Deadline& deadline) {
  PathSolution sol;
  Simplex s(p, deadline);
  sol.status = s.solve(sol.values, sol.objective);
  return sol;
}

bool is_integral(const Rat& v) { return v.get_den() == 1; }

// Fractional part distance from the nearest half; smaller = more fractional.
Rat half_distance(const Rat& v) {
  Rat f = v - Rat(mpz_class(v.get_num() / v.get_den()));
  if (f < 0) f += 1;
  Rat d = f - Rat(1, 2);
  if (d < 0) d = -d;
  return d;
}

struct BranchFrame {
  IlpProblem problem;
};

}  // namespace

PathSolution solve_lp_relaxation(const IlpProblem& problem) {
  Deadline deadline{Clock::time_point{}, false};
  return solve_relaxation(problem, deadline);
}

PathSolution solve_ilp(const IlpProblem& problem, std::chrono::milliseconds time_budget) {
  Deadline deadline{Clock::now() + time_budget, time_budget.count() > 0};

  PathSolution root;
  try {
    root = solve_relaxation(problem, deadline);
  } catch (const SolverBudgetError&) {
    throw SolverBudgetError("solver time budget exceeded before the root relaxation finished",
                            0, false);
  }
  if (root.status != SolveStatus::Optimal) return root;

  Rat root_bound = root.objective;
  std::optional<PathSolution> incumbent;

  // Depth-first branch and bound; the round-up child is explored first.
  std::vector<BranchFrame> stack;
  stack.push_back({problem});

  try {
    while (!stack.empty()) {
      if (deadline.expired())
        throw SolverBudgetError("solver time budget exceeded", root_bound, true);
      BranchFrame frame = std::move(stack.back());
      stack.pop_back();

      PathSolution relax = solve_relaxation(frame.problem, deadline);
      if (relax.status == SolveStatus::Unbounded) {
        PathSolution out;
        out.status = SolveStatus::Unbounded;
        return out;
      }
      if (relax.status != SolveStatus::Optimal) continue;
      if (incumbent && relax.objective <= incumbent->objective) continue;

      // Most fractional variable, lowest index among ties.
      int branch_var = -1;
      Rat best_dist;
      for (size_t j = 0; j < problem.num_vars(); j++) {
        const Rat& v = relax.values[j];
        if (is_integral(v)) continue;
        Rat d = half_distance(v);
        if (branch_var < 0 || d < best_dist) {
          branch_var = int(j);
          best_dist = d;
        }
      }
      if (branch_var < 0) {
        // Integral solution.
        if (!incumbent || relax.objective > incumbent->objective) incumbent = relax;
        continue;
      }

      mpz_class fl = relax.values[size_t(branch_var)].get_num() /
                     relax.values[size_t(branch_var)].get_den();
      Rat floor_v(fl);
      // Push the floor branch first so the ceil branch pops first.
      {
        BranchFrame down{frame.problem};
        LinConstraint c;
        c.name = "branch_le_" + problem.var_names[size_t(branch_var)];
        c.terms.push_back({branch_var, 1});
        c.rel = Rel::Le;
        c.rhs = floor_v;
        down.problem.constraints.push_back(std::move(c));
        stack.push_back(std::move(down));
      }
      {
        BranchFrame up{frame.problem};
        LinConstraint c;
        c.name = "branch_ge_" + problem.var_names[size_t(branch_var)];
        c.terms.push_back({branch_var, 1});
        c.rel = Rel::Ge;
        c.rhs = floor_v + 1;
        up.problem.constraints.push_back(std::move(c));
        stack.push_back(std::move(up));
      }
    }
  } catch (const SolverBudgetError&) {
    throw SolverBudgetError("solver time budget exceeded", root_bound, true);
  }

  if (!incumbent) {
    PathSolution out;
    out.status = SolveStatus::Infeasible;
    return out;
  }
  return *incumbent;
}

}  // namespace wcea
