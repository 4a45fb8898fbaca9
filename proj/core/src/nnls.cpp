#include "wcea/nnls.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::BottomUp: return "bottom-up";
    case SearchStrategy::TopDown: return "top-down";
    case SearchStrategy::FullExhaustive: return "full-exhaustive";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Lawson-Hanson active set. Returns b >= 0 minimizing ||A b - y||.
VectorXd nnls_solve(const MatrixXd& A, const VectorXd& y) {
  const Eigen::Index n = A.cols();
  VectorXd beta = VectorXd::Zero(n);
  std::vector<bool> passive(size_t(n), false);

  double scale = std::max(1.0, (A.transpose() * y).cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;

  auto solve_passive = [&](const std::vector<bool>& pset) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < n; i++)
      if (pset[size_t(i)]) cols.push_back(i);
    MatrixXd Ap(A.rows(), Eigen::Index(cols.size()));
    for (size_t c = 0; c < cols.size(); c++) Ap.col(Eigen::Index(c)) = A.col(cols[c]);
    VectorXd zp = Ap.colPivHouseholderQr().solve(y);
    VectorXd z = VectorXd::Zero(n);
    for (size_t c = 0; c < cols.size(); c++) z[cols[c]] = zp[Eigen::Index(c)];
    return z;
  };

  for (int outer = 0; outer < 3 * int(n) + 30; outer++) {
    VectorXd w = A.transpose() * (y - A * beta);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index i = 0; i < n; i++) {
      if (!passive[size_t(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[size_t(best)] = true;

    VectorXd z = solve_passive(passive);
    int inner_guard = 0;
    while (true) {
      double zmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; i++)
        if (passive[size_t(i)]) zmin = std::min(zmin, z[i]);
      if (zmin > 0) break;
      if (++inner_guard > int(n) + 5) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; i++) {
        if (!passive[size_t(i)] || z[i] > 0) continue;
        double denom = beta[i] - z[i];
        if (denom > 0) alpha = std::min(alpha, beta[i] / denom);
      }
      if (!std::isfinite(alpha)) alpha = 0;
      beta += alpha * (z - beta);
      for (Eigen::Index i = 0; i < n; i++) {
        if (passive[size_t(i)] && beta[i] <= tol) {
          beta[i] = 0;
          passive[size_t(i)] = false;
        }
      }
      z = solve_passive(passive);
    }
    beta = z;
    for (Eigen::Index i = 0; i < n; i++)
      if (beta[i] < 0) beta[i] = 0;
  }
  return beta;
}

struct DesignMatrix {
  MatrixXd A;
  VectorXd y;
};

DesignMatrix build_design(const CounterTrace& trace, const std::vector<size_t>& row_indices,
                          const std::vector<std::string>& subset, bool with_intercept) {
  DesignMatrix d;
  Eigen::Index rows = Eigen::Index(row_indices.size());
  Eigen::Index cols = Eigen::Index(subset.size()) + (with_intercept ? 1 : 0);
  d.A.resize(rows, cols);
  d.y.resize(rows);
  for (Eigen::Index r = 0; r < rows; r++) {
    const TraceRow& row = trace.rows[row_indices[size_t(r)]];
    if (!row.energy) throw ModelError("fit requires measured energy on every row");
    Rat e = *row.energy;
    if (e < 0) throw ModelError("fit requires non-negative energies");
    d.y[r] = rat_to_double(e);
    for (size_t c = 0; c < subset.size(); c++) {
      auto it = row.events.find(subset[c]);
      if (it == row.events.end())
        throw ModelError("trace row '" + row.label + "' is missing counter '" + subset[c] + "'");
      d.A(r, Eigen::Index(c)) = double(it->second);
    }
    if (with_intercept) d.A(r, cols - 1) = 1.0;
  }
  return d;
}

EnergyModel model_from_beta(const std::vector<std::string>& subset, const VectorXd& beta,
                            bool with_intercept, const std::string& name, EnergyUnit unit) {
  EnergyModel m;
  m.name = name;
  m.unit = unit;
  m.mode = ModelMode::ReplayOnly;
  for (size_t c = 0; c < subset.size(); c++)
    m.counters.push_back({subset[c], subset[c], rat_of_double(beta[Eigen::Index(c)])});
  m.alpha = with_intercept ? rat_of_double(beta[beta.size() - 1]) : Rat(0);
  return m;
}

double mape_over(const EnergyModel& model, const CounterTrace& trace,
                 const std::vector<size_t>& rows) {
  if (rows.empty()) throw ModelError("MAPE over an empty row set");
  double sum = 0;
  for (size_t r : rows) {
    const TraceRow& row = trace.rows[r];
    if (!row.energy) throw ModelError("row '" + row.label + "' has no measured energy");
    double meas = rat_to_double(*row.energy);
    if (meas == 0)
      throw ModelError("row '" + row.label + "' has zero measured energy (MAPE undefined)");
    Rat pred = model.alpha;
    for (const auto& c : model.counters) {
      auto it = row.events.find(c.id);
      uint64_t count = it == row.events.end() ? 0 : it->second;
      pred += c.beta * rat_of(count);
    }
    sum += std::abs(rat_to_double(pred) - meas) / std::abs(meas) * 100.0;
  }
  return sum / double(rows.size());
}

std::vector<size_t> all_rows(const CounterTrace& trace) {
  std::vector<size_t> rows(trace.rows.size());
  for (size_t i = 0; i < rows.size(); i++) rows[i] = i;
  return rows;
}

FitResult fit_on_rows(const CounterTrace& trace, const std::vector<size_t>& rows,
                      const std::vector<std::string>& subset, bool with_intercept,
                      const std::string& name, EnergyUnit unit) {
  if (rows.empty()) throw ModelError("fit on zero rows");
  size_t cols = subset.size() + (with_intercept ? 1 : 0);
  if (rows.size() < cols)
    throw ModelError("fit needs at least as many rows (" + std::to_string(rows.size()) +
                     ") as columns (" + std::to_string(cols) + ")");
  DesignMatrix d = build_design(trace, rows, subset, with_intercept);
  VectorXd beta = nnls_solve(d.A, d.y);
  FitResult result;
  result.model = model_from_beta(subset, beta, with_intercept, name, unit);
  result.train_mape = mape_over(result.model, trace, rows);
  return result;
}

// Split score: test MAPE of the subset under the given split. Returns +inf
// when the subset cannot be fitted (more columns than training rows).
double split_score(const CounterTrace& trace, const std::vector<std::string>& subset,
                   bool with_intercept, const DataSplit& split) {
  size_t n = trace.rows.size();
  auto try_score = [&](const std::vector<size_t>& train,
                       const std::vector<size_t>& test) -> double {
    size_t cols = subset.size() + (with_intercept ? 1 : 0);
    if (train.size() < cols || test.empty()) return std::numeric_limits<double>::infinity();
    FitResult fit = fit_on_rows(trace, train, subset, with_intercept, "score", EnergyUnit::Joule);
    return mape_over(fit.model, trace, test);
  };

  if (split.kind == DataSplit::Kind::Holdout) {
    size_t train_count = size_t(std::ceil((1.0 - split.test_fraction) * double(n)));
    train_count = std::min(std::max<size_t>(train_count, 1), n - 1);
    std::vector<size_t> train, test;
    for (size_t i = 0; i < n; i++) (i < train_count ? train : test).push_back(i);
    return try_score(train, test);
  }

  int folds = std::max(2, split.folds);
  double sum = 0;
  int used = 0;
  for (int f = 0; f < folds; f++) {
    std::vector<size_t> train, test;
    for (size_t i = 0; i < n; i++) (int(i % size_t(folds)) == f ? test : train).push_back(i);
    double s = try_score(train, test);
    if (!std::isfinite(s)) return s;
    sum += s;
    used++;
  }
  return used ? sum / used : std::numeric_limits<double>::infinity();
}

// Tie order: fewer counters first, then lexicographic id sequence.
bool subset_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

FitResult fit_nnls(const CounterTrace& trace, const std::vector<std::string>& counter_subset,
                   bool with_intercept, const std::string& model_name, EnergyUnit unit) {
  if (trace.rows.empty()) throw ModelError("fit on an empty trace");
  if (counter_subset.empty()) throw ModelError("fit with an empty counter subset");
  return fit_on_rows(trace, all_rows(trace), counter_subset, with_intercept, model_name, unit);
}

double evaluate_mape(const EnergyModel& model, const CounterTrace& trace) {
  return mape_over(model, trace, all_rows(trace));
}

SearchResult search_subset(const CounterTrace& trace, const std::vector<std::string>& candidates,
                           SearchStrategy strategy, const DataSplit& split, bool with_intercept) {
  if (candidates.empty()) throw ModelError("subset search with no candidate counters");
  if (strategy == SearchStrategy::FullExhaustive && candidates.size() > 20)
    throw ModelError("full-exhaustive search is limited to 20 candidates");

  std::vector<std::string> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());

  auto score = [&](const std::vector<std::string>& subset) {
    return split_score(trace, subset, with_intercept, split);
  };

  std::vector<std::string> best_subset;
  double best_score = std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<std::string>& subset, double s) {
    if (s < best_score || (s == best_score && subset_less(subset, best_subset))) {
      best_score = s;
      best_subset = subset;
    }
  };

  switch (strategy) {
    case SearchStrategy::BottomUp: {
      std::vector<std::string> current;
      double current_score = std::numeric_limits<double>::infinity();
      while (current.size() < sorted.size()) {
        std::vector<std::string> step_best;
        double step_score = std::numeric_limits<double>::infinity();
        for (const auto& c : sorted) {
          if (std::find(current.begin(), current.end(), c) != current.end()) continue;
          std::vector<std::string> candidate = current;
          candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), c), c);
          double s = score(candidate);
          if (s < step_score || (s == step_score && subset_less(candidate, step_best))) {
            step_score = s;
            step_best = candidate;
          }
        }
        if (step_best.empty() || step_score >= current_score) break;
        current = step_best;
        current_score = step_score;
      }
      if (current.empty()) throw ModelError("bottom-up search found no fittable subset");
      consider(current, current_score);
      break;
    }
    case SearchStrategy::TopDown: {
      std::vector<std::string> current = sorted;
      double current_score = score(current);
      bool improved = true;
      while (improved && current.size() > 1) {
        improved = false;
        std::vector<std::string> step_best;
        double step_score = current_score;
        for (const auto& c : current) {
          std::vector<std::string> candidate;
          for (const auto& x : current)
            if (x != c) candidate.push_back(x);
          double s = score(candidate);
          if (s < step_score || (s == step_score && !step_best.empty() &&
                                 subset_less(candidate, step_best))) {
            step_score = s;
            step_best = candidate;
          }
        }
        if (!step_best.empty() && step_score < current_score) {
          current = step_best;
          current_score = step_score;
          improved = true;
        }
      }
      consider(current, current_score);
      break;
    }
    case SearchStrategy::FullExhaustive: {
      size_t n = sorted.size();
      for (uint32_t mask = 1; mask < (1u << n); mask++) {
        std::vector<std::string> subset;
        for (size_t i = 0; i < n; i++)
          if (mask & (1u << i)) subset.push_back(sorted[i]);
        consider(subset, score(subset));
      }
      break;
    }
  }

  if (best_subset.empty() || !std::isfinite(best_score))
    throw ModelError("subset search found no fittable subset");

  SearchResult result;
  result.chosen = best_subset;
  result.test_mape = best_score;
  FitResult fit = fit_on_rows(trace, all_rows(trace), best_subset, with_intercept,
                              std::string("fit.") + to_string(strategy), EnergyUnit::Joule);
  result.model = fit.model;
  return result;
}

}  // namespace wcea
