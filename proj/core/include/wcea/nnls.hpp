#pragma once

#include <string>
#include <vector>

#include "wcea/model.hpp"

namespace wcea {

struct FitResult {
  EnergyModel model;
  double train_mape = 0;  // percent over the training rows
};

// Fits min ||A b - y||_2 subject to b >= 0 with the Lawson-Hanson active-set
// method over the selected counter columns. with_intercept adds an all-ones
// column whose weight is also clamped at zero. Requires rows >= columns,
// every row carrying a non-negative measured energy. Coefficients are
// rationalized from the double solution for exact downstream pricing.
FitResult fit_nnls(const CounterTrace& trace, const std::vector<std::string>& counter_subset,
                   bool with_intercept, const std::string& model_name = "fit.nnls",
                   EnergyUnit unit = EnergyUnit::Joule);

// Mean absolute percentage error of the model over rows with measured
// energy. A zero measurement is an error, not averaged away.
double evaluate_mape(const EnergyModel& model, const CounterTrace& trace);

enum class SearchStrategy : uint8_t { BottomUp, TopDown, FullExhaustive };

const char* to_string(SearchStrategy s);

// Deterministic evaluation split. Holdout keeps the first
// ceil((1 - test_fraction) * n) rows for training; k-fold assigns row i to
// fold i % folds and averages the fold test MAPEs.
struct DataSplit {
  enum class Kind : uint8_t { Holdout, KFold } kind = Kind::Holdout;
  double test_fraction = 0.25;
  int folds = 5;
};

struct SearchResult {
  EnergyModel model;      // fitted on the full trace with the chosen subset
  double test_mape = 0;   // split score of the chosen subset
  std::vector<std::string> chosen;
};

// Greedy add (bottom-up), greedy drop (top-down) or all non-empty subsets
// (full-exhaustive, at most 20 candidates), scored by split test MAPE. Ties
// break toward fewer counters, then lexicographic counter order. Greedy
// stops when no single change strictly improves the score.
SearchResult search_subset(const CounterTrace& trace, const std::vector<std::string>& candidates,
                           SearchStrategy strategy, const DataSplit& split,
                           bool with_intercept = false);

}  // namespace wcea
