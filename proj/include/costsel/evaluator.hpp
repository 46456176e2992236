#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/forest.hpp"
#include "costsel/matrix.hpp"

namespace costsel {

/// Train / validation / test matrices over the same feature columns.
struct SplitData {
  Matrix x_train;
  Labels y_train;
  Matrix x_val;
  Labels y_val;
  Matrix x_test;
  Labels y_test;

  std::size_t n_features() const noexcept { return x_train.cols(); }
};

struct SubsetScore {
  double val_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

/// Trains the forest engine on a variable subset of the training split and
/// scores it on the validation split. Each subset gets its own engine seed,
/// derived from the base seed and the subset, so any two searches that visit
/// the same subset see the same forest. Results are memoized; not thread-safe.
class SubsetEvaluator {
 public:
  SubsetEvaluator(const SplitData& data, ForestParams params) : data_(&data), params_(params) {}

  std::uint64_t seed_for(const VariableSet& variables) const {
    return derive_seed(params_.master_seed, variables.hash());
  }

  Forest fit(const VariableSet& variables) const {
    check(variables);
    ForestParams p = params_;
    p.master_seed = seed_for(variables);
    return fit_forest(data_->x_train.select_columns(variables.columns()), data_->y_train, p);
  }

  double val_accuracy(const VariableSet& variables) { return score(variables).val_accuracy; }

  /// Test accuracy of the same forest that produced the validation score. It
  /// is computed alongside the validation score but never used for selection.
  double test_accuracy(const VariableSet& variables) {
    const auto& s = score(variables);
    if (!s.test_accuracy) throw Error(ErrorCode::EmptyEvaluationSet, "the test split is empty");
    return *s.test_accuracy;
  }

  /// Distinct subsets trained so far.
  std::size_t distinct_subsets() const noexcept { return cache_.size(); }
  std::size_t fits() const noexcept { return fits_; }

  const SplitData& data() const noexcept { return *data_; }
  const ForestParams& params() const noexcept { return params_; }

 private:
  const SubsetScore& score(const VariableSet& variables) {
    auto it = cache_.find(variables);
    if (it != cache_.end()) return it->second;
    const Forest forest = fit(variables);
    const auto cols = variables.columns();
    SubsetScore s;
    s.val_accuracy = accuracy_on(forest, data_->x_val.select_columns(cols), data_->y_val);
    if (data_->x_test.rows() > 0) s.test_accuracy = accuracy_on(forest, data_->x_test.select_columns(cols), data_->y_test);
    ++fits_;
    return cache_.emplace(variables, s).first->second;
  }

  void check(const VariableSet& variables) const {
    for (int i : variables) {
      if (i < 1 || static_cast<std::size_t>(i) > data_->n_features()) {
        throw Error(ErrorCode::InvalidVariableIndex, "variable " + std::to_string(i) + " out of range");
      }
    }
  }

  const SplitData* data_;
  ForestParams params_;
  std::map<VariableSet, SubsetScore> cache_;
  std::size_t fits_ = 0;
};

}  // namespace costsel
