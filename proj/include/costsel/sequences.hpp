#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/evaluator.hpp"
#include "costsel/forest.hpp"
#include "costsel/lasso_path.hpp"
#include "costsel/random.hpp"
#include "costsel/schedule.hpp"

namespace costsel {

enum class SequenceKind { ByImportance, ByCost, BySampling, ByL1Path };

inline std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::ByImportance: return "importance";
    case SequenceKind::ByCost: return "cost";
    case SequenceKind::BySampling: return "sampling";
    case SequenceKind::ByL1Path: return "l1path";
  }
  return "unknown";
}

inline Source source_of(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::ByImportance: return Source::ByImportance;
    case SequenceKind::ByCost: return Source::ByCost;
    case SequenceKind::BySampling: return Source::BySampling;
    case SequenceKind::ByL1Path: return Source::ByL1Path;
  }
  return Source::Oracle;
}

/// Weight used by the deterministic removal loop; the variable with the
/// smallest weight goes first.
enum class RemovalRule {
  Importance = 1,            // w = importance
  InverseCost = 2,           // w = 1 / cost
  NormalizedImportance = 3,  // w = (importance / cost)^gamma
};

/// Records in generation order plus every subset the engine was trained on.
struct SequenceRun {
  SequenceKind kind = SequenceKind::ByCost;
  std::vector<ModelRecord> records;
  std::vector<VariableSet> visited;
  std::uint64_t seed = 0;
};

inline constexpr double kImportanceFloor = 1e-6;
inline constexpr double kDefaultGamma = 0.1;

/// (I / b)^gamma with I clamped below at `floor`.
inline double normalized_importance(double cost, double importance, double gamma = kDefaultGamma,
                                    double floor = kImportanceFloor) {
  if (!(cost > 0.0) || !std::isfinite(cost)) throw Error(ErrorCode::InvalidCost, "cost must be positive");
  const double clamped = std::max(importance, floor);
  return std::pow(clamped / cost, gamma);
}

/// Index drawn with probability proportional to 1 / f[i]. Falls back to a
/// uniform draw when those weights are unusable.
inline std::size_t sample_removal(std::span<const double> f, Rng& rng) {
  std::vector<double> w(f.size());
  double total = 0.0;
  bool usable = true;
  for (std::size_t i = 0; i < f.size(); ++i) {
    w[i] = f[i] > 0.0 ? 1.0 / f[i] : 0.0;
    if (!std::isfinite(w[i])) usable = false;
    total += w[i];
  }
  if (!usable || !(total > 0.0) || !std::isfinite(total)) return static_cast<std::size_t>(rng.below(f.size()));
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  for (std::size_t i = w.size(); i > 0; --i) {
    if (w[i - 1] > 0.0) return i - 1;
  }
  return 0;
}

namespace detail {

inline ModelRecord evaluate_record(SubsetEvaluator& engine, const VariableSet& variables,
                                   const CostProfile& profile, Source source) {
  return make_record(variables, profile, engine.val_accuracy(variables), source);
}

inline void check_profile(const SubsetEvaluator& engine, const CostProfile& profile) {
  if (profile.size() != engine.data().n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "cost profile has " + std::to_string(profile.size()) +
                                                  " entries for " + std::to_string(engine.data().n_features()) +
                                                  " features");
  }
}

inline std::vector<double> removal_weights(RemovalRule rule, const CostProfile& profile,
                                           const ImportanceProfile* importance, double gamma) {
  const std::size_t p = profile.size();
  if (rule != RemovalRule::InverseCost && (importance == nullptr || importance->size() != p)) {
    throw Error(ErrorCode::InvalidArgument, "this removal rule needs an importance profile of length p");
  }
  std::vector<double> w(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double b = profile[i].value();
    switch (rule) {
      case RemovalRule::Importance: w[i] = (*importance)[i]; break;
      case RemovalRule::InverseCost: w[i] = 1.0 / b; break;
      case RemovalRule::NormalizedImportance: w[i] = normalized_importance(b, (*importance)[i], gamma); break;
    }
  }
  return w;
}

}  // namespace detail

/// Backward elimination from the full model: drop the remaining variable with
/// the smallest weight (ties to the smaller index), retrain, record, until two
/// variables are left. Weights are fixed before the loop starts.
inline SequenceRun model_seq(SubsetEvaluator& engine, const CostProfile& profile, RemovalRule rule,
                             const ImportanceProfile* importance = nullptr, double gamma = kDefaultGamma) {
  detail::check_profile(engine, profile);
  const std::size_t p = profile.size();
  if (p < 3) throw Error(ErrorCode::SequenceTooShort, "backward elimination needs at least three variables");
  const auto w = detail::removal_weights(rule, profile, importance, gamma);

  SequenceRun run;
  run.kind = rule == RemovalRule::Importance    ? SequenceKind::ByImportance
             : rule == RemovalRule::InverseCost ? SequenceKind::ByCost
                                                : SequenceKind::BySampling;
  const Source source = source_of(run.kind);
  VariableSet current = VariableSet::full(p);
  run.visited.push_back(current);
  run.records.push_back(detail::evaluate_record(engine, current, profile, source));
  for (std::size_t step = 0; step + 2 < p; ++step) {
    int victim = current.indices().front();
    for (int i : current) {
      if (w[static_cast<std::size_t>(i - 1)] < w[static_cast<std::size_t>(victim - 1)]) victim = i;
    }
    current = current.without(victim);
    run.visited.push_back(current);
    run.records.push_back(detail::evaluate_record(engine, current, profile, source));
  }
  return run;
}

/// Backward elimination where each removed variable is drawn with probability
/// proportional to 1 / normalized importance. Models costing more than
/// `budget` are dropped from the records (they still count as visited).
inline SequenceRun model_seq_sampled(SubsetEvaluator& engine, const CostProfile& profile,
                                     const ImportanceProfile& importance, double gamma, std::optional<Cost> budget,
                                     std::uint64_t seed) {
  detail::check_profile(engine, profile);
  const std::size_t p = profile.size();
  if (p < 3) throw Error(ErrorCode::SequenceTooShort, "backward elimination needs at least three variables");
  const auto f = detail::removal_weights(RemovalRule::NormalizedImportance, profile, &importance, gamma);

  SequenceRun run;
  run.kind = SequenceKind::BySampling;
  run.seed = seed;
  Rng rng(seed);
  VariableSet current = VariableSet::full(p);
  auto visit = [&](const VariableSet& s) {
    run.visited.push_back(s);
    if (budget && total_cost(s, profile) > *budget) return;
    run.records.push_back(detail::evaluate_record(engine, s, profile, Source::BySampling));
  };
  visit(current);
  while (current.size() > 2) {
    std::vector<double> remaining;
    for (int i : current) remaining.push_back(f[static_cast<std::size_t>(i - 1)]);
    const std::size_t pick = sample_removal(remaining, rng);
    current = current.without(current.indices()[pick]);
    visit(current);
  }
  return run;
}

enum class PathEngine { Forest, LogisticPath };

/// Follows the L1 path: at each step the union of active variables is either
/// handed to the forest (skipped when fewer than two) or scored with the path's
/// own logistic model.
inline SequenceRun model_seq_l(SubsetEvaluator* engine, const SplitData& data, const CostProfile& profile,
                               const PathCoefficients& path, PathEngine kind, double zero_tol = 1e-8) {
  if (profile.size() != data.n_features() || path.n_features() != data.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "profile, path and data disagree on the feature count");
  }
  if (kind == PathEngine::Forest && engine == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "forest engine requested without an evaluator");
  }
  SequenceRun run;
  run.kind = SequenceKind::ByL1Path;
  for (std::size_t step = 1; step <= path.steps(); ++step) {
    VariableSet used = active_variables(path, step, zero_tol);
    if (kind == PathEngine::Forest) {
      if (used.size() < 2) continue;
      run.visited.push_back(used);
      run.records.push_back(detail::evaluate_record(*engine, used, profile, Source::ByL1Path));
    } else {
      run.visited.push_back(used);
      ModelRecord r = make_record(used, profile, path_accuracy(path, step, data.x_val, data.y_val), Source::ByL1Path);
      r.test_accuracy = path_accuracy(path, step, data.x_test, data.y_test);
      run.records.push_back(std::move(r));
    }
  }
  return run;
}

struct MsbConfig {
  ForestParams forest;
  double gamma = kDefaultGamma;
  /// Root of every seed used by the run (engine, importance, sampling).
  std::uint64_t seed = 1;
  /// Replace the sampled sequence with deterministic argmin of normalized importance.
  bool deterministic_sampling = false;
  LassoSettings lasso;
};

struct MsbResult {
  ModelSchedule schedule;
  /// ByCost, ByImportance, BySampling, ByL1Path; empty when p == 2.
  std::vector<SequenceRun> members;
  ImportanceProfile importance;

  /// Distinct subsets trained by any member.
  std::vector<VariableSet> distinct_visited() const {
    std::vector<VariableSet> all;
    for (const auto& m : members) all.insert(all.end(), m.visited.begin(), m.visited.end());
    if (members.empty() && !schedule.empty()) all.push_back(schedule[0].variables);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }

  /// Compressed schedule of one member alone.
  ModelSchedule member_schedule(std::size_t i, const CostProfile& profile) const {
    return compress(members.at(i).records, profile.fingerprint());
  }
};

namespace detail {

enum : std::uint64_t { kEngineStream = 1, kImportanceStream = 2, kSamplingStream = 3 };

template <class F>
auto run_member(std::string_view name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + " sequence failed: " + e.what());
  }
}

inline void fill_test_accuracy(ModelSchedule& schedule, SubsetEvaluator& engine) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    schedule.set_test_accuracy(i, engine.test_accuracy(schedule[i].variables));
  }
}

}  // namespace detail

inline ForestParams engine_params(const MsbConfig& config) {
  ForestParams p = config.forest;
  p.master_seed = derive_seed(config.seed, detail::kEngineStream);
  return p;
}

/// The ensemble: four member sequences (by cost, by importance, by sampling,
/// along the L1 path with the forest engine), merged and compressed. Surviving
/// records get their test accuracy last.
inline MsbResult msb(SubsetEvaluator& engine, const CostProfile& profile, const MsbConfig& config) {
  detail::check_profile(engine, profile);
  const SplitData& data = engine.data();
  const std::size_t p = profile.size();
  MsbResult result;
  if (p < 2) throw Error(ErrorCode::EngineNeedsTwoVariables, "the forest engine needs at least two variables");
  if (p == 2) {
    const VariableSet full = VariableSet::full(2);
    std::vector<ModelRecord> only{detail::evaluate_record(engine, full, profile, Source::ByCost)};
    result.schedule = compress(only, profile.fingerprint());
    detail::fill_test_accuracy(result.schedule, engine);
    return result;
  }

  const Forest full_model = engine.fit(VariableSet::full(p));
  result.importance =
      permutation_importance(full_model, data.x_val, data.y_val, derive_seed(config.seed, detail::kImportanceStream));

  result.members.push_back(
      detail::run_member("by-cost", [&] { return model_seq(engine, profile, RemovalRule::InverseCost); }));
  result.members.push_back(detail::run_member(
      "by-importance", [&] { return model_seq(engine, profile, RemovalRule::Importance, &result.importance); }));
  result.members.push_back(detail::run_member("by-sampling", [&] {
    if (config.deterministic_sampling) {
      return model_seq(engine, profile, RemovalRule::NormalizedImportance, &result.importance, config.gamma);
    }
    return model_seq_sampled(engine, profile, result.importance, config.gamma, std::nullopt,
                             derive_seed(config.seed, detail::kSamplingStream));
  }));
  result.members.push_back(detail::run_member("l1-path", [&] {
    const auto grid = make_lambda_grid(data.x_train, data.y_train, config.lasso.n_lambda, config.lasso.eps_ratio);
    const auto path = fit_l1_logistic_path(data.x_train, data.y_train, grid, config.lasso);
    return model_seq_l(&engine, data, profile, path, PathEngine::Forest, config.lasso.zero_tol);
  }));

  std::vector<std::vector<ModelRecord>> lists;
  for (const auto& m : result.members) lists.push_back(m.records);
  result.schedule = merge(lists, profile);
  detail::fill_test_accuracy(result.schedule, engine);
  return result;
}

/// Baseline: the L1 path scored by its own logistic models, compressed.
inline ModelSchedule logitb_schedule(const SplitData& data, const CostProfile& profile,
                                     const LassoSettings& settings = {}) {
  const auto grid = make_lambda_grid(data.x_train, data.y_train, settings.n_lambda, settings.eps_ratio);
  const auto path = fit_l1_logistic_path(data.x_train, data.y_train, grid, settings);
  const auto run = model_seq_l(nullptr, data, profile, path, PathEngine::LogisticPath, settings.zero_tol);
  return compress(run.records, profile.fingerprint());
}

}  // namespace costsel
