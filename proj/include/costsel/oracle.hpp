#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/evaluator.hpp"
#include "costsel/format.hpp"
#include "costsel/schedule.hpp"

namespace costsel {

inline constexpr std::size_t kMaxExhaustiveVariables = 20;

struct SolutionPoint {
  VariableSet subset;
  Cost cost;
  double val_accuracy = 0.0;
};

/// One evaluated point per subset of the search universe.
struct SolutionSpace {
  std::vector<SolutionPoint> points;

  std::size_t size() const noexcept { return points.size(); }
};

/// All subsets of {1..p} with at least `min_size` members, ordered by size
/// and then lexicographically.
inline std::vector<VariableSet> enumerate_subsets(std::size_t p, std::size_t min_size) {
  if (p > kMaxExhaustiveVariables) {
    throw Error(ErrorCode::ProblemTooLarge, "exhaustive search is capped at 20 variables");
  }
  std::vector<VariableSet> out;
  for (std::size_t k = std::max<std::size_t>(min_size, 1); k <= p; ++k) {
    // Combinations of size k in lexicographic order.
    std::vector<int> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = static_cast<int>(i + 1);
    for (;;) {
      out.emplace_back(pick);
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == static_cast<int>(p - k + i)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

/// Trains the engine on every subset with at least `min_size` variables; the
/// optimal schedule is the compressed set of all points.
inline std::pair<ModelSchedule, SolutionSpace> exhaustive_schedule(SubsetEvaluator& engine,
                                                                   const CostProfile& profile,
                                                                   std::size_t min_size = 2) {
  const std::size_t p = engine.data().n_features();
  if (profile.size() != p) throw Error(ErrorCode::DimensionMismatch, "cost profile length differs from p");
  SolutionSpace space;
  std::vector<ModelRecord> records;
  for (auto& subset : enumerate_subsets(p, min_size)) {
    const double acc = engine.val_accuracy(subset);
    ModelRecord r = make_record(subset, profile, acc, Source::Oracle);
    space.points.push_back({subset, r.cost, acc});
    records.push_back(std::move(r));
  }
  return {compress(records, profile.fingerprint()), std::move(space)};
}

/// Share of the solution space covered by the distinct visited subsets.
inline double coverage_fraction(const SolutionSpace& space, std::span<const VariableSet> visited) {
  if (space.points.empty()) return 0.0;
  std::set<VariableSet> universe;
  for (const auto& pt : space.points) universe.insert(pt.subset);
  std::set<VariableSet> hit;
  for (const auto& v : visited) {
    if (universe.count(v)) hit.insert(v);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(space.points.size());
}

/// Columns subset;cost;val_accuracy, with the subset's indices space-separated.
inline void write_solution_space(std::ostream& out, const SolutionSpace& space) {
  out << "subset;cost;val_accuracy\n";
  for (const auto& pt : space.points) {
    std::string subset = pt.subset.to_string();
    std::replace(subset.begin(), subset.end(), ';', ' ');
    out << subset << ';' << pt.cost.to_string() << ';' << format_double(pt.val_accuracy) << '\n';
  }
}

}  // namespace costsel
