#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"

namespace costsel {

/// Which generator produced a record. Declaration order is the tie-break order
/// used when records are otherwise indistinguishable.
enum class Source { ByCost, ByImportance, BySampling, ByL1Path, Oracle };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::ByCost: return "ByCost";
    case Source::ByImportance: return "ByImportance";
    case Source::BySampling: return "BySampling";
    case Source::ByL1Path: return "ByL1Path";
    case Source::Oracle: return "Oracle";
  }
  return "Unknown";
}

inline Source parse_source(std::string_view text) {
  for (Source s : {Source::ByCost, Source::ByImportance, Source::BySampling, Source::ByL1Path, Source::Oracle}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown source tag '" + std::string(text) + "'");
}

struct ModelRecord {
  VariableSet variables;
  Cost cost;
  double val_accuracy = 0.0;
  std::optional<double> test_accuracy;
  Source source = Source::Oracle;

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

inline ModelRecord make_record(VariableSet variables, const CostProfile& profile, double val_accuracy,
                               Source source) {
  Cost cost = total_cost(variables, profile);
  return ModelRecord{std::move(variables), cost, val_accuracy, std::nullopt, source};
}

/// a is at least as cheap and at least as accurate as b, and strictly better in one.
inline bool dominates(const ModelRecord& a, const ModelRecord& b) {
  return a.cost <= b.cost && a.val_accuracy >= b.val_accuracy &&
         (a.cost < b.cost || a.val_accuracy > b.val_accuracy);
}

/// Cost-sorted list of records with strictly increasing cost and validation
/// accuracy and distinct variable sets. Only compress(), merge() and
/// ModelSchedule::validated() build one.
class ModelSchedule {
 public:
  ModelSchedule() = default;

  /// Checks the schedule invariants on already-ordered records.
  static ModelSchedule validated(std::vector<ModelRecord> records, std::uint64_t profile_key = 0) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.val_accuracy < 0.0 || r.val_accuracy > 1.0 ||
          (r.test_accuracy && (*r.test_accuracy < 0.0 || *r.test_accuracy > 1.0))) {
        throw Error(ErrorCode::InvalidArgument, "accuracy outside [0,1] at record " + std::to_string(i + 1));
      }
      if (i > 0) {
        const auto& prev = records[i - 1];
        if (!(prev.cost < r.cost) || !(prev.val_accuracy < r.val_accuracy)) {
          throw Error(ErrorCode::InvalidArgument,
                      "schedule is not strictly increasing at record " + std::to_string(i + 1));
        }
      }
    }
    std::vector<VariableSet> sets;
    for (const auto& r : records) sets.push_back(r.variables);
    std::sort(sets.begin(), sets.end());
    if (std::adjacent_find(sets.begin(), sets.end()) != sets.end()) {
      throw Error(ErrorCode::InvalidArgument, "schedule repeats a variable set");
    }
    ModelSchedule s;
    s.records_ = std::move(records);
    s.profile_key_ = profile_key;
    return s;
  }

  const std::vector<ModelRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ModelRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  /// CostProfile::fingerprint() of the profile the records were costed under; 0 if unknown.
  std::uint64_t profile_key() const noexcept { return profile_key_; }

  /// Fills test accuracy in place; the only mutation allowed after construction.
  void set_test_accuracy(std::size_t i, double accuracy) { records_[i].test_accuracy = accuracy; }

  /// Compares records only; the profile key is bookkeeping and does not
  /// survive a round trip through a schedule file.
  friend bool operator==(const ModelSchedule& a, const ModelSchedule& b) { return a.records_ == b.records_; }

 private:
  std::vector<ModelRecord> records_;
  std::uint64_t profile_key_ = 0;
};

namespace detail {

inline bool test_accuracy_before(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return a.has_value();
  return a.has_value() && *a > *b;
}

// One record per variable set: the most accurate, then the earliest source.
inline std::vector<ModelRecord> dedupe_by_variables(std::span<const ModelRecord> records) {
  std::vector<ModelRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const ModelRecord& a, const ModelRecord& b) {
    if (a.variables != b.variables) return a.variables < b.variables;
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    if (a.source != b.source) return a.source < b.source;
    if (a.cost != b.cost) return a.cost < b.cost;
    return test_accuracy_before(a.test_accuracy, b.test_accuracy);
  });
  std::vector<ModelRecord> out;
  for (auto& r : sorted) {
    if (out.empty() || out.back().variables != r.variables) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// Pareto frontier under (minimize cost, maximize validation accuracy), sorted by cost.
/// Records with the same variables collapse to the most accurate one. Exact
/// (cost, accuracy) ties keep the record from the earliest source
/// (ByCost, ByImportance, BySampling, ByL1Path, Oracle), then the
/// lexicographically smallest variable set, so the result never depends on
/// input order.
inline ModelSchedule compress(std::span<const ModelRecord> records, std::uint64_t profile_key = 0) {
  std::vector<ModelRecord> unique = detail::dedupe_by_variables(records);
  std::sort(unique.begin(), unique.end(), [](const ModelRecord& a, const ModelRecord& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    if (a.source != b.source) return a.source < b.source;
    return a.variables < b.variables;
  });
  std::vector<ModelRecord> frontier;
  for (auto& r : unique) {
    if (frontier.empty() || r.val_accuracy > frontier.back().val_accuracy) frontier.push_back(std::move(r));
  }
  return ModelSchedule::validated(std::move(frontier), profile_key);
}

inline ModelSchedule compress(const std::vector<ModelRecord>& records, std::uint64_t profile_key = 0) {
  return compress(std::span<const ModelRecord>(records), profile_key);
}

/// Union of the inputs followed by compress(). All inputs must share a cost profile.
inline ModelSchedule merge(std::span<const ModelSchedule> schedules) {
  std::uint64_t key = 0;
  std::vector<ModelRecord> all;
  for (const auto& s : schedules) {
    if (s.profile_key() != 0) {
      if (key != 0 && key != s.profile_key()) {
        throw Error(ErrorCode::InconsistentProfile, "schedules were costed under different profiles");
      }
      key = s.profile_key();
    }
    all.insert(all.end(), s.begin(), s.end());
  }
  return compress(all, key);
}

inline ModelSchedule merge(std::initializer_list<ModelSchedule> schedules) {
  return merge(std::span<const ModelSchedule>(schedules.begin(), schedules.size()));
}

/// Raw record lists: every record's cost must match the profile.
inline ModelSchedule merge(std::span<const std::vector<ModelRecord>> lists, const CostProfile& profile) {
  std::vector<ModelRecord> all;
  for (const auto& list : lists) {
    for (const auto& r : list) {
      if (total_cost(r.variables, profile) != r.cost) {
        throw Error(ErrorCode::InconsistentProfile,
                    "record {" + r.variables.to_string() + "} was costed under another profile");
      }
      all.push_back(r);
    }
  }
  return compress(all, profile.fingerprint());
}

/// Conservative step-function lookup: the most expensive record within budget.
inline const ModelRecord& best_under_budget(const ModelSchedule& schedule, Cost budget) {
  const auto& records = schedule.records();
  auto it = std::upper_bound(records.begin(), records.end(), budget,
                             [](Cost b, const ModelRecord& r) { return b < r.cost; });
  if (it == records.begin()) {
    throw Error(ErrorCode::NoFeasibleModel, "no model costs at most " + budget.to_string());
  }
  return *std::prev(it);
}

/// Validation accuracy reachable at `budget`, or nullopt when nothing is affordable.
inline std::optional<double> accuracy_at_budget(const ModelSchedule& schedule, Cost budget) {
  if (schedule.empty() || budget < schedule[0].cost) return std::nullopt;
  return best_under_budget(schedule, budget).val_accuracy;
}

}  // namespace costsel
