// Randomized checks of the schedule algebra against a brute-force oracle.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "costsel/schedule.hpp"

using namespace costsel;

namespace {

constexpr int kP = 7;

struct Gen {
  std::mt19937_64 rng;
  CostProfile profile;

  explicit Gen(std::uint64_t seed) : rng(seed), profile(draw_profile(rng)) {}

  static CostProfile draw_profile(std::mt19937_64& rng) {
    std::vector<Cost> costs;
    // Few distinct small costs so equal-cost records are common.
    for (int i = 0; i < kP; ++i) costs.push_back(Cost::from_cents(100 * static_cast<int>(1 + rng() % 5)));
    return CostProfile(costs);
  }

  ModelRecord record() {
    std::vector<int> idx;
    while (idx.empty()) {
      for (int i = 1; i <= kP; ++i) {
        if (rng() % 2) idx.push_back(i);
      }
    }
    // Accuracies on a coarse grid so exact ties happen.
    const double acc = static_cast<double>(rng() % 21) / 20.0;
    const auto src = static_cast<Source>(rng() % 5);
    return make_record(VariableSet(idx), profile, acc, src);
  }

  std::vector<ModelRecord> list(std::size_t n) {
    std::vector<ModelRecord> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(record());
    return out;
  }
};

// Pairwise filter: collapse duplicate variable sets to their best copy, drop
// everything dominated by anything else, then resolve exact (cost, accuracy)
// ties by source and then variable set.
std::vector<ModelRecord> brute_force(const std::vector<ModelRecord>& in) {
  auto better_copy = [](const ModelRecord& a, const ModelRecord& b) {
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    return a.source < b.source;
  };
  std::vector<ModelRecord> unique;
  for (const auto& r : in) {
    bool beaten = false;
    for (const auto& o : in) {
      if (&o != &r && o.variables == r.variables && better_copy(o, r)) beaten = true;
    }
    bool seen = false;
    for (const auto& u : unique) {
      if (u.variables == r.variables) seen = true;
    }
    if (!beaten && !seen) unique.push_back(r);
  }
  std::vector<ModelRecord> survivors;
  for (const auto& r : unique) {
    bool dominated = false;
    for (const auto& o : unique) {
      if (dominates(o, r)) dominated = true;
    }
    if (!dominated) survivors.push_back(r);
  }
  std::vector<ModelRecord> out;
  for (const auto& r : survivors) {
    bool loses_tie = false;
    for (const auto& o : survivors) {
      if (o.cost == r.cost && o.val_accuracy == r.val_accuracy && o.variables != r.variables &&
          (o.source < r.source || (o.source == r.source && o.variables < r.variables))) {
        loses_tie = true;
      }
    }
    if (!loses_tie) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const ModelRecord& a, const ModelRecord& b) { return a.cost < b.cost; });
  return out;
}

}  // namespace

TEST(ScheduleProperties, CompressMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Gen g(seed);
    const auto raw = g.list(1 + seed % 60);
    EXPECT_EQ(compress(raw).records(), brute_force(raw)) << "seed " << seed;
  }
}

TEST(ScheduleProperties, CompressIsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Gen g(seed);
    const auto once = compress(g.list(40));
    EXPECT_EQ(compress(once.records()), once) << "seed " << seed;
  }
}

TEST(ScheduleProperties, MergeIsOrderInvariant) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Gen g(seed);
    const auto key = g.profile.fingerprint();
    const auto a = compress(g.list(15), key);
    const auto b = compress(g.list(15), key);
    const auto c = compress(g.list(15), key);
    const auto abc = merge({a, b, c});
    EXPECT_EQ(merge({c, a, b}), abc);
    EXPECT_EQ(merge({b, c, a}), abc);
    EXPECT_EQ(merge({merge({a, b}), c}), abc);
    EXPECT_EQ(merge({a, merge({b, c})}), abc);

    std::vector<std::vector<ModelRecord>> lists{g.list(10), g.list(10)};
    const auto forward = merge(lists, g.profile);
    std::reverse(lists.begin(), lists.end());
    std::shuffle(lists[0].begin(), lists[0].end(), g.rng);
    EXPECT_EQ(merge(lists, g.profile), forward);
  }
}

TEST(ScheduleProperties, MergeDominatesInputs) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Gen g(seed);
    const auto a = compress(g.list(20));
    const auto b = compress(g.list(20));
    const auto m = merge({a, b});
    for (int cents = 0; cents <= 100 * 5 * kP; cents += 50) {
      const Cost budget = Cost::from_cents(cents);
      for (const auto* s : {&a, &b}) {
        const auto in = accuracy_at_budget(*s, budget);
        if (!in) continue;
        const auto out = accuracy_at_budget(m, budget);
        ASSERT_TRUE(out.has_value());
        EXPECT_GE(*out, *in);
      }
    }
  }
}

TEST(ScheduleProperties, LookupIsMonotoneAndWithinBudget) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Gen g(seed);
    const auto s = compress(g.list(30));
    std::optional<double> prev;
    for (int cents = 0; cents <= 100 * 5 * kP; cents += 25) {
      const Cost budget = Cost::from_cents(cents);
      const auto acc = accuracy_at_budget(s, budget);
      if (acc) {
        EXPECT_LE(best_under_budget(s, budget).cost, budget);
        if (prev) {
          EXPECT_GE(*acc, *prev);
        }
      } else {
        EXPECT_FALSE(prev.has_value());
      }
      prev = acc;
    }
  }
}

TEST(ScheduleProperties, RecordsCarryExactCost) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Gen g(seed);
    for (const auto& r : compress(g.list(30))) EXPECT_EQ(r.cost, total_cost(r.variables, g.profile));
  }
}
