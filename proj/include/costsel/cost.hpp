#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "costsel/error.hpp"

namespace costsel {

/// Monetary amount held as an exact count of hundredths, so sums and
/// comparisons of model costs never suffer rounding.
class Cost {
 public:
  constexpr Cost() = default;

  static constexpr Cost from_cents(std::int64_t cents) { return Cost(cents); }

  static Cost from_double(double value) {
    if (!std::isfinite(value)) throw Error(ErrorCode::InvalidCost, "cost is not finite");
    return Cost(static_cast<std::int64_t>(std::llround(value * 100.0)));
  }

  /// Parses a plain decimal such as "92", "12.5" or "0.07"; digits beyond the
  /// second fractional place round half away from zero.
  static Cost parse(std::string_view text) {
    auto fail = [&] { throw Error(ErrorCode::InvalidCost, "not a decimal cost: '" + std::string(text) + "'"); };
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) fail();
    bool negative = false;
    if (text.front() == '-' || text.front() == '+') {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    std::int64_t whole = 0;
    std::size_t i = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
      if (text[i] < '0' || text[i] > '9') fail();
      whole = whole * 10 + (text[i] - '0');
      any_digit = true;
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool round_up = false;
    if (i < text.size()) {
      ++i;
      for (; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') fail();
        any_digit = true;
        if (frac_digits < 2) {
          frac = frac * 10 + (text[i] - '0');
          ++frac_digits;
        } else if (frac_digits == 2) {
          round_up = text[i] >= '5';
          ++frac_digits;
        }
      }
    }
    if (!any_digit) fail();
    while (frac_digits < 2) {
      frac *= 10;
      ++frac_digits;
    }
    std::int64_t cents = whole * 100 + frac + (round_up ? 1 : 0);
    return Cost(negative ? -cents : cents);
  }

  constexpr std::int64_t cents() const noexcept { return cents_; }
  constexpr double value() const noexcept { return static_cast<double>(cents_) / 100.0; }

  /// "417", "12.5", "0.07".
  std::string to_string() const {
    const std::int64_t magnitude = cents_ < 0 ? -cents_ : cents_;
    std::string out = (cents_ < 0 ? "-" : "") + std::to_string(magnitude / 100);
    const std::int64_t frac = magnitude % 100;
    if (frac != 0) {
      out += '.';
      out += static_cast<char>('0' + frac / 10);
      if (frac % 10 != 0) out += static_cast<char>('0' + frac % 10);
    }
    return out;
  }

  constexpr Cost& operator+=(Cost other) {
    cents_ += other.cents_;
    return *this;
  }
  friend constexpr Cost operator+(Cost a, Cost b) { return Cost(a.cents_ + b.cents_); }
  friend constexpr Cost operator-(Cost a, Cost b) { return Cost(a.cents_ - b.cents_); }
  friend constexpr auto operator<=>(Cost, Cost) = default;

 private:
  constexpr explicit Cost(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

/// Sorted, duplicate-free set of 1-based feature indices.
class VariableSet {
 public:
  VariableSet() = default;
  VariableSet(std::initializer_list<int> indices) : VariableSet(std::vector<int>(indices)) {}
  explicit VariableSet(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }

  /// {1, ..., p}
  static VariableSet full(std::size_t p) {
    std::vector<int> all(p);
    for (std::size_t i = 0; i < p; ++i) all[i] = static_cast<int>(i + 1);
    return VariableSet(std::move(all));
  }

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(int index) const { return std::binary_search(indices_.begin(), indices_.end(), index); }
  const std::vector<int>& indices() const noexcept { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  VariableSet without(int index) const {
    std::vector<int> rest;
    rest.reserve(indices_.size());
    for (int i : indices_) {
      if (i != index) rest.push_back(i);
    }
    return VariableSet(std::move(rest));
  }

  bool is_subset_of(const VariableSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(), indices_.end());
  }

  /// 0-based column indices, for selecting matrix columns.
  std::vector<std::size_t> columns() const {
    std::vector<std::size_t> out;
    out.reserve(indices_.size());
    for (int i : indices_) out.push_back(static_cast<std::size_t>(i - 1));
    return out;
  }

  /// Semicolon-joined, e.g. "4;5;8". Empty set gives "".
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(indices_[i]);
    }
    return out;
  }

  static VariableSet parse(std::string_view text) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find(';', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view token = text.substr(start, end - start);
      if (token.empty()) throw Error(ErrorCode::InvalidVariableIndex, "empty variable index");
      int value = 0;
      for (char ch : token) {
        if (ch < '0' || ch > '9') {
          throw Error(ErrorCode::InvalidVariableIndex, "bad variable index '" + std::string(token) + "'");
        }
        value = value * 10 + (ch - '0');
      }
      out.push_back(value);
      start = end + 1;
    }
    return VariableSet(std::move(out));
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i : indices_) {
      h ^= static_cast<std::uint64_t>(i);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  friend bool operator==(const VariableSet&, const VariableSet&) = default;
  friend auto operator<=>(const VariableSet&, const VariableSet&) = default;

 private:
  std::vector<int> indices_;
};

/// Per-variable acquisition costs b_1..b_p.
class CostProfile {
 public:
  CostProfile() = default;

  explicit CostProfile(std::vector<Cost> costs) : costs_(std::move(costs)) {
    for (std::size_t i = 0; i < costs_.size(); ++i) {
      if (costs_[i].cents() <= 0) {
        throw Error(ErrorCode::InvalidCost, "cost of variable " + std::to_string(i + 1) + " is not positive");
      }
    }
  }

  static CostProfile from_values(const std::vector<double>& values) {
    std::vector<Cost> costs;
    costs.reserve(values.size());
    for (double v : values) {
      if (!std::isfinite(v) || v <= 0.0) throw Error(ErrorCode::InvalidCost, "costs must be positive and finite");
      costs.push_back(Cost::from_double(v));
    }
    return CostProfile(std::move(costs));
  }

  std::size_t size() const noexcept { return costs_.size(); }
  Cost operator[](std::size_t zero_based) const { return costs_[zero_based]; }
  const std::vector<Cost>& costs() const noexcept { return costs_; }

  /// Cost of 1-based variable `index`.
  Cost of(int index) const {
    if (index < 1 || static_cast<std::size_t>(index) > costs_.size()) {
      throw Error(ErrorCode::InvalidVariableIndex,
                  "variable " + std::to_string(index) + " outside 1.." + std::to_string(costs_.size()));
    }
    return costs_[static_cast<std::size_t>(index - 1)];
  }

  Cost full_cost() const {
    Cost total;
    for (Cost c : costs_) total += c;
    return total;
  }

  /// Identifies the profile; schedules built under different profiles carry different keys.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ costs_.size();
    for (Cost c : costs_) {
      h ^= static_cast<std::uint64_t>(c.cents());
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return h == 0 ? 1 : h;
  }

  friend bool operator==(const CostProfile&, const CostProfile&) = default;

 private:
  std::vector<Cost> costs_;
};

/// Sum of the member costs; exact.
inline Cost total_cost(const VariableSet& variables, const CostProfile& profile) {
  Cost total;
  for (int i : variables) total += profile.of(i);
  return total;
}

}  // namespace costsel
