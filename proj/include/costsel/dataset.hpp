#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/evaluator.hpp"
#include "costsel/format.hpp"
#include "costsel/matrix.hpp"
#include "costsel/random.hpp"
#include "costsel/synth.hpp"

namespace costsel {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Reads a comma-delimited file with a header row. The column named
/// `label_column` holds class labels, coded 1..J in order of first
/// appearance; every other column must be numeric.
inline Dataset load_dataset_csv(std::istream& in, std::string_view label_column = "label") {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) {
    throw Error(ErrorCode::EmptyDataset, "no header row");
  }
  const auto header = split_fields(line, ',');
  std::optional<std::size_t> label_at;
  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = detail::trim(header[c]);
    if (name == label_column && !label_at) {
      label_at = c;
    } else {
      data.feature_names.emplace_back(name);
    }
  }
  if (!label_at) throw Error(ErrorCode::UnknownLabelColumn, "no column named '" + std::string(label_column) + "'");

  std::vector<double> values;
  std::map<std::string, int, std::less<>> codes;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError(row, std::min(fields.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto cell = detail::trim(fields[c]);
      if (cell.empty()) throw ParseError(row, c + 1, "empty cell");
      if (c == *label_at) {
        auto [it, inserted] = codes.try_emplace(std::string(cell), static_cast<int>(codes.size()) + 1);
        if (inserted) data.class_names.emplace_back(cell);
        data.y.push_back(it->second);
        continue;
      }
      try {
        const double v = parse_double(cell);
        if (!std::isfinite(v)) throw ParseError(row, c + 1, "non-finite value");
        values.push_back(v);
      } catch (const ParseError&) {
        throw;
      } catch (const Error&) {
        throw ParseError(row, c + 1, "not numeric: '" + std::string(cell) + "'");
      }
    }
  }
  if (row == 0) throw Error(ErrorCode::EmptyDataset, "header but no data rows");
  data.x = Matrix(row, data.feature_names.size(), std::move(values));
  return data;
}

inline Dataset load_dataset_csv(const std::filesystem::path& path, std::string_view label_column = "label") {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return load_dataset_csv(in, label_column);
}

/// Features first, label last, header included.
inline void write_dataset_csv(std::ostream& out, const Dataset& data, std::string_view label_column = "label") {
  for (std::size_t c = 0; c < data.features(); ++c) {
    out << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c + 1)) << ',';
  }
  out << label_column << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.features(); ++c) out << format_double(data.x(r, c)) << ',';
    const int y = data.y[r];
    if (static_cast<std::size_t>(y) <= data.class_names.size()) {
      out << data.class_names[static_cast<std::size_t>(y - 1)];
    } else {
      out << y;
    }
    out << '\n';
  }
}

/// Sidecar mapping of original class names to integer codes.
inline void write_label_map(std::ostream& out, const Dataset& data) {
  out << "label,code\n";
  for (std::size_t i = 0; i < data.class_names.size(); ++i) out << data.class_names[i] << ',' << i + 1 << '\n';
}

/// Two columns: feature name or 1-based index, cost. A header row is optional.
inline CostProfile load_cost_profile(std::istream& in, std::span<const std::string> feature_names) {
  const std::size_t p = feature_names.size();
  std::vector<std::optional<Cost>> costs(p);
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 2) throw ParseError(row + 1, fields.size() < 2 ? 2 : 3, "expected two columns");
    const auto key = detail::trim(fields[0]);
    const auto value = detail::trim(fields[1]);
    if (first) {
      first = false;
      try {
        Cost::parse(value);
      } catch (const Error&) {
        continue;  // header
      }
    }
    ++row;
    std::optional<std::size_t> slot;
    for (std::size_t i = 0; i < p; ++i) {
      if (feature_names[i] == key) slot = i;
    }
    if (!slot) {
      std::size_t index = 0;
      bool numeric = !key.empty();
      for (char ch : key) {
        if (ch < '0' || ch > '9') numeric = false;
        else index = index * 10 + static_cast<std::size_t>(ch - '0');
      }
      if (!numeric || index < 1 || index > p) throw ParseError(row, 1, "unknown feature '" + std::string(key) + "'");
      slot = index - 1;
    }
    Cost c;
    try {
      c = Cost::parse(value);
    } catch (const Error&) {
      throw ParseError(row, 2, "not a cost: '" + std::string(value) + "'");
    }
    if (c.cents() <= 0) throw ParseError(row, 2, "cost must be positive");
    if (costs[*slot]) throw ParseError(row, 1, "feature listed twice");
    costs[*slot] = c;
  }
  std::vector<Cost> out;
  for (std::size_t i = 0; i < p; ++i) {
    if (!costs[i]) throw Error(ErrorCode::InvalidCost, "no cost given for feature " + feature_names[i]);
    out.push_back(*costs[i]);
  }
  return CostProfile(std::move(out));
}

inline CostProfile load_cost_profile(const std::filesystem::path& path, std::span<const std::string> feature_names) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return load_cost_profile(in, feature_names);
}

inline void write_cost_profile(std::ostream& out, const CostProfile& profile,
                               std::span<const std::string> feature_names = {}) {
  out << "feature,cost\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (i < feature_names.size()) {
      out << feature_names[i];
    } else {
      out << i + 1;
    }
    out << ',' << profile[i].to_string() << '\n';
  }
}

/// Disjoint 0-based row partitions covering every row.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then contiguous cuts: floor(n/5) rows each for validation
/// and test, the remainder for training.
inline DatasetSplit split_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw Error(ErrorCode::DatasetTooSmall, "need at least 5 rows to split, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_val = n / 5;
  const std::size_t n_test = n / 5;
  const std::size_t n_train = n - n_val - n_test;
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                          order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return split;
}

inline SplitData make_split_data(const Dataset& data, const DatasetSplit& split) {
  SplitData out;
  out.x_train = data.x.select_rows(split.train);
  out.y_train = select_labels(data.y, split.train);
  out.x_val = data.x.select_rows(split.validation);
  out.y_val = select_labels(data.y, split.validation);
  out.x_test = data.x.select_rows(split.test);
  out.y_test = select_labels(data.y, split.test);
  return out;
}

}  // namespace costsel
