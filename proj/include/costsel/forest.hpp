#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "costsel/error.hpp"
#include "costsel/matrix.hpp"
#include "costsel/random.hpp"

namespace costsel {

struct ForestParams {
  std::size_t n_trees = 100;
  /// Candidate features per node; 0 means ceil(sqrt(p)).
  std::size_t mtry = 0;
  /// Impure nodes holding at least this many (bootstrap-weighted) rows are split.
  std::size_t min_node_size = 1;
  std::uint64_t master_seed = 1;
};

struct TreeNode {
  int feature = -1;  // 0-based; -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = 0;  // 1-based label, leaves only

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;
  /// 0-based training rows drawn with replacement; exactly n entries.
  std::vector<std::size_t> bootstrap_indices;

  int predict(std::span<const double> x) const {
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
      const TreeNode& node = nodes[static_cast<std::size_t>(at)];
      at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].leaf_class;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

class Forest {
 public:
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  int n_classes = 0;
  std::size_t mtry = 0;
  std::uint64_t master_seed = 0;

  std::size_t n_trees() const noexcept { return trees.size(); }

  friend bool operator==(const Forest&, const Forest&) = default;
};

/// Plurality vote; ties go to the smaller label.
inline int plurality(std::span<const int> votes_per_class) {
  int best = 0;
  for (std::size_t c = 1; c < votes_per_class.size(); ++c) {
    if (votes_per_class[c] > votes_per_class[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best + 1;
}

inline int predict_class(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(forest.n_features) +
                                                  " features, got " + std::to_string(x.size()));
  }
  std::vector<int> votes(static_cast<std::size_t>(forest.n_classes), 0);
  for (const auto& tree : forest.trees) ++votes[static_cast<std::size_t>(tree.predict(x) - 1)];
  return plurality(votes);
}

inline double accuracy_on(const Forest& forest, const Matrix& x, const Labels& y) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyEvaluationSet, "no rows to evaluate");
  if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "row and label counts differ");
  if (x.cols() != forest.n_features) throw Error(ErrorCode::DimensionMismatch, "feature count differs from forest");
  std::size_t correct = 0;
  std::vector<int> votes(static_cast<std::size_t>(forest.n_classes));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    auto row = x.row(r);
    for (const auto& tree : forest.trees) ++votes[static_cast<std::size_t>(tree.predict(row) - 1)];
    if (plurality(votes) == y[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

namespace detail {

/// Column-major view of the training data shared by every tree.
struct TrainingColumns {
  std::vector<std::vector<double>> values;          // [feature][row]
  std::vector<std::vector<std::uint32_t>> order;    // [feature] rows sorted by value
  std::vector<int> klass;                           // 0-based class per row
  int n_classes = 0;

  TrainingColumns(const Matrix& x, const Labels& y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    values.assign(p, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t f = 0; f < p; ++f) values[f][r] = x(r, f);
    }
    order.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
      auto& o = order[f];
      o.resize(n);
      std::iota(o.begin(), o.end(), std::uint32_t{0});
      const auto& v = values[f];
      std::stable_sort(o.begin(), o.end(), [&v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    }
    klass.resize(n);
    for (std::size_t r = 0; r < n; ++r) klass[r] = y[r] - 1;
    n_classes = label_count(y);
  }
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  /// sum over children of (sum_c w_c^2) / w_child; larger is a bigger Gini decrease.
  double score = -1.0;
  std::size_t left_rows = 0;  // distinct rows going left

  bool valid() const noexcept { return feature >= 0; }
};

inline double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi)) mid = lo;
  return mid;
}

/// Best threshold for one feature over a node whose rows are given sorted by
/// that feature. Thresholds are midpoints between consecutive distinct values;
/// the first maximum wins.
inline SplitChoice scan_feature(int feature, std::span<const std::uint32_t> sorted_rows,
                                std::span<const double> values, std::span<const int> klass,
                                std::span<const std::uint32_t> weight, int n_classes,
                                std::vector<std::int64_t>& left, std::vector<std::int64_t>& right) {
  SplitChoice best;
  left.assign(static_cast<std::size_t>(n_classes), 0);
  right.assign(static_cast<std::size_t>(n_classes), 0);
  std::int64_t total = 0;
  for (std::uint32_t r : sorted_rows) {
    right[static_cast<std::size_t>(klass[r])] += weight[r];
    total += weight[r];
  }
  std::int64_t sq_left = 0;
  std::int64_t sq_right = 0;
  for (std::int64_t c : right) sq_right += c * c;
  std::int64_t w_left = 0;
  for (std::size_t i = 0; i + 1 < sorted_rows.size(); ++i) {
    const std::uint32_t r = sorted_rows[i];
    const auto c = static_cast<std::size_t>(klass[r]);
    const std::int64_t w = weight[r];
    sq_left += 2 * left[c] * w + w * w;
    sq_right += -2 * right[c] * w + w * w;
    left[c] += w;
    right[c] -= w;
    w_left += w;
    const double v = values[r];
    const double next = values[sorted_rows[i + 1]];
    if (!(v < next)) continue;
    const double score = static_cast<double>(sq_left) / static_cast<double>(w_left) +
                         static_cast<double>(sq_right) / static_cast<double>(total - w_left);
    if (score > best.score) {
      best.feature = feature;
      best.threshold = midpoint(v, next);
      best.score = score;
      best.left_rows = i + 1;
    }
  }
  return best;
}

/// Tries candidates in the given order and keeps the first best split.
/// `rows_by_feature[f]` lists the node's rows sorted by feature f.
/// When the first `mtry` candidates are all constant on the node the search
/// continues through the remaining candidates until one splits.
inline SplitChoice best_split(const std::vector<std::vector<double>>& values, std::span<const int> klass,
                              std::span<const std::uint32_t> weight, int n_classes,
                              const std::vector<std::span<const std::uint32_t>>& rows_by_feature,
                              std::span<const std::size_t> candidates, std::size_t mtry,
                              std::vector<std::int64_t>& left, std::vector<std::int64_t>& right) {
  SplitChoice best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (k >= mtry && best.valid()) break;
    const std::size_t f = candidates[k];
    SplitChoice s = scan_feature(static_cast<int>(f), rows_by_feature[f], values[f], klass, weight, n_classes,
                                 left, right);
    if (s.valid() && s.score > best.score) best = s;
  }
  return best;
}

inline DecisionTree grow_tree(const TrainingColumns& data, std::size_t mtry, std::size_t min_node_size,
                              std::uint64_t seed) {
  const std::size_t p = data.values.size();
  const std::size_t n = data.klass.size();
  Rng rng(seed);
  DecisionTree tree;

  tree.bootstrap_indices.resize(n);
  std::vector<std::uint32_t> weight(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(rng.below(n));
    tree.bootstrap_indices[i] = r;
    ++weight[r];
  }

  // Per feature, the in-bag rows in sorted order. Node ranges [begin, end)
  // refer to the same rows in every array.
  std::vector<std::vector<std::uint32_t>> sorted(p);
  for (std::size_t f = 0; f < p; ++f) {
    sorted[f].reserve(n);
    for (std::uint32_t r : data.order[f]) {
      if (weight[r] > 0) sorted[f].push_back(r);
    }
  }

  struct Pending {
    int node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, sorted.empty() ? 0 : sorted[0].size()});

  std::vector<std::int64_t> class_weight(static_cast<std::size_t>(data.n_classes));
  std::vector<std::int64_t> left_scratch;
  std::vector<std::int64_t> right_scratch;
  std::vector<std::size_t> candidates(p);
  std::vector<std::span<const std::uint32_t>> node_rows(p);
  std::vector<char> goes_left(n, 0);
  std::vector<std::uint32_t> buffer;
  buffer.reserve(n);

  while (!stack.empty()) {
    const Pending at = stack.back();
    stack.pop_back();

    std::fill(class_weight.begin(), class_weight.end(), 0);
    std::int64_t total = 0;
    for (std::size_t i = at.begin; i < at.end; ++i) {
      const std::uint32_t r = sorted[0][i];
      class_weight[static_cast<std::size_t>(data.klass[r])] += weight[r];
      total += weight[r];
    }
    std::size_t majority = 0;
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < class_weight.size(); ++c) {
      if (class_weight[c] > 0) ++nonzero;
      if (class_weight[c] > class_weight[majority]) majority = c;
    }
    auto make_leaf = [&] {
      auto& node = tree.nodes[static_cast<std::size_t>(at.node)];
      node.feature = -1;
      node.leaf_class = static_cast<int>(majority) + 1;
    };
    if (nonzero <= 1 || total < static_cast<std::int64_t>(min_node_size) || at.end - at.begin < 2) {
      make_leaf();
      continue;
    }

    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(candidates));
    for (std::size_t f = 0; f < p; ++f) {
      node_rows[f] = std::span<const std::uint32_t>(sorted[f].data() + at.begin, at.end - at.begin);
    }
    const SplitChoice split = best_split(data.values, data.klass, weight, data.n_classes, node_rows, candidates,
                                         mtry, left_scratch, right_scratch);
    if (!split.valid()) {  // every feature constant on this node
      make_leaf();
      continue;
    }

    const auto& split_values = data.values[static_cast<std::size_t>(split.feature)];
    for (std::size_t i = at.begin; i < at.end; ++i) {
      const std::uint32_t r = sorted[0][i];
      goes_left[r] = split_values[r] <= split.threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (std::size_t f = 0; f < p; ++f) {
      buffer.clear();
      auto& arr = sorted[f];
      std::size_t write = at.begin;
      for (std::size_t i = at.begin; i < at.end; ++i) {
        const std::uint32_t r = arr[i];
        if (goes_left[r]) {
          arr[write++] = r;
        } else {
          buffer.push_back(r);
        }
      }
      std::copy(buffer.begin(), buffer.end(), arr.begin() + static_cast<std::ptrdiff_t>(write));
      n_left = write - at.begin;
    }

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(at.node)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({left_id + 1, at.begin + n_left, at.end});
    stack.push_back({left_id, at.begin, at.begin + n_left});
  }
  return tree;
}

}  // namespace detail

/// Per-tree seeds come from a splitmix64 stream started at the master seed, so
/// trees can be grown in any order with the same result.
inline std::vector<std::uint64_t> tree_seeds(std::uint64_t master_seed, std::size_t n_trees) {
  std::vector<std::uint64_t> seeds(n_trees);
  std::uint64_t state = master_seed;
  for (auto& s : seeds) s = splitmix64(state);
  return seeds;
}

inline Forest fit_forest(const Matrix& x, const Labels& y, const ForestParams& params = {}) {
  if (x.cols() < 2) {
    throw Error(ErrorCode::EngineNeedsTwoVariables, "the forest engine needs at least two variables");
  }
  if (x.rows() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two training rows");
  if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "row and label counts differ");
  if (params.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be at least 1");
  for (int label : y) {
    if (label < 1) throw Error(ErrorCode::InvalidArgument, "labels must be coded 1..J");
  }
  const std::size_t p = x.cols();
  std::size_t mtry = params.mtry == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))))
                                      : params.mtry;
  if (mtry > p) throw Error(ErrorCode::InvalidArgument, "mtry exceeds the number of features");

  const detail::TrainingColumns data(x, y);
  Forest forest;
  forest.n_features = p;
  forest.n_classes = data.n_classes;
  forest.mtry = mtry;
  forest.master_seed = params.master_seed;
  forest.trees.reserve(params.n_trees);
  for (std::uint64_t seed : tree_seeds(params.master_seed, params.n_trees)) {
    forest.trees.push_back(detail::grow_tree(data, mtry, params.min_node_size, seed));
  }
  return forest;
}

/// Permutation importance per feature, in accuracy-fraction units.
struct ImportanceProfile {
  std::vector<double> importances;

  std::size_t size() const noexcept { return importances.size(); }
  double operator[](std::size_t i) const { return importances[i]; }
};

/// Drop in validation accuracy when one column is shuffled; one shuffle per
/// feature, seeded per feature from `seed`.
inline ImportanceProfile permutation_importance(const Forest& forest, const Matrix& x_val, const Labels& y_val,
                                                std::uint64_t seed) {
  const double base = accuracy_on(forest, x_val, y_val);
  ImportanceProfile profile;
  profile.importances.resize(x_val.cols());
  Matrix permuted = x_val;
  for (std::size_t f = 0; f < x_val.cols(); ++f) {
    std::vector<double> column = x_val.column(f);
    Rng rng(derive_seed(seed, f));
    rng.shuffle(std::span<double>(column));
    for (std::size_t r = 0; r < permuted.rows(); ++r) permuted(r, f) = column[r];
    profile.importances[f] = base - accuracy_on(forest, permuted, y_val);
    for (std::size_t r = 0; r < permuted.rows(); ++r) permuted(r, f) = x_val(r, f);
  }
  return profile;
}

}  // namespace costsel
