#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/matrix.hpp"

namespace costsel {

struct LassoSettings {
  std::size_t n_lambda = 100;
  double eps_ratio = 1e-3;
  /// Standardized-scale magnitude above which a coefficient counts as active.
  double zero_tol = 1e-8;
  double kkt_tol = 1e-4;
  /// Coordinate updates allowed per (class, lambda) slice.
  std::size_t max_iters = 100'000;
};

/// Strictly decreasing penalties, starting at the smallest value whose solution is empty.
struct LambdaGrid {
  std::vector<double> lambdas;

  std::size_t size() const noexcept { return lambdas.size(); }
  double operator[](std::size_t i) const { return lambdas[i]; }
};

/// Column means and population standard deviations; constant columns get scale 0
/// and never enter the model.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardization fit(const Matrix& x) {
    Standardization s;
    const std::size_t n = x.rows();
    s.mean.assign(x.cols(), 0.0);
    s.scale.assign(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double m = 0.0;
      for (std::size_t r = 0; r < n; ++r) m += x(r, j);
      m /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t r = 0; r < n; ++r) v += (x(r, j) - m) * (x(r, j) - m);
      v /= static_cast<double>(n);
      s.mean[j] = m;
      s.scale[j] = v > 1e-24 * (1.0 + m * m) ? std::sqrt(v) : 0.0;
    }
    return s;
  }

  /// Standardized columns, [feature][row]; constant columns are all zero.
  std::vector<std::vector<double>> columns(const Matrix& x) const {
    std::vector<std::vector<double>> cols(x.cols(), std::vector<double>(x.rows(), 0.0));
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (scale[j] == 0.0) continue;
      for (std::size_t r = 0; r < x.rows(); ++r) cols[j][r] = (x(r, j) - mean[j]) / scale[j];
    }
    return cols;
  }
};

/// Regularization path of one-vs-rest L1 logistic regressions.
/// Coefficients are indexed (class, variable, step), all 1-based.
class PathCoefficients {
 public:
  PathCoefficients() = default;
  PathCoefficients(int n_classes, std::size_t n_features, LambdaGrid grid, Standardization standardization)
      : n_classes_(n_classes),
        n_features_(n_features),
        grid_(std::move(grid)),
        standardization_(std::move(standardization)),
        theta_std_(static_cast<std::size_t>(n_classes) * n_features * grid_.size(), 0.0),
        intercept_std_(static_cast<std::size_t>(n_classes) * grid_.size(), 0.0) {}

  int n_classes() const noexcept { return n_classes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t steps() const noexcept { return grid_.size(); }
  const LambdaGrid& grid() const noexcept { return grid_; }
  double lambda(std::size_t step) const { return grid_[step - 1]; }
  const Standardization& standardization() const noexcept { return standardization_; }

  double standardized_coefficient(int klass, int variable, std::size_t step) const {
    return theta_std_[index(klass, variable, step)];
  }
  double& standardized_coefficient(int klass, int variable, std::size_t step) {
    return theta_std_[index(klass, variable, step)];
  }
  double standardized_intercept(int klass, std::size_t step) const {
    return intercept_std_[intercept_index(klass, step)];
  }
  double& standardized_intercept(int klass, std::size_t step) { return intercept_std_[intercept_index(klass, step)]; }

  /// Coefficient on the original feature scale.
  double coefficient(int klass, int variable, std::size_t step) const {
    const double s = standardization_.scale[static_cast<std::size_t>(variable - 1)];
    return s == 0.0 ? 0.0 : standardized_coefficient(klass, variable, step) / s;
  }

  /// Intercept on the original feature scale.
  double intercept(int klass, std::size_t step) const {
    double b = standardized_intercept(klass, step);
    if (!std::isfinite(b)) return b;
    for (std::size_t i = 0; i < n_features_; ++i) {
      const double s = standardization_.scale[i];
      if (s != 0.0) b -= standardized_coefficient(klass, static_cast<int>(i + 1), step) * standardization_.mean[i] / s;
    }
    return b;
  }

  /// Linear score of class `klass` at `step` for an original-scale feature vector.
  double score(int klass, std::size_t step, std::span<const double> x) const {
    double b = standardized_intercept(klass, step);
    if (!std::isfinite(b)) return b;
    for (std::size_t i = 0; i < n_features_; ++i) {
      const double s = standardization_.scale[i];
      if (s == 0.0) continue;
      b += standardized_coefficient(klass, static_cast<int>(i + 1), step) * (x[i] - standardization_.mean[i]) / s;
    }
    return b;
  }

 private:
  std::size_t index(int klass, int variable, std::size_t step) const {
    return (static_cast<std::size_t>(klass - 1) * n_features_ + static_cast<std::size_t>(variable - 1)) *
               grid_.size() +
           (step - 1);
  }
  std::size_t intercept_index(int klass, std::size_t step) const {
    return static_cast<std::size_t>(klass - 1) * grid_.size() + (step - 1);
  }

  int n_classes_ = 0;
  std::size_t n_features_ = 0;
  LambdaGrid grid_;
  Standardization standardization_;
  std::vector<double> theta_std_;
  std::vector<double> intercept_std_;
};

namespace logistic {

inline double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

/// log(1 + e^eta) without overflow.
inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

/// Binary problem on standardized columns: cols[k][r], y in {0,1}.
struct Problem {
  const std::vector<std::vector<double>>* cols = nullptr;
  std::span<const double> y;
  std::vector<char> usable;  // false for constant columns

  std::size_t n() const noexcept { return y.size(); }
  std::size_t p() const noexcept { return cols->size(); }
};

/// Mean negative log-likelihood.
inline double nll(std::span<const double> eta, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) s += softplus(eta[r]) - y[r] * eta[r];
  return s / static_cast<double>(y.size());
}

inline std::vector<double> linear_predictor(const Problem& prob, std::span<const double> beta, double intercept) {
  std::vector<double> eta(prob.n(), intercept);
  for (std::size_t k = 0; k < prob.p(); ++k) {
    if (beta[k] == 0.0) continue;
    const auto& x = (*prob.cols)[k];
    for (std::size_t r = 0; r < prob.n(); ++r) eta[r] += beta[k] * x[r];
  }
  return eta;
}

inline double nll(const Problem& prob, std::span<const double> beta, double intercept) {
  auto eta = linear_predictor(prob, beta, intercept);
  return nll(eta, prob.y);
}

/// Gradient of the mean NLL; element 0 is the intercept, element k+1 is beta[k].
inline std::vector<double> nll_gradient(const Problem& prob, std::span<const double> beta, double intercept) {
  auto eta = linear_predictor(prob, beta, intercept);
  std::vector<double> g(prob.p() + 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(prob.n());
  for (std::size_t r = 0; r < prob.n(); ++r) g[0] += sigmoid(eta[r]) - prob.y[r];
  g[0] *= inv_n;
  for (std::size_t k = 0; k < prob.p(); ++k) {
    const auto& x = (*prob.cols)[k];
    double s = 0.0;
    for (std::size_t r = 0; r < prob.n(); ++r) s += x[r] * (sigmoid(eta[r]) - prob.y[r]);
    g[k + 1] = s * inv_n;
  }
  return g;
}

inline double penalized_objective(const Problem& prob, std::span<const double> beta, double intercept,
                                  double lambda) {
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return nll(prob, beta, intercept) + lambda * l1;
}

/// Largest violation of the optimality conditions, with score = -gradient:
/// |score_k| <= lambda for zero coefficients, score_k = lambda * sign(beta_k)
/// for nonzero ones, and a zero intercept gradient.
inline double kkt_residual(const Problem& prob, std::span<const double> beta, double intercept, double lambda) {
  const auto g = nll_gradient(prob, beta, intercept);
  double worst = std::abs(g[0]);
  for (std::size_t k = 0; k < prob.p(); ++k) {
    if (!prob.usable[k]) continue;
    const double score = -g[k + 1];
    const double r = beta[k] == 0.0 ? std::max(0.0, std::abs(score) - lambda)
                                    : std::abs(score - lambda * (beta[k] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, r);
  }
  return worst;
}

/// Working state of the coordinate-descent solver.
struct State {
  std::vector<double> beta;
  double intercept = 0.0;
  std::vector<double> eta;
  double loss = 0.0;  // mean NLL at eta
};

inline State initial_state(const Problem& prob) {
  double ybar = 0.0;
  for (double v : prob.y) ybar += v;
  ybar /= static_cast<double>(prob.n());
  State s;
  s.beta.assign(prob.p(), 0.0);
  s.intercept = std::log(ybar / (1.0 - ybar));
  s.eta.assign(prob.n(), s.intercept);
  s.loss = nll(s.eta, prob.y);
  return s;
}

namespace detail {

// Loss after moving eta by delta * x (x == nullptr means the intercept).
inline double trial_loss(const Problem& prob, const State& s, const std::vector<double>* x, double delta) {
  double total = 0.0;
  for (std::size_t r = 0; r < prob.n(); ++r) {
    const double e = s.eta[r] + delta * (x ? (*x)[r] : 1.0);
    total += softplus(e) - prob.y[r] * e;
  }
  return total / static_cast<double>(prob.n());
}

inline void apply(const Problem& prob, State& s, const std::vector<double>* x, double delta, double new_loss) {
  for (std::size_t r = 0; r < prob.n(); ++r) s.eta[r] += delta * (x ? (*x)[r] : 1.0);
  s.loss = new_loss;
}

}  // namespace detail

/// One coordinate update of beta[k] (or the intercept when k == npos).
/// Tries the proximal Newton step with the exact curvature; if that does not
/// lower the penalized objective, takes the majorization step with the
/// global curvature bound mean(x^2)/4, which always does.
inline void update_coordinate(const Problem& prob, State& s, std::size_t k, double lambda) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const bool is_intercept = k == npos;
  const std::vector<double>* x = is_intercept ? nullptr : &(*prob.cols)[k];
  const double inv_n = 1.0 / static_cast<double>(prob.n());
  double g = 0.0;
  double h = 0.0;
  double xx = 0.0;
  for (std::size_t r = 0; r < prob.n(); ++r) {
    const double xr = x ? (*x)[r] : 1.0;
    const double pr = sigmoid(s.eta[r]);
    g += xr * (pr - prob.y[r]);
    h += xr * xr * pr * (1.0 - pr);
    xx += xr * xr;
  }
  g *= inv_n;
  h *= inv_n;
  const double bound = 0.25 * xx * inv_n;
  if (bound == 0.0) return;

  const double penalty = is_intercept ? 0.0 : lambda;
  const double current = is_intercept ? s.intercept : s.beta[k];
  auto step_with = [&](double curvature) {
    return soft_threshold(curvature * current - g, penalty) / curvature;
  };
  const double old_obj = s.loss + penalty * std::abs(current);

  if (h > 1e-10 * bound) {
    const double next = step_with(h);
    const double delta = next - current;
    if (delta == 0.0) return;
    const double loss = detail::trial_loss(prob, s, x, delta);
    if (loss + penalty * std::abs(next) <= old_obj) {
      detail::apply(prob, s, x, delta, loss);
      (is_intercept ? s.intercept : s.beta[k]) = next;
      return;
    }
  }
  const double next = step_with(bound);
  const double delta = next - current;
  if (delta == 0.0) return;
  const double loss = detail::trial_loss(prob, s, x, delta);
  if (loss + penalty * std::abs(next) <= old_obj) {
    detail::apply(prob, s, x, delta, loss);
    (is_intercept ? s.intercept : s.beta[k]) = next;
  }
}

/// Cyclic coordinate descent at one lambda, warm-started from `s`. Each pass
/// updates the intercept and every active or KKT-violating coordinate, then
/// rechecks the optimality conditions. `on_sweep` (optional) receives the
/// penalized objective after every pass. Returns false if `max_updates`
/// coordinate updates were not enough.
inline bool solve(const Problem& prob, State& s, double lambda, double tolerance, std::size_t max_updates,
                  const std::function<void(double)>& on_sweep = {}) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t updates = 0;
  std::vector<std::size_t> working;
  for (;;) {
    const auto g = nll_gradient(prob, s.beta, s.intercept);
    double worst = std::abs(g[0]);
    working.clear();
    for (std::size_t k = 0; k < prob.p(); ++k) {
      if (!prob.usable[k]) continue;
      const double score = -g[k + 1];
      double r;
      if (s.beta[k] == 0.0) {
        r = std::max(0.0, std::abs(score) - lambda);
        if (r > 0.0) working.push_back(k);
      } else {
        r = std::abs(score - lambda * (s.beta[k] > 0.0 ? 1.0 : -1.0));
        working.push_back(k);
      }
      worst = std::max(worst, r);
    }
    if (worst <= tolerance) return true;
    if (updates >= max_updates) return false;
    update_coordinate(prob, s, npos, lambda);
    ++updates;
    for (std::size_t k : working) {
      update_coordinate(prob, s, k, lambda);
      ++updates;
    }
    if (on_sweep) {
      double l1 = 0.0;
      for (double b : s.beta) l1 += std::abs(b);
      on_sweep(s.loss + lambda * l1);
    }
  }
}

}  // namespace logistic

namespace detail {

inline std::vector<double> class_indicator(const Labels& y, int klass) {
  std::vector<double> out(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) out[r] = y[r] == klass ? 1.0 : 0.0;
  return out;
}

inline void check_labels(const Matrix& x, const Labels& y) {
  if (x.rows() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two rows");
  if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "row and label counts differ");
  for (int label : y) {
    if (label < 1) throw Error(ErrorCode::InvalidArgument, "labels must be coded 1..J");
  }
  if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
    throw Error(ErrorCode::DegenerateLabels, "all labels are equal");
  }
}

}  // namespace detail

/// Largest |x_k . (y_j - ybar_j)| / n over classes j and standardized features k.
inline double lambda_max(const Matrix& x, const Labels& y) {
  detail::check_labels(x, y);
  const auto cols = Standardization::fit(x).columns(x);
  const double n = static_cast<double>(x.rows());
  double best = 0.0;
  for (int j = 1; j <= label_count(y); ++j) {
    const auto yj = detail::class_indicator(y, j);
    double ybar = 0.0;
    for (double v : yj) ybar += v;
    ybar /= n;
    if (ybar == 0.0 || ybar == 1.0) continue;
    for (const auto& col : cols) {
      double s = 0.0;
      for (std::size_t r = 0; r < col.size(); ++r) s += col[r] * (yj[r] - ybar);
      best = std::max(best, std::abs(s) / n);
    }
  }
  return best;
}

/// Geometric grid from lambda_max down to eps_ratio * lambda_max.
inline LambdaGrid make_lambda_grid(const Matrix& x, const Labels& y, std::size_t n_lambda = 100,
                                   double eps_ratio = 1e-3) {
  if (n_lambda < 1) throw Error(ErrorCode::InvalidArgument, "n_lambda must be positive");
  if (!(eps_ratio > 0.0 && eps_ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps_ratio must be in (0,1)");
  const double top = lambda_max(x, y);
  if (!(top > 0.0)) throw Error(ErrorCode::DegenerateLabels, "no feature is correlated with the labels");
  LambdaGrid grid;
  grid.lambdas.resize(n_lambda);
  for (std::size_t i = 0; i < n_lambda; ++i) {
    const double t = n_lambda == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_lambda - 1);
    grid.lambdas[i] = top * std::pow(eps_ratio, t);
  }
  grid.lambdas[0] = top;
  return grid;
}

/// One-vs-rest L1 logistic regression over the whole grid, each class solved
/// by warm-started coordinate descent. The first step is the intercept-only
/// model. Classes absent from `y` get an intercept of -infinity.
inline PathCoefficients fit_l1_logistic_path(const Matrix& x, const Labels& y, const LambdaGrid& grid,
                                             const LassoSettings& settings = {}) {
  detail::check_labels(x, y);
  if (grid.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty lambda grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] < grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "lambda grid must strictly decrease");
  }
  auto standardization = Standardization::fit(x);
  const auto cols = standardization.columns(x);
  const int n_classes = label_count(y);
  PathCoefficients path(n_classes, x.cols(), grid, standardization);
  const double inner_tol = settings.kkt_tol / 10.0;

  for (int j = 1; j <= n_classes; ++j) {
    const auto yj = detail::class_indicator(y, j);
    logistic::Problem prob{&cols, yj, {}};
    prob.usable.resize(x.cols());
    for (std::size_t k = 0; k < x.cols(); ++k) prob.usable[k] = standardization.scale[k] > 0.0 ? 1 : 0;
    double positives = 0.0;
    for (double v : yj) positives += v;
    if (positives == 0.0) {
      for (std::size_t step = 1; step <= grid.size(); ++step) {
        path.standardized_intercept(j, step) = -std::numeric_limits<double>::infinity();
      }
      continue;
    }
    logistic::State state = logistic::initial_state(prob);
    // Intercept-only fit at lambda_max.
    if (!logistic::solve(prob, state, std::numeric_limits<double>::infinity(), inner_tol, settings.max_iters)) {
      throw ConvergenceFailure(j, 1, "intercept-only fit did not converge");
    }
    for (std::size_t step = 1; step <= grid.size(); ++step) {
      if (step > 1 && !logistic::solve(prob, state, grid[step - 1], inner_tol, settings.max_iters)) {
        throw ConvergenceFailure(j, step, "no convergence within " + std::to_string(settings.max_iters) +
                                              " coordinate updates");
      }
      const double lam = step == 1 ? std::numeric_limits<double>::infinity() : grid[step - 1];
      if (step > 1 && logistic::kkt_residual(prob, state.beta, state.intercept, lam) > settings.kkt_tol) {
        throw ConvergenceFailure(j, step, "KKT residual above tolerance");
      }
      for (std::size_t k = 0; k < x.cols(); ++k) {
        path.standardized_coefficient(j, static_cast<int>(k + 1), step) = state.beta[k];
      }
      path.standardized_intercept(j, step) = state.intercept;
    }
  }
  return path;
}

/// Union over classes of the variables with a nonzero coefficient at `step`.
inline VariableSet active_variables(const PathCoefficients& path, std::size_t step, double zero_tol = 1e-8) {
  if (step < 1 || step > path.steps()) throw Error(ErrorCode::InvalidArgument, "step outside the path");
  std::vector<int> used;
  for (std::size_t i = 1; i <= path.n_features(); ++i) {
    for (int j = 1; j <= path.n_classes(); ++j) {
      if (std::abs(path.standardized_coefficient(j, static_cast<int>(i), step)) > zero_tol) {
        used.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  return VariableSet(std::move(used));
}

/// Class with the largest linear score; ties go to the smaller label.
inline int predict_logistic(const PathCoefficients& path, std::size_t step, std::span<const double> x) {
  if (x.size() != path.n_features()) throw Error(ErrorCode::DimensionMismatch, "feature count differs from path");
  if (step < 1 || step > path.steps()) throw Error(ErrorCode::InvalidArgument, "step outside the path");
  int best = 1;
  double best_score = path.score(1, step, x);
  for (int j = 2; j <= path.n_classes(); ++j) {
    const double s = path.score(j, step, x);
    if (s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

inline double path_accuracy(const PathCoefficients& path, std::size_t step, const Matrix& x, const Labels& y) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyEvaluationSet, "no rows to evaluate");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (predict_logistic(path, step, x.row(r)) == y[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

/// KKT residual of one (class, step) slice, recomputed on the standardized data.
inline double slice_kkt_residual(const PathCoefficients& path, const Matrix& x, const Labels& y, int klass,
                                 std::size_t step) {
  const auto cols = path.standardization().columns(x);
  const auto yj = detail::class_indicator(y, klass);
  logistic::Problem prob{&cols, yj, {}};
  prob.usable.resize(x.cols());
  for (std::size_t k = 0; k < x.cols(); ++k) prob.usable[k] = path.standardization().scale[k] > 0.0 ? 1 : 0;
  std::vector<double> beta(x.cols());
  for (std::size_t k = 0; k < x.cols(); ++k) beta[k] = path.standardized_coefficient(klass, static_cast<int>(k + 1), step);
  return logistic::kkt_residual(prob, beta, path.standardized_intercept(klass, step), path.lambda(step));
}

/// Columns: step, lambda, class, variable, coefficient (original scale).
inline void write_path_dump(std::ostream& out, const PathCoefficients& path) {
  out << "step,lambda,class,variable,coefficient\n";
  out.precision(17);
  for (std::size_t step = 1; step <= path.steps(); ++step) {
    for (int j = 1; j <= path.n_classes(); ++j) {
      for (std::size_t i = 1; i <= path.n_features(); ++i) {
        out << step << ',' << path.lambda(step) << ',' << j << ',' << i << ','
            << path.coefficient(j, static_cast<int>(i), step) << '\n';
      }
    }
  }
}

}  // namespace costsel
