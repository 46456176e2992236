#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "costsel/lasso_path.hpp"
#include "costsel/synth.hpp"

using namespace costsel;

namespace {

struct Binary {
  Matrix x;
  Labels y;
};

// Overlapping two-class data: label 2 when a noisy linear score is positive.
Binary random_binary(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Binary b{Matrix(n, p), Labels(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      b.x(i, k) = g(rng) * (1.0 + static_cast<double>(k)) + static_cast<double>(k);
      s += (k % 2 ? -0.7 : 0.9) * (b.x(i, k) - static_cast<double>(k)) / (1.0 + static_cast<double>(k));
    }
    b.y[i] = s + 1.5 * g(rng) > 0.0 ? 2 : 1;
  }
  b.y[0] = 1;
  b.y[1] = 2;
  return b;
}

struct Standardized {
  std::vector<std::vector<double>> cols;
  std::vector<double> y;
  logistic::Problem prob;
};

Standardized problem_for(const Binary& b) {
  Standardized s;
  s.cols = Standardization::fit(b.x).columns(b.x);
  s.y = detail::class_indicator(b.y, 2);
  s.prob = logistic::Problem{&s.cols, s.y, std::vector<char>(b.x.cols(), 1)};
  return s;
}

// Projected gradient on the split beta = u - v with u, v >= 0 (intercept free).
double projected_gradient_objective(const logistic::Problem& prob, double lambda, std::size_t iters) {
  const std::size_t p = prob.p();
  std::vector<double> u(p, 0.0), v(p, 0.0), beta(p, 0.0);
  double b0 = 0.0;
  // Lipschitz bound of the mean logistic loss on standardized columns plus intercept.
  const double step = 1.0 / (0.25 * (1.0 + static_cast<double>(p)));
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t k = 0; k < p; ++k) beta[k] = u[k] - v[k];
    const auto g = logistic::nll_gradient(prob, beta, b0);
    b0 -= step * g[0];
    for (std::size_t k = 0; k < p; ++k) {
      u[k] = std::max(0.0, u[k] - step * (g[k + 1] + lambda));
      v[k] = std::max(0.0, v[k] - step * (-g[k + 1] + lambda));
    }
  }
  for (std::size_t k = 0; k < p; ++k) beta[k] = u[k] - v[k];
  return logistic::penalized_objective(prob, beta, b0, lambda);
}

}  // namespace

TEST(SoftThreshold, Values) {
  EXPECT_DOUBLE_EQ(logistic::soft_threshold(3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(logistic::soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_DOUBLE_EQ(logistic::soft_threshold(0.5, 1.0), 0.0);
}

TEST(LambdaGrid, GeometricAndDecreasing) {
  const auto b = random_binary(80, 4, 1);
  const auto grid = make_lambda_grid(b.x, b.y, 10, 1e-2);
  ASSERT_EQ(grid.size(), 10u);
  EXPECT_DOUBLE_EQ(grid[0], lambda_max(b.x, b.y));
  EXPECT_NEAR(grid[9], 1e-2 * grid[0], 1e-15);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_LT(grid[i], grid[i - 1]);
    EXPECT_NEAR(grid[i] / grid[i - 1], std::pow(1e-2, 1.0 / 9.0), 1e-12);
  }
  const auto single = make_lambda_grid(b.x, b.y, 1);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_DOUBLE_EQ(single[0], grid[0]);
}

TEST(LambdaGrid, ConstantLabelsRejected) {
  Matrix x(3, 2, {1, 2, 3, 4, 5, 6});
  try {
    make_lambda_grid(x, {1, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
  }
}

TEST(LambdaMax, SingleFeatureKktAtZero) {
  // One standardized feature, binary labels: lambda_max = |x . (y - ybar)| / n.
  const std::vector<double> raw{0.3, -1.2, 2.5, 0.7, -0.4, 1.1, -2.0, 0.9};
  const Labels y{1, 1, 2, 2, 1, 2, 1, 2};
  const double n = static_cast<double>(raw.size());
  double mean = 0.0;
  for (double v : raw) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : raw) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  double ybar = 0.0;
  for (int l : y) ybar += l == 2 ? 1.0 : 0.0;
  ybar /= n;
  double dot = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) dot += (raw[i] - mean) / sd * ((y[i] == 2 ? 1.0 : 0.0) - ybar);
  const double expected = std::abs(dot) / n;

  // A second, constant column never enters and does not change lambda_max.
  Matrix x(raw.size(), 2);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    x(i, 0) = raw[i];
    x(i, 1) = 4.0;
  }
  EXPECT_NEAR(lambda_max(x, y), expected, 1e-14);

  // Direct subgradient check: at beta = 0 with the optimal intercept the
  // gradient magnitude is exactly lambda_max.
  Binary b{x, y};
  auto s = problem_for(b);
  const auto state = logistic::initial_state(s.prob);
  const auto g = logistic::nll_gradient(s.prob, state.beta, state.intercept);
  EXPECT_NEAR(std::abs(g[1]), expected, 1e-12);
  EXPECT_NEAR(g[0], 0.0, 1e-12);
}

TEST(Path, FirstStepIsEmptyAndBelowItNot) {
  const auto b = random_binary(100, 5, 2);
  const auto grid = make_lambda_grid(b.x, b.y, 20);
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  EXPECT_TRUE(active_variables(path, 1).empty());
  for (int j = 1; j <= 2; ++j) {
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(path.standardized_coefficient(j, k, 1), 0.0);
  }
  EXPECT_FALSE(active_variables(path, 20).empty());
}

TEST(Path, AnyLambdaAboveMaxIsEmpty) {
  const auto b = random_binary(60, 3, 3);
  const double top = lambda_max(b.x, b.y);
  LambdaGrid grid{{top * 4, top * 2, top * 1.0000001}};
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  for (std::size_t step = 1; step <= 3; ++step) EXPECT_TRUE(active_variables(path, step).empty());
}

TEST(Coordinate, NewtonStepIsSoftThreshold) {
  // Six points, one feature, ybar = 1/2, so every weight is 1/4.
  // g = sum x (ybar - y) / n = -5/12, h = mean(x^2) / 4 = 7/16,
  // beta = S(5/12, lambda) / (7/16).
  const std::vector<std::vector<double>> cols{{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}};
  const std::vector<double> y{0, 0, 1, 0, 1, 1};
  logistic::Problem prob{&cols, y, {1}};

  auto s = logistic::initial_state(prob);
  EXPECT_DOUBLE_EQ(s.intercept, 0.0);
  logistic::update_coordinate(prob, s, 0, 0.1);
  EXPECT_NEAR(s.beta[0], 76.0 / 105.0, 1e-15);

  auto t = logistic::initial_state(prob);
  logistic::update_coordinate(prob, t, 0, 0.5);
  EXPECT_EQ(t.beta[0], 0.0);
}

TEST(Gradient, MatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = random_binary(30, 5, 100 + seed);
    auto s = problem_for(b);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.5);
    std::vector<double> beta(5);
    for (auto& v : beta) v = g(rng);
    const double b0 = g(rng);
    const auto analytic = logistic::nll_gradient(s.prob, beta, b0);
    std::vector<double> numeric(6);
    const double h = 1e-5;
    numeric[0] = (logistic::nll(s.prob, beta, b0 + h) - logistic::nll(s.prob, beta, b0 - h)) / (2 * h);
    for (std::size_t k = 0; k < 5; ++k) {
      auto up = beta, down = beta;
      up[k] += h;
      down[k] -= h;
      numeric[k + 1] = (logistic::nll(s.prob, up, b0) - logistic::nll(s.prob, down, b0)) / (2 * h);
    }
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      norm += analytic[k] * analytic[k];
    }
    EXPECT_LE(std::sqrt(diff / norm), 1e-5) << "seed " << seed;
  }
}

TEST(Solver, AgreesWithProjectedGradient) {
  const auto b = random_binary(50, 5, 7);
  auto s = problem_for(b);
  const double top = lambda_max(b.x, b.y);
  LambdaGrid grid{{top, 0.5 * top, 0.1 * top, 0.02 * top}};
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  for (std::size_t step = 2; step <= 4; ++step) {
    std::vector<double> beta(5);
    for (int k = 1; k <= 5; ++k) beta[static_cast<std::size_t>(k - 1)] = path.standardized_coefficient(2, k, step);
    const double ours = logistic::penalized_objective(s.prob, beta, path.standardized_intercept(2, step), grid[step - 1]);
    const double oracle = projected_gradient_objective(s.prob, grid[step - 1], 100'000);
    EXPECT_NEAR(ours, oracle, 1e-4) << "step " << step;
    EXPECT_LE(ours, oracle + 1e-9) << "step " << step;

    // Predictions of the two solutions on the training rows.
    std::size_t agree = 0;
    for (std::size_t r = 0; r < b.x.rows(); ++r) {
      const double score = path.score(2, step, b.x.row(r));
      double std_score = path.standardized_intercept(2, step);
      for (std::size_t k = 0; k < 5; ++k) std_score += beta[k] * s.cols[k][r];
      agree += (score > 0) == (std_score > 0);
    }
    EXPECT_GE(agree, 50u);
  }
}

TEST(Solver, SweepsNeverIncreaseObjective) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto b = random_binary(120, 6, 40 + seed);
    auto s = problem_for(b);
    const double lambda = 0.05 * lambda_max(b.x, b.y);
    auto state = logistic::initial_state(s.prob);
    double prev = state.loss;
    bool monotone = true;
    const bool ok = logistic::solve(s.prob, state, lambda, 1e-8, 1'000'000, [&](double obj) {
      if (obj > prev + 1e-12) monotone = false;
      prev = obj;
    });
    EXPECT_TRUE(ok);
    EXPECT_TRUE(monotone) << "seed " << seed;
  }
}

TEST(Solver, WarmAndColdStartsAgree) {
  const auto b = random_binary(150, 6, 9);
  auto s = problem_for(b);
  const auto grid = make_lambda_grid(b.x, b.y, 30);
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  for (std::size_t step : {5u, 15u, 30u}) {
    const double lambda = grid[step - 1];
    auto cold = logistic::initial_state(s.prob);
    ASSERT_TRUE(logistic::solve(s.prob, cold, lambda, 1e-5, 1'000'000));
    std::vector<double> warm(6);
    for (int k = 1; k <= 6; ++k) warm[static_cast<std::size_t>(k - 1)] = path.standardized_coefficient(2, k, step);
    const double a = logistic::penalized_objective(s.prob, warm, path.standardized_intercept(2, step), lambda);
    const double c = logistic::penalized_objective(s.prob, cold.beta, cold.intercept, lambda);
    EXPECT_NEAR(a, c, 1e-4);
  }
}

TEST(Path, EverySliceSatisfiesKkt) {
  const auto d = sample_mixture({0.3, 1500, 4});
  const auto grid = make_lambda_grid(d.x, d.y, 40);
  const auto path = fit_l1_logistic_path(d.x, d.y, grid);
  for (int j = 1; j <= 4; ++j) {
    for (std::size_t step = 1; step <= path.steps(); ++step) {
      EXPECT_LE(slice_kkt_residual(path, d.x, d.y, j, step), 1e-4) << "class " << j << " step " << step;
    }
  }
}

TEST(Path, ConvergenceFailureNamesTheSlice) {
  const auto b = random_binary(100, 5, 12);
  const auto grid = make_lambda_grid(b.x, b.y, 10);
  LassoSettings tight;
  tight.max_iters = 1;
  try {
    fit_l1_logistic_path(b.x, b.y, grid, tight);
    FAIL();
  } catch (const ConvergenceFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConvergenceFailure);
    EXPECT_EQ(e.klass(), 1);
    EXPECT_GE(e.lambda_step(), 2u);
  }
}

TEST(Path, OriginalScaleScoreMatchesStandardized) {
  const auto b = random_binary(80, 3, 13);
  const auto grid = make_lambda_grid(b.x, b.y, 15);
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  const auto cols = path.standardization().columns(b.x);
  for (std::size_t r = 0; r < 10; ++r) {
    double direct = path.intercept(2, 15);
    double standardized = path.standardized_intercept(2, 15);
    for (int k = 1; k <= 3; ++k) {
      direct += path.coefficient(2, k, 15) * b.x(r, static_cast<std::size_t>(k - 1));
      standardized += path.standardized_coefficient(2, k, 15) * cols[static_cast<std::size_t>(k - 1)][r];
    }
    EXPECT_NEAR(direct, standardized, 1e-9);
    EXPECT_NEAR(path.score(2, 15, b.x.row(r)), standardized, 1e-9);
  }
}

TEST(Path, CoefficientsShrinkTowardZeroAsLambdaGrows) {
  const auto b = random_binary(200, 5, 14);
  const auto grid = make_lambda_grid(b.x, b.y, 25);
  const auto path = fit_l1_logistic_path(b.x, b.y, grid);
  auto l1 = [&](std::size_t step) {
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) s += std::abs(path.standardized_coefficient(2, k, step));
    return s;
  };
  for (std::size_t step = 2; step <= 25; ++step) EXPECT_GE(l1(step) + 1e-9, l1(step - 1));
}

TEST(ActiveVariables, UnionOverClasses) {
  LambdaGrid grid{{1.0}};
  Standardization st{std::vector<double>(7, 0.0), std::vector<double>(7, 1.0)};
  PathCoefficients path(2, 7, grid, st);
  path.standardized_coefficient(1, 1, 1) = 0.3;
  path.standardized_coefficient(1, 3, 1) = -0.1;
  path.standardized_coefficient(2, 3, 1) = 0.2;
  path.standardized_coefficient(2, 7, 1) = 1.0;
  path.standardized_coefficient(2, 5, 1) = 1e-9;  // below zero_tol
  EXPECT_EQ(active_variables(path, 1), VariableSet({1, 3, 7}));
}

TEST(ActiveVariables, LastStepUsuallyContainsEarlierSets) {
  int nested = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto d = sample_mixture({0.3, 1000, seed});
    const auto grid = make_lambda_grid(d.x, d.y, 30);
    const auto path = fit_l1_logistic_path(d.x, d.y, grid);
    const auto last = active_variables(path, path.steps());
    bool ok = true;
    for (std::size_t step = 1; step < path.steps(); ++step) ok = ok && active_variables(path, step).is_subset_of(last);
    nested += ok;
  }
  EXPECT_GE(nested, 9);
}

TEST(PredictLogistic, TiesGoToLabelOne) {
  LambdaGrid grid{{1.0}};
  Standardization st{{0.0, 0.0}, {1.0, 1.0}};
  PathCoefficients path(3, 2, grid, st);
  EXPECT_EQ(predict_logistic(path, 1, std::vector<double>{0.5, -2.0}), 1);
  path.standardized_intercept(2, 1) = 0.1;
  EXPECT_EQ(predict_logistic(path, 1, std::vector<double>{0.5, -2.0}), 2);
  EXPECT_THROW(predict_logistic(path, 1, std::vector<double>{0.5}), Error);
}

TEST(PredictLogistic, BinaryThreshold) {
  // With class 1 pinned at score 0, class 2 wins exactly when sigmoid(score) > 1/2.
  LambdaGrid grid{{1.0}};
  Standardization st{{0.0}, {1.0}};
  PathCoefficients path(2, 1, grid, st);
  path.standardized_coefficient(2, 1, 1) = 2.0;
  for (double x : {-1.0, -0.01, 0.0, 0.01, 1.0}) {
    const double score = path.score(2, 1, std::vector<double>{x});
    EXPECT_EQ(predict_logistic(path, 1, std::vector<double>{x}), logistic::sigmoid(score) > 0.5 ? 2 : 1);
  }
}
