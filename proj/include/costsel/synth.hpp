#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/matrix.hpp"
#include "costsel/random.hpp"

namespace costsel {

/// Labeled feature matrix.
struct Dataset {
  Matrix x;
  Labels y;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // class_names[j-1] names label j

  std::size_t rows() const noexcept { return x.rows(); }
  std::size_t features() const noexcept { return x.cols(); }
};

inline constexpr std::size_t kMixtureDim = 8;
inline constexpr std::size_t kMixtureComponents = 4;

/// Four-component Gaussian mixture in eight dimensions with equal weights and
/// AR(1)-style covariance rho^|i-j|.
struct MixtureSpec {
  double rho = 0.3;
  std::size_t n = 50'000;
  std::uint64_t seed = 1;
};

/// mu1 = (2.0, 1.8, ..., 0.6); mu2 flips the second half of mu1, mu3 the first half, mu4 = -mu1.
inline std::array<std::array<double, kMixtureDim>, kMixtureComponents> mixture_means() {
  std::array<std::array<double, kMixtureDim>, kMixtureComponents> mu{};
  for (std::size_t i = 0; i < kMixtureDim; ++i) {
    const double v = (20.0 - 2.0 * static_cast<double>(i)) / 10.0;
    const bool first_half = i < kMixtureDim / 2;
    mu[0][i] = v;
    mu[1][i] = first_half ? v : -v;
    mu[2][i] = first_half ? -v : v;
    mu[3][i] = -v;
  }
  return mu;
}

inline Matrix mixture_covariance(double rho) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::InvalidCorrelation, "need |rho| < 1");
  Matrix sigma(kMixtureDim, kMixtureDim);
  for (std::size_t i = 0; i < kMixtureDim; ++i) {
    for (std::size_t j = 0; j < kMixtureDim; ++j) {
      const auto lag = static_cast<int>(i > j ? i - j : j - i);
      sigma(i, j) = lag == 0 ? 1.0 : std::pow(rho, lag);
    }
  }
  return sigma;
}

/// Lower-triangular L with L L^T = a.
inline Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw Error(ErrorCode::InvalidCorrelation, "covariance is not positive definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

/// Rows draw a component uniformly, then mean + L z with z standard normal.
/// The component index (1..4) is the label.
inline Dataset sample_mixture(const MixtureSpec& spec) {
  const Matrix factor = cholesky(mixture_covariance(spec.rho));
  const auto mu = mixture_means();
  Rng rng(spec.seed);
  Dataset data;
  data.x = Matrix(spec.n, kMixtureDim);
  data.y.resize(spec.n);
  std::array<double, kMixtureDim> z{};
  for (std::size_t r = 0; r < spec.n; ++r) {
    const auto component = static_cast<std::size_t>(rng.below(kMixtureComponents));
    for (auto& v : z) v = rng.normal();
    for (std::size_t i = 0; i < kMixtureDim; ++i) {
      double v = mu[component][i];
      for (std::size_t k = 0; k <= i; ++k) v += factor(i, k) * z[k];
      data.x(r, i) = v;
    }
    data.y[r] = static_cast<int>(component) + 1;
  }
  for (std::size_t i = 0; i < kMixtureDim; ++i) data.feature_names.push_back("x" + std::to_string(i + 1));
  for (std::size_t c = 0; c < kMixtureComponents; ++c) data.class_names.push_back(std::to_string(c + 1));
  return data;
}

/// p independent uniform draws on [lo, hi], rounded to cents.
inline CostProfile sample_cost_profile(std::size_t p, double lo, double hi, std::uint64_t seed) {
  if (!(lo > 0.0) || !(lo < hi)) throw Error(ErrorCode::InvalidArgument, "need 0 < lo < hi");
  Rng rng(seed);
  std::vector<Cost> costs;
  costs.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    Cost c = Cost::from_double(rng.uniform(lo, hi));
    if (c.cents() <= 0) c = Cost::from_cents(1);
    costs.push_back(c);
  }
  return CostProfile(std::move(costs));
}

/// The fixed eight-variable profile used with the mixture benchmark.
inline CostProfile mixture_reference_profile() {
  return CostProfile::from_values({92, 81, 45, 23, 23, 33, 72, 5});
}

}  // namespace costsel
