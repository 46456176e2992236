#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "costsel/error.hpp"

namespace costsel {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

inline constexpr double kDefaultSpan = 2.0 / 3.0;
inline constexpr std::size_t kCurveGridSize = 100;

namespace detail {

inline double tricube(double u) {
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

}  // namespace detail

/// Locally weighted linear fit at x0 (a single non-robust lowess pass).
/// The neighbourhood holds the floor(span * n) nearest points (at least 2);
/// weights are tricube in distance over the distance to the farthest of them.
inline double lowess_at(std::span<const double> xs, std::span<const double> ys, double x0,
                        double span = kDefaultSpan) {
  const std::size_t n = xs.size();
  if (n == 0 || ys.size() != n) throw Error(ErrorCode::DimensionMismatch, "lowess needs matching, non-empty inputs");
  const std::size_t k = std::max<std::size_t>(
      2, std::min<std::size_t>(n, static_cast<std::size_t>(span * static_cast<double>(n) + 1e-7)));
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(xs[i] - x0);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  const double h = sorted[k - 1];

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = h > 0.0 ? detail::tricube(dist[i] / h) : (dist[i] == 0.0 ? 1.0 : 0.0);
    sw += w;
    sx += w * xs[i];
    sy += w * ys[i];
  }
  if (!(sw > 0.0)) {
    // Only the boundary point carries the neighbourhood; fall back to it.
    double best = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= h) {
        best += ys[i];
        ++count;
      }
    }
    return best / static_cast<double>(count);
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = h > 0.0 ? detail::tricube(dist[i] / h) : (dist[i] == 0.0 ? 1.0 : 0.0);
    sxx += w * (xs[i] - mx) * (xs[i] - mx);
    sxy += w * (xs[i] - mx) * (ys[i] - my);
  }
  const double range = h > 0.0 ? h : 1.0;
  if (sxx <= 1e-12 * range * range * sw) return my;
  return my + (sxy / sxx) * (x0 - mx);
}

/// The "average schedule": lowess evaluated on a uniform grid spanning the observed x range.
inline std::vector<CurvePoint> smooth_schedule(std::span<const CurvePoint> points, double span = kDefaultSpan,
                                               std::size_t grid_size = kCurveGridSize) {
  if (points.size() < 5) throw Error(ErrorCode::TooFewPoints, "smoothing needs at least 5 points");
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  double lo = points[0].x, hi = points[0].x;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  std::vector<CurvePoint> curve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = grid_size == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double x = i + 1 == grid_size ? hi : lo + (hi - lo) * t;
    curve[i] = {x, lowess_at(xs, ys, x, span)};
  }
  return curve;
}

}  // namespace costsel
