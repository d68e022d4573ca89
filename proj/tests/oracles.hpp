// Independent reference computations for the test suite. Nothing here calls into
// the library: each oracle is a brute-force or closed-form evaluation.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
inline constexpr double inf = std::numeric_limits<double>::infinity();

inline double dist_interval(double y, double lo, double hi) {
  if (y < lo) return lo - y;
  if (y > hi) return y - hi;
  return 0.0;
}

/// min of f over n+1 equispaced points of [lo, hi].
inline double grid_min(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  double best = inf;
  for (std::size_t i = 0; i <= n; ++i) best = std::min(best, f(lo + (hi - lo) * double(i) / double(n)));
  return best;
}

inline double grid_max(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  return -grid_min([&](double t) { return -f(t); }, lo, hi, n);
}

/// min over the unit circle of f(cos t, sin t) on n angles.
inline double circle_min(const std::function<double(double, double)>& f, std::size_t n) {
  double best = inf;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * double(i) / double(n);
    best = std::min(best, f(std::cos(t), std::sin(t)));
  }
  return best;
}

/// Root of a sign-changing continuous f on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm <= 0) == (fa <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Solves M x = b by Gaussian elimination with partial pivoting.
inline Vec solve(Mat m, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

/// Smallest singular value of a square nonsingular matrix by inverse iteration on A^T A.
inline double sigma_min(const Mat& a) {
  const std::size_t n = a.size();
  Mat ata(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) ata[i][j] += a[k][i] * a[k][j];
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * double(i);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vec w = solve(ata, v);
    double nw = 0.0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    for (auto& x : w) x /= nw;
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rq += w[i] * ata[i][j] * w[j];
    v = w;
    if (std::abs(rq - lambda) <= 1e-16 * rq) break;
    lambda = rq;
  }
  double rq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rq += v[i] * ata[i][j] * v[j];
  return std::sqrt(rq);
}

/// Inradius at the origin of conv(points) in R^2 under l2: the smallest distance from
/// the origin to an edge line of the hull, 0 when the origin is not interior.
inline double inradius_2d(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return 0.0;
  double r = inf;
  const Vec origin = {0.0, 0.0};
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec& a = hull[i];
    const Vec& b = hull[(i + 1) % hull.size()];
    const double c = cross(a, b, origin);  // > 0 when the origin is strictly left of a->b
    if (c <= 0) return 0.0;
    r = std::min(r, c / std::hypot(b[0] - a[0], b[1] - a[1]));
  }
  return r;
}

/// min over unit directions u of max_i <a_i, u>: the steepest descent rate at 0 of
/// x -> max_i <a_i, x>.
inline double max_linear_descent(const std::vector<Vec>& slopes, std::size_t n = 20000) {
  const auto h = [&](double t) {
    double m = -inf;
    for (const auto& a : slopes) m = std::max(m, a[0] * std::cos(t) + a[1] * std::sin(t));
    return m;
  };
  // coarse angular grid, then ternary search on the bracketing cell where h is a max of near-linear pieces
  const double step = 2.0 * std::numbers::pi / double(n);
  double best_t = 0, best = inf;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = step * double(i);
    if (h(t) < best) best = h(t), best_t = t;
  }
  double lo = best_t - step, hi = best_t + step;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (h(m1) < h(m2))
      hi = m2;
    else
      lo = m1;
  }
  return std::min(best, h(0.5 * (lo + hi)));
}

}  // namespace oracle
