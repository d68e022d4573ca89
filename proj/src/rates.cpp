#include "subreg/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "subreg/error.hpp"

namespace subreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGolden = 0.6180339887498949;

std::string point_string(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s + ")";
}

}  // namespace

void SamplingSchedule::validate() const {
  if (!(r0 > 0.0)) throw Error("schedule: r0 must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw Error("schedule: decay must lie in (0,1)");
  if (shells < 3) throw Error("schedule: at least 3 shells are required");
  if (points < 8) throw Error("schedule: at least 8 points per shell are required");
  if (!(radius(shells) > 1e-12)) throw Error("schedule: r0*decay^K must stay above 1e-12");
}

double SamplingSchedule::radius(std::size_t k) const { return r0 * std::pow(decay, static_cast<double>(k)); }

std::string to_string(Bias b) {
  return b == Bias::OverEstimatesLiminf ? "over-estimates-liminf" : "under-estimates-limsup";
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SUBREG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Vec> shell_points(std::span<const double> xbar, const Norm& norm, const SamplingSchedule& s,
                              std::size_t k) {
  const std::size_t dim = xbar.size();
  const double outer = s.radius(k);
  const double inner = s.radius(k + 1);
  const double span_log = std::log(outer / inner);
  // u in [u0, 1] maps to t = inner * exp(u * span_log); u0 sits just above the inner boundary
  const double u0 = std::log1p(1e-9) / span_log;
  auto radius_at = [&](double u) { return u >= 1.0 ? outer : inner * std::exp(u * span_log); };

  const std::vector<Vec> dirs = unit_sphere_samples(dim, norm, s.points, derive_seed(s.seed, k));
  std::vector<Vec> pts;
  pts.reserve(dirs.size());
  const std::size_t pairs = (s.points + 1) / 2;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double u;
    if (dim == 1) {
      const std::size_t j = i / 2;
      u = pairs > 1 ? u0 + (1.0 - u0) * static_cast<double>(j) / static_cast<double>(pairs - 1) : 1.0;
    } else if (i == 0) {
      u = 1.0;
    } else if (i == 1) {
      u = u0;
    } else {
      double f = static_cast<double>(i) * kGolden;
      f -= std::floor(f);
      u = u0 + (1.0 - u0) * f;
    }
    pts.push_back(axpy(radius_at(u), dirs[i], xbar));
  }
  return pts;
}

RateEstimate shell_scan(std::span<const double> xbar, const Norm& norm, const SamplingSchedule& s,
                        const RatioFn& ratio, Bias bias, const RateOptions& opt) {
  s.validate();
  const std::size_t K = s.shells;
  RateEstimate est;
  est.bias = bias;
  for (std::size_t k = 0; k <= K; ++k) est.radii.push_back(s.radius(k));
  est.shell_min.assign(K, kNaN);
  est.shell_max.assign(K, kNaN);
  est.min_witnesses.resize(K);
  est.max_witnesses.resize(K);
  std::vector<std::string> skip_msg(K);
  std::vector<std::size_t> evals(K, 0);

  parallel_for(K, [&](std::size_t k) {
    const std::vector<Vec> pts = shell_points(xbar, norm, s, k);
    double lo = kInf, hi = -kInf;
    Witness wlo, whi;
    for (const Vec& x : pts) {
      const double d = norm.distance(x, xbar);
      if (!(d > 0.0)) continue;
      double r;
      try {
        r = ratio(x, d);
      } catch (const EvalError& e) {
        const std::string msg = "shell " + std::to_string(k) + ": " + e.what() + " at x=" + point_string(x);
        if (opt.skip_eval_errors) {
          skip_msg[k] = msg;
          return;
        }
        throw EvalError(msg);
      }
      ++evals[k];
      if (std::isnan(r)) throw EvalError("shell " + std::to_string(k) + ": ratio is NaN at x=" + point_string(x));
      if (wlo.x.empty() || r < lo) {
        lo = r;
        wlo = Witness{k, x, r};
      }
      if (whi.x.empty() || r > hi) {
        hi = r;
        whi = Witness{k, x, r};
      }
    }
    est.shell_min[k] = lo;
    est.shell_max[k] = hi;
    est.min_witnesses[k] = std::move(wlo);
    est.max_witnesses[k] = std::move(whi);
  });

  for (std::size_t k = 0; k < K; ++k) {
    est.evaluations += evals[k];
    if (!skip_msg[k].empty()) est.skipped.push_back(skip_msg[k]);
  }
  est.cumulative.assign(K, kNaN);
  est.cumulative_max.assign(K, kNaN);
  double cmin = kInf, cmax = -kInf;
  for (std::size_t k = K; k-- > 0;) {
    if (!std::isnan(est.shell_min[k])) {
      cmin = std::min(cmin, est.shell_min[k]);
      cmax = std::max(cmax, est.shell_max[k]);
    }
    est.cumulative[k] = cmin;
    est.cumulative_max[k] = cmax;
  }
  const std::size_t first_tail = K - s.tail();
  if (est.skipped.size() == K) throw EvalError("every shell failed to evaluate: " + est.skipped.front());
  double tail_min = kInf, tail_max = -kInf;
  bool any = false;
  for (std::size_t k = first_tail; k < K; ++k) {
    if (std::isnan(est.shell_min[k])) continue;
    any = true;
    tail_min = std::min(tail_min, est.shell_min[k]);
    tail_max = std::max(tail_max, est.shell_max[k]);
  }
  if (!any) {
    tail_min = cmin;
    tail_max = cmax;
  }
  est.extrapolated = bias == Bias::OverEstimatesLiminf ? tail_min : tail_max;
  for (double m : est.shell_min)
    if (!std::isnan(m) && m < -1e6) est.calm_from_below = false;
  return est;
}

RateEstimate descent_rate(const Mapping& phi, std::span<const double> xbar, const SamplingSchedule& s,
                          const RateOptions& opt) {
  if (phi.dim_out() != 1 || !phi.single_valued()) throw Error("descent rate needs a scalar function");
  const double f0 = phi.value(xbar)[0];
  if (!std::isfinite(f0)) throw Error("descent rate: phi(xbar) is not finite");
  return shell_scan(
      xbar, phi.norm_in(), s, [&](std::span<const double> x, double d) { return (phi.value(x)[0] - f0) / d; },
      Bias::OverEstimatesLiminf, opt);
}

void check_anchor(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar, double tol) {
  const double d0 = f.dist_to_image(ybar, xbar);
  if (!(d0 <= tol))
    throw AnchorError("anchor not on graph: dist(ybar, F(xbar)) = " + std::to_string(d0), d0);
}

RateEstimate displacement_rate(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                               const SamplingSchedule& s, const RateOptions& opt) {
  check_anchor(f, xbar, ybar);
  const Vec y(ybar.begin(), ybar.end());
  return shell_scan(
      xbar, f.norm_in(), s, [&](std::span<const double> x, double d) { return f.dist_to_image(y, x) / d; },
      Bias::OverEstimatesLiminf, opt);
}

RateEstimate calmness_modulus_sv(const Mapping& g, std::span<const double> xbar, const SamplingSchedule& s,
                                 const RateOptions& opt) {
  const Vec g0 = g.value(xbar);
  return shell_scan(
      xbar, g.norm_in(), s,
      [&](std::span<const double> x, double d) { return g.norm_out().distance(g.value(x), g0) / d; },
      Bias::UnderEstimatesLimsup, opt);
}

RateEstimate oracle_grid(std::span<const double> xbar, const Norm& norm, double radius, std::size_t resolution,
                         const RatioFn& ratio) {
  const std::size_t dim = xbar.size();
  if (dim > 2) throw DimensionError("grid oracle supports dimension <= 2");
  if (resolution < 3 || resolution > 4001) throw Error("grid oracle resolution must lie in [3, 4001]");
  RateEstimate est;
  est.radii = {radius, 0.0};
  double lo = kInf, hi = -kInf;
  Witness wlo, whi;
  auto visit = [&](const Vec& x) {
    const double d = norm.distance(x, xbar);
    if (!(d > 0.0) || d > radius * (1.0 + 1e-12)) return;
    const double r = ratio(x, d);
    ++est.evaluations;
    if (r < lo) {
      lo = r;
      wlo = Witness{0, x, r};
    }
    if (r > hi) {
      hi = r;
      whi = Witness{0, x, r};
    }
  };
  auto coord = [&](std::size_t i) {
    return -radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(resolution - 1);
  };
  if (dim == 1) {
    for (std::size_t i = 0; i < resolution; ++i) visit(Vec{xbar[0] + coord(i)});
  } else {
    for (std::size_t i = 0; i < resolution; ++i)
      for (std::size_t j = 0; j < resolution; ++j) visit(Vec{xbar[0] + coord(i), xbar[1] + coord(j)});
  }
  est.shell_min = {lo};
  est.shell_max = {hi};
  est.cumulative = {lo};
  est.cumulative_max = {hi};
  est.extrapolated = lo;
  est.min_witnesses = {wlo};
  est.max_witnesses = {whi};
  return est;
}

RateEstimate oracle_rate_grid(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                              double radius, std::size_t resolution) {
  const Vec y(ybar.begin(), ybar.end());
  return oracle_grid(xbar, f.norm_in(), radius, resolution,
                     [&](std::span<const double> x, double d) { return f.dist_to_image(y, x) / d; });
}

}  // namespace subreg
