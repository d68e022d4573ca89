#include "subreg/soundness.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "subreg/error.hpp"
#include "subreg/expr.hpp"

namespace subreg {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double sign() { return uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0; }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }

  /// n x n matrix with smallest singular value >= smin.
  Matrix matrix(std::size_t n, double smin) {
    while (true) {
      Matrix a(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = uniform(-2.0, 2.0);
      if (smallest_singular_value(a) >= smin) return a;
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// 1-D positively homogeneous map u -> a u (u >= 0), b u (u < 0).
MappingPtr two_slope(double a, double b) {
  return std::make_shared<FunctionMap>(
      "two-slope", [a, b](std::span<const double> x) { return Vec{x[0] >= 0.0 ? a * x[0] : b * x[0]}; }, 1, 1);
}

double nonzero(Rng& r, double lo, double hi) { return r.sign() * r.uniform(lo, hi); }

SoundnessCase composition_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const Vec z0 = {0.0};
  if (i % 2 == 0) {
    const std::size_t n = 1 + r.index(2);
    const Matrix g = r.matrix(n, 0.3), f = r.matrix(n, 0.3);
    c.description = "linear g, linear F in R^" + std::to_string(n);
    const Vec z(n, 0.0);
    c.report = composition_bound(std::make_shared<LinearMap>(g), std::make_shared<LinearMap>(f), z, z, s);
  } else {
    const double a = nonzero(r, 0.3, 3.0), b = nonzero(r, 0.3, 3.0);
    const double p = nonzero(r, 0.3, 3.0), q = nonzero(r, 0.3, 3.0);
    c.description = "two-slope g (" + fmt(a) + ", " + fmt(b) + "), two-slope F (" + fmt(p) + ", " + fmt(q) + ")";
    c.report = composition_bound(two_slope(a, b), two_slope(p, q), z0, z0, s);
  }
  return c;
}

SoundnessCase perturbation_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const std::size_t n = 1 + (i % 2);
  const Matrix a = r.matrix(n, 0.5);
  const double alpha = smallest_singular_value(a);
  const double w = r.uniform(0.5, 4.0);
  // keep kappa * clm(g) = c w / alpha below 0.9
  const double amp = r.sign() * r.uniform(0.0, 0.9) * alpha / w;
  c.description = "linear F in R^" + std::to_string(n) + ", g = " + fmt(amp) + " sin(" + fmt(w) + " x)";
  auto g = std::make_shared<FunctionMap>(
      "sine", [amp, w](std::span<const double> x) {
        Vec y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = amp * std::sin(w * x[k]);
        return y;
      },
      n, n);
  const Vec z(n, 0.0);
  c.report = perturbation_bound(std::make_shared<LinearMap>(a), g, z, z, s);
  return c;
}

SoundnessCase approx_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const double w = r.uniform(0.5, 4.0);
  if (i % 2 == 0) {
    const double a = r.uniform(0.5, 3.0), b = r.uniform(0.5, 3.0);
    const double amp = r.sign() * r.uniform(0.0, 0.9) * std::min(a, b) / w;
    c.description = "two-slope h (" + fmt(a) + ", " + fmt(-b) + ") plus " + fmt(amp) + " sin(" + fmt(w) + " x)";
    auto h = std::make_shared<PHMap>(two_slope(a, -b));
    auto f = std::make_shared<FunctionMap>(
        "f", [a, b, amp, w](std::span<const double> x) {
          const double u = x[0];
          return Vec{(u >= 0.0 ? a * u : -b * u) + amp * std::sin(w * u)};
        },
        1, 1);
    c.report = sms_from_approx(f, h, Vec{0.0}, s);
  } else {
    const Matrix a = r.matrix(2, 0.5);
    const double alpha = smallest_singular_value(a);
    const double amp = r.uniform(0.0, 0.9) * alpha / w;
    c.description = "linear h in R^2 plus " + fmt(amp) + " sin(" + fmt(w) + " x)";
    auto h = std::make_shared<LinearMap>(a);
    auto f = std::make_shared<FunctionMap>(
        "f", [a, amp, w](std::span<const double> x) {
          Vec y = a.apply(x);
          y[0] += amp * std::sin(w * x[1]);
          y[1] += amp * std::sin(w * x[0]);
          return y;
        },
        2, 2);
    c.report = sms_from_approx(f, h, Vec{0.0, 0.0}, s);
  }
  return c;
}

SoundnessCase prederivative_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const std::size_t n = 1 + (i % 2);
  const Matrix a = r.matrix(n, 0.3), b = r.matrix(n, 0.3);
  Vec normal(n);
  for (auto& v : normal) v = r.uniform(-1.0, 1.0);
  c.description = "piecewise-linear f in R^" + std::to_string(n) + " switching on a half-space";
  auto f = std::make_shared<FunctionMap>(
      "pl", [a, b, normal](std::span<const double> x) { return dot(normal, x) >= 0.0 ? a.apply(x) : b.apply(x); }, n,
      n);
  auto fan = std::make_shared<FanMap>(std::vector<Matrix>{a, b}, FanHull::FiniteSet);
  c.report = sms_from_prederivative(f, fan, Vec(n, 0.0), s.r0, s);
  return c;
}

SoundnessCase kernel_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const std::size_t n = 1 + (i % 3);
  const Matrix a = r.matrix(n, 0.3);
  const double k = r.uniform(0.0, 2.0);
  c.description = "(1 + " + fmt(k) + " |x|^2) A x in R^" + std::to_string(n);
  auto f = std::make_shared<FunctionMap>(
      "smooth", [a, k](std::span<const double> x) { return scale(a.apply(x), 1.0 + k * dot(x, x)); }, n, n);
  c.report = smooth_kernel_check(f, Vec(n, 0.0), s);
  return c;
}

SoundnessCase geneq_calm_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const double a = r.uniform(1.0, 3.0), b = nonzero(r, 0.5, 2.0);
  const double q = r.uniform(-0.5, 0.5), e = r.uniform(-0.5, 0.5);
  const bool cone = i % 2 == 1;
  c.description = "f = " + fmt(a) + " x - " + fmt(b) + " p + " + fmt(q) + " x^2 + " + fmt(e) + " p x" +
                  (cone ? ", T = normal cone of [0, inf)" : ", T = 0");
  GenEqProblem prob;
  prob.f = [a, b, q, e](std::span<const double> p, std::span<const double> x) {
    return Vec{a * x[0] - b * p[0] + q * x[0] * x[0] + e * p[0] * x[0]};
  };
  prob.field = cone ? normal_cone_box({0.0}, {kInf}) : zero_field(1, 1);
  prob.pbar = {0.0};
  prob.xbar = {0.0};
  c.report = isolated_calmness_bound(prob, s);
  return c;
}

SoundnessCase geneq_field_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const double a = r.uniform(1.0, 3.0), b = nonzero(r, 0.5, 2.0);
  const double w = r.uniform(0.5, 3.0);
  const double amp = r.sign() * r.uniform(0.0, 0.8) * a / w;
  c.description = "f = " + fmt(a) + " x - " + fmt(b) + " p, T = " + fmt(amp) + " sin(" + fmt(w) + " x)";
  GenEqProblem prob;
  prob.f = [a, b](std::span<const double> p, std::span<const double> x) { return Vec{a * x[0] - b * p[0]}; };
  prob.field = std::make_shared<FunctionMap>(
      "T", [amp, w](std::span<const double> x) { return Vec{amp * std::sin(w * x[0])}; }, 1, 1);
  prob.pbar = {0.0};
  prob.xbar = {0.0};
  c.report = single_valued_field_bound(prob, s);
  return c;
}

SoundnessCase geneq_scalar_case(Rng& r, std::size_t i, const SamplingSchedule& s) {
  SoundnessCase c;
  c.index = i;
  const double s1 = r.uniform(0.5, 2.0), s2 = r.uniform(0.5, 2.0);
  const double b = nonzero(r, 0.5, 2.0);
  const double amp = r.sign() * r.uniform(0.0, 0.8) * std::min(s1, s2);
  std::vector<Vec> slopes = {{s1}, {-s2}};
  Vec offsets = {0.0, 0.0};
  if (i % 3 == 0) {
    slopes.push_back({r.uniform(-3.0, 3.0)});
    offsets.push_back(-r.uniform(0.5, 1.0));  // inactive at 0
  }
  const MaxAffineFn phi(slopes, offsets);
  c.description = "f = (max-affine(" + fmt(s1) + ", " + fmt(-s2) + ") - " + fmt(b) + " p, 0), T = (" + fmt(amp) +
                  " sin(x), 0)";
  GenEqProblem prob;
  prob.m = 2;
  prob.f = [phi, b](std::span<const double> p, std::span<const double> x) { return Vec{phi(x) - b * p[0], 0.0}; };
  prob.field = std::make_shared<FunctionMap>(
      "T", [amp](std::span<const double> x) { return Vec{amp * std::sin(x[0]), 0.0}; }, 1, 2);
  prob.pbar = {0.0};
  prob.xbar = {0.0};
  prob.maxaffine = {phi, MaxAffineFn({{0.0}}, {0.0})};
  prob.cone = OrderCone::orthant(2);
  c.report = convex_scalarized_geneq_bound(prob, s);
  return c;
}

using CaseFn = SoundnessCase (*)(Rng&, std::size_t, const SamplingSchedule&);

CaseFn family(const std::string& theorem) {
  if (theorem == "composition") return composition_case;
  if (theorem == "calm-perturbation") return perturbation_case;
  if (theorem == "eps-approximation") return approx_case;
  if (theorem == "outer-prederivative") return prederivative_case;
  if (theorem == "smooth-kernel") return kernel_case;
  if (theorem == "geneq-isolated-calmness") return geneq_calm_case;
  if (theorem == "geneq-single-valued-field") return geneq_field_case;
  return geneq_scalar_case;
}

void tally(SoundnessSummary& sum, SoundnessCase c) {
  ++sum.instances;
  if (c.report.holds == Holds::True) ++sum.held;
  if (c.report.holds == Holds::NotApplicable) ++sum.not_applicable;
  if (c.report.hypotheses_met() && std::isfinite(c.report.bound))
    sum.worst_excess = std::max(sum.worst_excess, c.report.measured - c.report.bound);
  sum.cases.push_back(std::move(c));
}

}  // namespace

const std::vector<std::string>& soundness_theorems() {
  static const std::vector<std::string> t = {"composition",       "calm-perturbation",      "eps-approximation",
                                             "outer-prederivative", "smooth-kernel",        "geneq-isolated-calmness",
                                             "geneq-single-valued-field", "geneq-convex-scalarization"};
  return t;
}

std::string canonical_theorem(std::string_view id) {
  static const std::vector<std::pair<std::string, std::string>> aliases = {
      {"thm3.1", "composition"},           {"thm3.2", "calm-perturbation"},
      {"thm4.1", "eps-approximation"},     {"thm4.2", "outer-prederivative"},
      {"cor4.1", "smooth-kernel"},         {"thm5.1", "geneq-isolated-calmness"},
      {"cor5.2", "geneq-single-valued-field"}, {"thm5.2", "geneq-convex-scalarization"}};
  for (const auto& [a, name] : aliases)
    if (id == a) return name;
  for (const auto& name : soundness_theorems())
    if (id == name) return name;
  throw Error("unknown theorem id '" + std::string(id) + "'");
}

SoundnessSummary soundness_suite(std::string_view theorem, std::size_t count, std::uint64_t seed,
                                 const SamplingSchedule& s) {
  SoundnessSummary sum;
  sum.theorem = canonical_theorem(theorem);
  const CaseFn make = family(sum.theorem);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    tally(sum, make(rng, i, s));
  }
  return sum;
}

SoundnessSummary catalog_suite(std::string_view theorem, const SamplingSchedule& s) {
  SoundnessSummary sum;
  sum.theorem = canonical_theorem(theorem);
  auto lin = [](std::vector<Vec> rows) { return std::make_shared<LinearMap>(Matrix::from_rows(rows)); };
  auto expr = [](const char* text, std::size_t n, std::size_t m) {
    return std::make_shared<ExprMap>(parse_expr(text), n, m);
  };
  auto add = [&](std::string desc, BoundReport r) {
    tally(sum, SoundnessCase{sum.instances, std::move(desc), std::move(r)});
  };
  const Vec z1 = {0.0}, z2 = {0.0, 0.0};
  const std::string& t = sum.theorem;
  if (t == "composition") {
    add("g(z) = 2z, F(x) = 3x", composition_bound(lin({{2}}), lin({{3}}), z1, z1, s));
    add("g(z) = |z|, F(x) = |x|", composition_bound(expr("abs(x1)", 1, 1), expr("abs(x1)", 1, 1), z1, z1, s));
  } else if (t == "calm-perturbation") {
    add("F(x) = 2x, g(x) = 0.5 sin(3x)", perturbation_bound(lin({{2}}), expr("0.5*sin(3*x1)", 1, 1), z1, z1, s));
    add("F(x) = x, g = 0", perturbation_bound(lin({{1}}), expr("0*x1", 1, 1), z1, z1, s));
  } else if (t == "eps-approximation") {
    SamplingSchedule fine = s;
    fine.points = std::max<std::size_t>(s.points, 4096);
    add("f(x) = x + 0.2 x sin(1/x), h = id",
        sms_from_approx(expr("piecewise(x1 == 0, 0, x1 + 0.2*x1*sin(1/x1))", 1, 1), lin({{1}}), z1, fine));
    add("f = h = |x|", sms_from_approx(expr("abs(x1)", 1, 1), std::make_shared<PHMap>(expr("abs(x1)", 1, 1)), z1, s));
  } else if (t == "outer-prederivative") {
    auto fan = std::make_shared<FanMap>(std::vector<Matrix>{Matrix{{1, 0}, {0, 1}}, Matrix{{-1, 0}, {0, 1}}},
                                        FanHull::FiniteSet);
    add("f(x) = (|x1|, x2), H = {diag(1,1), diag(-1,1)}",
        sms_from_prederivative(expr("[abs(x1), x2]", 2, 2), fan, z2, 0.5, s));
    auto diag = std::make_shared<FanMap>(std::vector<Matrix>{Matrix{{2, 0}, {0, 3}}}, FanHull::FiniteSet);
    add("f = diag(2,3) x, H = {diag(2,3)}", sms_from_prederivative(lin({{2, 0}, {0, 3}}), diag, z2, 0.5, s));
    auto id = std::make_shared<FanMap>(std::vector<Matrix>{Matrix{{1}}}, FanHull::FiniteSet);
    add("f(x) = x + 0.1 x^2, H = {id}", sms_from_prederivative(expr("x1 + 0.1*x1^2", 1, 1), id, z1, 0.5, s));
  } else if (t == "smooth-kernel") {
    add("f(x) = (2 x1, 3 x2)", smooth_kernel_check(expr("[2*x1, 3*x2]", 2, 2), z2, s));
    add("f(x) = (x1 + x2, x1 - x2)", smooth_kernel_check(expr("[x1 + x2, x1 - x2]", 2, 2), z2, s));
  } else {
    GenEqProblem prob;
    prob.pbar = {0.0};
    prob.xbar = {0.0};
    if (t == "geneq-isolated-calmness") {
      prob.f = [](std::span<const double> p, std::span<const double> x) { return Vec{x[0] - p[0]}; };
      prob.field = normal_cone_box({0.0}, {kInf});
      add("complementarity x - p + N_[0,inf)(x)", isolated_calmness_bound(prob, s));
      prob.f = [](std::span<const double> p, std::span<const double> x) { return Vec{2 * x[0] - p[0]}; };
      prob.field = zero_field(1, 1);
      add("2x - p", isolated_calmness_bound(prob, s));
      prob.f = [](std::span<const double> p, std::span<const double> x) {
        return Vec{x[0] - p[0] + 0.1 * x[0] * x[0]};
      };
      prob.field = normal_cone_box({0.0}, {kInf});
      add("x - p + 0.1 x^2 + N_[0,inf)(x)", isolated_calmness_bound(prob, s));
    } else if (t == "geneq-single-valued-field") {
      prob.f = [](std::span<const double> p, std::span<const double> x) { return Vec{2 * x[0] - p[0]}; };
      prob.field = expr("0.5*sin(x1)", 1, 1);
      add("2x - p + 0.5 sin(x)", single_valued_field_bound(prob, s));
    } else {
      prob.m = 2;
      prob.f = [](std::span<const double> p, std::span<const double> x) {
        return Vec{std::abs(x[0]) - p[0], 0.0};
      };
      prob.maxaffine = {MaxAffineFn({{1.0}, {-1.0}}, {0.0, 0.0}), MaxAffineFn({{0.0}}, {0.0})};
      prob.cone = OrderCone::orthant(2);
      prob.field = zero_field(1, 2);
      add("(|x| - p, 0)", convex_scalarized_geneq_bound(prob, s));
      prob.field = expr("[0.4*x1, 0]", 1, 2);
      add("(|x| - p, 0) + (0.4 x, 0)", convex_scalarized_geneq_bound(prob, s));
    }
  }
  return sum;
}

MaxAffineFn random_max_affine_2d(std::size_t pieces, std::uint64_t seed) {
  Rng r(seed);
  std::vector<Vec> slopes;
  Vec offsets;
  for (std::size_t i = 0; i < pieces; ++i) {
    slopes.push_back({r.uniform(-2.0, 2.0), r.uniform(-2.0, 2.0)});
    offsets.push_back(0.0);
  }
  return MaxAffineFn(slopes, offsets);
}

}  // namespace subreg
