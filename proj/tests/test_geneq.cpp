#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "subreg/error.hpp"
#include "subreg/expr.hpp"
#include "subreg/geneq.hpp"
#include "subreg/soundness.hpp"

using namespace subreg;

namespace {

using Span = std::span<const double>;

std::shared_ptr<const FanMap> scalar_fan(double a) {
  return std::make_shared<FanMap>(std::vector<Matrix>{Matrix{{a}}}, FanHull::FiniteSet);
}

GenEqProblem scalar_problem(BaseFn f, MappingPtr field) {
  GenEqProblem p;
  p.f = std::move(f);
  p.field = std::move(field);
  p.pbar = {0.0};
  p.xbar = {0.0};
  return p;
}

GenEqProblem complementarity() {
  auto p = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0]}; }, normal_cone_box({0.0}, {kInf}));
  p.fan = scalar_fan(1.0);
  return p;
}

MappingPtr scalar_field(const char* text) { return std::make_shared<ExprMap>(parse_expr(text), 1, 1); }

GenEqProblem scalarized(const char* field) {
  GenEqProblem p;
  p.m = 2;
  p.f = [](Span q, Span x) { return Vec{std::abs(x[0]) - q[0], 0.0}; };
  p.field = std::make_shared<ExprMap>(parse_expr(field), 1, 2);
  p.pbar = {0.0};
  p.xbar = {0.0};
  p.maxaffine = {MaxAffineFn({{1.0}, {-1.0}}, {0.0, 0.0}), MaxAffineFn({{0.0}}, {0.0})};
  p.cone = OrderCone::orthant(2);
  return p;
}

}  // namespace

TEST_CASE("residuals of the complementarity problem") {
  const auto p = complementarity();
  CHECK(residual(p, Vec{1.0}, Vec{1.0}) == 0.0);
  // x = 0 is not a solution at p = 1: dist(0, -1 + (-inf, 0]) = 1
  CHECK(residual(p, Vec{1.0}, Vec{0.0}) == 1.0);
  CHECK(residual(p, Vec{-1.0}, Vec{0.5}) == 1.5);
  CHECK(residual(p, Vec{-1.0}, Vec{0.0}) == 0.0);
  CHECK(residual(p, Vec{0.0}, Vec{-0.5}) == kInf);
}

TEST_CASE("tracing solution maps") {
  SUBCASE("complementarity gives max(p, 0)") {
    const auto p = complementarity();
    const auto sols = trace_solution_map(p, {{-0.2}, {0.0}, {0.3}}, 0.5);
    REQUIRE(sols.size() == 3);
    const double expect[] = {0.0, 0.0, 0.3};
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(sols[i].solutions.size() == 1);
      CHECK(sols[i].solutions[0][0] == doctest::Approx(expect[i]).epsilon(1e-6).scale(1));
      CHECK(residual(p, sols[i].p, sols[i].solutions[0]) <= 1e-7);
    }
  }
  SUBCASE("identity equation") {
    const auto p = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0]}; }, zero_field(1, 1));
    for (const auto& s : trace_solution_map(p, parameter_grid(p, 9), 0.5)) {
      REQUIRE(s.solutions.size() == 1);
      CHECK(std::abs(s.solutions[0][0] - s.p[0]) <= 1e-6);
    }
  }
  SUBCASE("cube root") {
    const auto p = scalar_problem([](Span q, Span x) { return Vec{x[0] * x[0] * x[0] - q[0]}; }, zero_field(1, 1));
    const auto s = trace_solution_map(p, {{0.008}}, 0.5);
    const double ref = oracle::bisect([](double x) { return x * x * x - 0.008; }, 0.0, 0.5);
    REQUIRE(s[0].solutions.size() == 1);
    CHECK(ref == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(s[0].solutions[0][0] - ref) <= 1e-5);
  }
}

TEST_CASE("partial prederivative defects") {
  SamplingSchedule s;
  auto lin = complementarity();
  lin.field = zero_field(1, 1);
  CHECK(partial_prederivative_defect(lin, s) <= 1e-12);
  auto quad = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0] + 0.1 * x[0] * x[0]}; }, zero_field(1, 1));
  quad.fan = scalar_fan(1.0);
  const double dq = partial_prederivative_defect(quad, s);
  CHECK(dq <= 0.05 + 1e-12);
  CHECK(dq >= 0.049);
  auto bilin = scalar_problem([](Span q, Span x) { return Vec{x[0] * (1 + q[0]) - q[0]}; }, zero_field(1, 1));
  bilin.fan = scalar_fan(1.0);
  bilin.zeta = 0.1;
  const double db = partial_prederivative_defect(bilin, s);
  CHECK(db <= 0.1 + 1e-12);
  CHECK(db >= 0.099);
}

TEST_CASE("isolated calmness bounds") {
  SamplingSchedule s;
  SUBCASE("complementarity is an equality case") {
    const auto r = isolated_calmness_bound(complementarity(), s);
    CHECK(r.value("eps") <= 1e-12);
    CHECK(r.value("kappa") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.value("clm_f") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.bound == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.measured == doctest::Approx(1.0).epsilon(0.02));
    CHECK(r.holds == Holds::True);
  }
  SUBCASE("2x - p") {
    auto p = scalar_problem([](Span q, Span x) { return Vec{2 * x[0] - q[0]}; }, zero_field(1, 1));
    p.fan = scalar_fan(2.0);
    const auto r = isolated_calmness_bound(p, s);
    CHECK(r.bound == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.measured == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("quadratic term") {
    auto p = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0] + 0.1 * x[0] * x[0]}; },
                            normal_cone_box({0.0}, {kInf}));
    p.fan = scalar_fan(1.0);
    const auto r = isolated_calmness_bound(p, s);
    CHECK(r.value("eps") == doctest::Approx(0.05).epsilon(0.02));
    CHECK(r.bound == doctest::Approx(1 / 0.95).epsilon(1e-3));
    // largest |x(p)| / |p| over the traced grid, solving x + 0.1 x^2 = p for p > 0
    double ref = 0.0;
    for (const auto& q : parameter_grid(p))
      if (q[0] > 0)
        ref = std::max(ref, oracle::bisect([&](double x) { return x + 0.1 * x * x - q[0]; }, 0.0, 0.5) / q[0]);
    CHECK(r.measured == doctest::Approx(ref).epsilon(1e-5));
    CHECK(r.measured == doctest::Approx(1.0).epsilon(0.02));
    CHECK(r.holds == Holds::True);
  }
}

TEST_CASE("single-valued field bounds") {
  SamplingSchedule s;
  auto p = scalar_problem([](Span q, Span x) { return Vec{2 * x[0] - q[0]}; }, scalar_field("0.5*sin(x1)"));
  p.fan = scalar_fan(2.0);
  const auto r = single_valued_field_bound(p, s);
  CHECK(r.value("alpha_fan") == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.value("clm_T") == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(r.bound == doctest::Approx(2.0 / 3).epsilon(2e-3));
  double ref = 0.0;
  for (const auto& q : parameter_grid(p)) {
    const double x = oracle::bisect([&](double t) { return 2 * t + 0.5 * std::sin(t) - q[0]; }, -0.5, 0.5);
    ref = std::max(ref, std::abs(x) / std::abs(q[0]));
  }
  CHECK(ref == doctest::Approx(0.4).epsilon(2e-3));
  CHECK(r.measured == doctest::Approx(ref).epsilon(1e-5));
  CHECK(r.holds == Holds::True);

  auto zero = p;
  zero.field = zero_field(1, 1);
  const auto rz = single_valued_field_bound(zero, s);
  const auto ri = isolated_calmness_bound(zero, s);
  CHECK(rz.value("clm_T") == 0.0);
  CHECK(rz.bound == doctest::Approx(ri.bound).epsilon(1e-9));
  CHECK(rz.measured == doctest::Approx(ri.measured).epsilon(1e-9));

  auto edge = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0]}; }, scalar_field("x1"));
  edge.fan = scalar_fan(1.0);
  const auto re = single_valued_field_bound(edge, s);
  CHECK(re.holds == Holds::NotApplicable);
  CHECK_FALSE(re.hypotheses_met());
}

TEST_CASE("convex scalarized bounds") {
  SamplingSchedule s;
  const auto r0 = convex_scalarized_geneq_bound(scalarized("[0, 0]"), s);
  CHECK(r0.value("intrad") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r0.value("clm_T") == 0.0);
  CHECK(r0.bound == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r0.measured == doctest::Approx(1.0).epsilon(1e-6));
  // |x| + 0.4 x = p has the branches p / 1.4 and -p / 0.6
  const auto r4 = convex_scalarized_geneq_bound(scalarized("[0.4*x1, 0]"), s);
  CHECK(r4.value("clm_T") == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(r4.bound == doctest::Approx(1 / 0.6).epsilon(1e-6));
  CHECK(r4.measured == doctest::Approx(1 / 0.6).epsilon(1e-5));
  CHECK(r4.holds == Holds::True);
  const auto r12 = convex_scalarized_geneq_bound(scalarized("[1.2*x1, 0]"), s);
  CHECK(r12.holds == Holds::NotApplicable);
  CHECK_FALSE(r12.hypotheses_met());
}

TEST_CASE("anchors must solve the equation") {
  auto p = scalar_problem([](Span q, Span x) { return Vec{x[0] - q[0] + 1}; }, zero_field(1, 1));
  CHECK_THROWS_AS(p.validate(), AnchorError);
}

TEST_CASE("property: random instances of the three bounds hold") {
  for (const auto& t : {"geneq-isolated-calmness", "geneq-single-valued-field", "geneq-convex-scalarization"}) {
    CAPTURE(t);
    const auto s = soundness_suite(t, 30, 7);
    CHECK(s.held == s.instances);
    CHECK(s.worst_excess <= 1e-6);
    const auto c = catalog_suite(t);
    CHECK(c.held == c.instances);
  }
}

TEST_CASE("property: traced solutions replay") {
  const std::vector<GenEqProblem> probs = {
      complementarity(),
      scalar_problem([](Span q, Span x) { return Vec{2 * x[0] - q[0]}; }, scalar_field("0.5*sin(x1)")),
      scalar_problem([](Span q, Span x) { return Vec{x[0] * x[0] * x[0] - q[0]}; }, zero_field(1, 1)),
      scalarized("[0.4*x1, 0]"),
  };
  for (const auto& p : probs)
    for (const auto& s : trace_solution_map(p, parameter_grid(p, 17), p.delta))
      for (std::size_t i = 0; i < s.solutions.size(); ++i) {
        CHECK(s.residuals[i] <= 1e-7);
        CHECK(residual(p, s.p, s.solutions[i]) <= 1e-7);
      }
}

TEST_CASE("property: certified anchors are isolated") {
  const std::vector<GenEqProblem> probs = {
      complementarity(),
      scalar_problem([](Span q, Span x) { return Vec{2 * x[0] - q[0]}; }, scalar_field("0.5*sin(x1)")),
      scalarized("[0, 0]"),
  };
  for (const auto& p : probs) {
    const auto at = trace_solution_map(p, {p.pbar}, p.delta);
    REQUIRE(at.size() == 1);
    for (const auto& x : at[0].solutions) CHECK(norm2(sub(x, p.xbar)) <= 1e-5);
    CHECK(isolated_calmness_bound(p, {}).value("xbar_isolated") == 1.0);
  }
}

TEST_CASE("property: vanishing defects give the product bound") {
  const double qs[] = {0.1, -0.2, 0.3};
  for (double q : qs) {
    auto p = scalar_problem([q](Span r, Span x) { return Vec{x[0] - r[0] + q * x[0] * x[0]}; },
                            normal_cone_box({0.0}, {kInf}));
    p.fan = scalar_fan(1.0);
    const auto r = isolated_calmness_bound(p, {});
    REQUIRE(r.strict_bound.has_value());
    CHECK(*r.strict_bound == doctest::Approx(r.value("clm_f") * r.value("kappa")).epsilon(1e-12));
    CHECK(*r.strict_bound <= r.bound);
    REQUIRE(r.strict_holds.has_value());
    CHECK(*r.strict_holds);
  }
}
