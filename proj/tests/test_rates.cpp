#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subreg/error.hpp"
#include "subreg/expr.hpp"
#include "subreg/rates.hpp"

using namespace subreg;

namespace {

MappingPtr expr_map(const char* text, std::size_t n, std::size_t m) {
  return std::make_shared<ExprMap>(parse_expr(text), n, m);
}

MappingPtr rule_map(const char* text) { return std::make_shared<RuleMap>(parse_set_expr(text), 1, 1); }

const MappingPtr F1 = rule_map("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))");
const MappingPtr F2 = rule_map("interval(x1, inf)");

SamplingSchedule with_points(std::size_t n) {
  SamplingSchedule s;
  s.points = n;
  return s;
}

}  // namespace

TEST_CASE("schedule") {
  SamplingSchedule s;
  CHECK(s.radius(0) == 0.5);
  CHECK(s.radius(10) == doctest::Approx(0.5 * std::pow(0.6, 10)));
  CHECK(s.tail() == 4);
  s.decay = 1.5;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("descent rate of |x| is exactly one") {
  const auto e = descent_rate(*expr_map("abs(x1)", 1, 1), Vec{0.0}, {});
  CHECK(std::abs(e.extrapolated - 1.0) <= 1e-9);
  CHECK(e.bias == Bias::OverEstimatesLiminf);
}

TEST_CASE("descent rate of the Euclidean norm off the origin") {
  SamplingSchedule s = with_points(512);
  const auto e = descent_rate(*expr_map("norm2(x)", 2, 1), Vec{1.0, 0.0}, s);
  CHECK(e.final_min() <= 0.05);
  // distance to the unit sphere: radial moves give ratio 1, tangential ones vanish with the radius
  const auto d = descent_rate(*expr_map("abs(norm2(x) - 1)", 2, 1), Vec{1.0, 0.0}, s);
  CHECK(d.final_min() >= 0.0);
  CHECK(d.final_min() <= 0.05);
  for (std::size_t k = 0; k < s.shells; ++k) CHECK(d.shell_min[k] <= s.radius(k));
}

TEST_CASE("descent rate of x^2 is bounded by the final radius") {
  SamplingSchedule s;
  const auto e = descent_rate(*expr_map("x1^2", 1, 1), Vec{0.0}, s);
  const double rk = s.radius(s.shells);
  CHECK(e.extrapolated <= rk * (1 + 1e-6));
  // on shell k the smallest ratio |x| is attained at the inner edge
  for (std::size_t k = 0; k < s.shells; ++k) CHECK(e.shell_min[k] >= s.radius(k + 1) * (1 - 1e-12));
}

TEST_CASE("displacement rate of F1 blows up like 1/r") {
  SamplingSchedule s;
  const auto e = displacement_rate(*F1, Vec{0.0}, Vec{0.0}, s);
  for (std::size_t k = 0; k < s.shells; ++k) CHECK(e.shell_min[k] >= 1.0 / s.radius(k) - 1e-12);
  // the tail minimum is the outer edge of the last extrapolation shell
  CHECK(e.extrapolated >= 1.0 / s.radius(s.shells - s.tail()) - 1e-9);
  CHECK(e.final_min() >= 1.0 / s.radius(s.shells - 1) - 1e-12);
}

TEST_CASE("displacement rate of F2 vanishes with negative witnesses") {
  const auto e = displacement_rate(*F2, Vec{0.0}, Vec{0.0}, {});
  for (double m : e.shell_min) CHECK(m == 0.0);
  for (const auto& w : e.min_witnesses) CHECK(w.x[0] < 0.0);
}

TEST_CASE("displacement rate of diag(2,3)") {
  const auto e = displacement_rate(LinearMap(Matrix{{2, 0}, {0, 3}}), Vec{0, 0}, Vec{0, 0}, with_points(2048));
  CHECK(e.extrapolated == doctest::Approx(2.0).epsilon(0.02));
  CHECK(e.extrapolated >= 2.0 - 1e-12);
}

TEST_CASE("anchors off the graph are refused") {
  CHECK_THROWS_AS(displacement_rate(*F2, Vec{0.0}, Vec{-1.0}, {}), AnchorError);
}

TEST_CASE("calmness modulus") {
  SamplingSchedule s;
  const auto lin = calmness_modulus_sv(*expr_map("3*x1", 1, 1), Vec{0.0}, s);
  for (std::size_t k = 0; k < s.shells; ++k) {
    CHECK(lin.shell_max[k] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(lin.shell_min[k] == doctest::Approx(3.0).epsilon(1e-12));
  }
  const auto osc = calmness_modulus_sv(*expr_map("piecewise(x1 == 0, 0, x1*sin(1/x1))", 1, 1), Vec{0.0},
                                       with_points(4096));
  CHECK(osc.extrapolated >= 0.99);
  CHECK(osc.extrapolated <= 1.0);
  CHECK(osc.bias == Bias::UnderEstimatesLimsup);
  const auto sq = calmness_modulus_sv(*expr_map("x1^2", 1, 1), Vec{0.0}, s);
  // shell k has maximal ratio |x| = r_k; the tail maximum is attained on the outermost tail shell
  for (std::size_t k = 0; k < s.shells; ++k) CHECK(sq.shell_max[k] == doctest::Approx(s.radius(k)).epsilon(1e-9));
  CHECK(sq.extrapolated == doctest::Approx(s.radius(s.shells - s.tail())).epsilon(1e-9));
}

TEST_CASE("grid oracle") {
  const auto lin = oracle_rate_grid(*expr_map("2*x1", 1, 1), Vec{0.0}, Vec{0.0}, 1.0, 2001);
  CHECK(lin.extrapolated == 2.0);
  const auto nrm = oracle_rate_grid(*expr_map("abs(x1) + abs(x2)", 2, 1), Vec{0, 0}, Vec{0}, 0.5, 401);
  CHECK(nrm.extrapolated <= 1.0 + 1e-12);
  CHECK(nrm.extrapolated >= 1.0 - 1e-3);
  const auto f1 = oracle_rate_grid(*F1, Vec{0.0}, Vec{0.0}, 0.5, 2001);
  CHECK(f1.extrapolated == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("property: cumulative minima are nondecreasing") {
  const std::vector<std::pair<MappingPtr, std::size_t>> maps = {
      {expr_map("abs(x1) + 0.3*sin(7*x1)", 1, 1), 1},
      {expr_map("abs(x1 - x2) + x1^2", 2, 1), 2},
      {expr_map("max(x1, 2*x2, -x1-x2) + 0.1*cos(x1*x2*40)", 2, 1), 2},
      {expr_map("norm2(x) * (1 + 0.5*sin(1/(norm2(x) + 1e-9)))", 3, 1), 3},
  };
  for (const auto& [m, n] : maps) {
    const Vec x(n, 0.0);
    const auto e = descent_rate(*m, x, {});
    for (std::size_t k = 1; k < e.shells(); ++k) CHECK(e.cumulative[k] >= e.cumulative[k - 1]);
    for (std::size_t k = 0; k < e.shells(); ++k) CHECK(e.cumulative[k] <= e.shell_min[k]);
  }
}

TEST_CASE("property: sampled rates never undercut closed forms") {
  const SamplingSchedule s = with_points(2048);
  struct Case {
    MappingPtr f;
    Vec xbar;
    double rate;
    bool displacement;
  };
  const std::vector<Case> cases = {
      {std::make_shared<LinearMap>(Matrix{{2, 0}, {0, 3}}), {0, 0}, 2.0, true},
      {std::make_shared<LinearMap>(Matrix{{0.5, 0}, {0, 1.5}}), {0, 0}, 0.5, true},
      {std::make_shared<LinearMap>(Matrix{{4}}), {0}, 4.0, true},
      {expr_map("2*x1", 1, 1), {0}, 2.0, true},
      {expr_map("0.5*x1", 1, 1), {0}, 0.5, true},
      {expr_map("abs(x1)", 1, 1), {0}, 1.0, false},
      {expr_map("norm2(x)", 2, 1), {0, 0}, 1.0, false},
      {expr_map("max(x1, -2*x1)", 1, 1), {0}, 1.0, false},
      {expr_map("abs(x1) + abs(x2)", 2, 1), {0, 0}, 1.0, false},
      {expr_map("max(x1, x2, -x1-x2)", 2, 1), {0, 0},
       oracle::max_linear_descent({{1, 0}, {0, 1}, {-1, -1}}), false},
  };
  for (const auto& c : cases) {
    const Vec y = c.displacement ? c.f->value(c.xbar) : Vec{};
    const auto e = c.displacement ? displacement_rate(*c.f, c.xbar, y, s) : descent_rate(*c.f, c.xbar, s);
    CHECK(e.extrapolated >= c.rate - 1e-12);
    CHECK(e.extrapolated <= c.rate * 1.05);
  }
}

TEST_CASE("property: linear displacement rate is shift invariant") {
  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> u(-2, 2);
  const LinearMap l(Matrix{{1, 2}, {-1, 1}});
  const auto at0 = displacement_rate(l, Vec{0, 0}, Vec{0, 0}, {});
  for (int i = 0; i < 5; ++i) {
    const Vec x = {u(g), u(g)};
    const auto e = displacement_rate(l, x, l.value(x), {});
    CHECK(e.extrapolated == doctest::Approx(at0.extrapolated).epsilon(1e-9));
  }
}

TEST_CASE("property: calm-from-below flag") {
  CHECK(descent_rate(*expr_map("abs(x1)", 1, 1), Vec{0.0}, {}).calm_from_below);
  CHECK(descent_rate(*expr_map("-sqrt(abs(x1))", 1, 1), Vec{0.0}, {}).calm_from_below);
  CHECK_FALSE(descent_rate(*expr_map("piecewise(x1 == 0, 0, -1e9)", 1, 1), Vec{0.0}, {}).calm_from_below);
}

TEST_CASE("shell points depend only on anchor, norm and schedule") {
  SamplingSchedule s;
  const auto a = shell_points(Vec{0, 0}, Norm::l2(), s, 3);
  const auto b = shell_points(Vec{0, 0}, Norm::l2(), s, 3);
  CHECK(a == b);
  for (const auto& x : a) {
    const double r = norm2(x);
    CHECK(r <= s.radius(3) * (1 + 1e-12));
    CHECK(r >= s.radius(4) * (1 - 1e-12));
  }
}

TEST_CASE("parallel loop rethrows the first failure") {
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::size_t i) { hit[i] = 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
  CHECK_THROWS_WITH(parallel_for(10, [](std::size_t i) {
                      if (i >= 3) throw Error("stop " + std::to_string(i));
                    }),
                    "stop 3");
}
