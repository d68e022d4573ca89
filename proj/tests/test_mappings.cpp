#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subreg/error.hpp"
#include "subreg/expr.hpp"
#include "subreg/mappings.hpp"

using namespace subreg;

namespace {

MappingPtr expr_map(const char* text, std::size_t n, std::size_t m) {
  return std::make_shared<ExprMap>(parse_expr(text), n, m);
}

MappingPtr rule_map(const char* text) { return std::make_shared<RuleMap>(parse_set_expr(text), 1, 1); }

Matrix random_matrix(std::mt19937_64& g, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(-2, 2);
  Matrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = u(g);
  return a;
}

}  // namespace

TEST_CASE("alpha of linear operators") {
  const auto d = alpha_linear(Matrix{{2, 0}, {0, 3}}, Norm::l2(), Norm::l2());
  CHECK(d.exact);
  CHECK(d.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(alpha_linear(Matrix(2, 2), Norm::l2(), Norm::l2()).value == 0.0);
}

TEST_CASE("alpha of the identity from l1 to linf is 1/n") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto a = alpha_linear(Matrix::identity(n), Norm::l1(), Norm::linf());
    CHECK_FALSE(a.exact);
    CHECK(a.value >= 1.0 / double(n) - 1e-12);
    CHECK(a.value <= 1.05 / double(n));
  }
  // n = 4 against a grid over the l1 sphere: the infimum sits at the uniform vector.
  double best = oracle::inf;
  const int steps = 24;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; a + b <= steps; ++b)
      for (int c = 0; a + b + c <= steps; ++c) {
        const int e = steps - a - b - c;
        best = std::min(best, double(std::max({a, b, c, e})) / steps);
      }
  CHECK(best == doctest::Approx(0.25));
  CHECK(alpha_linear(Matrix::identity(4), Norm::l1(), Norm::linf()).value == doctest::Approx(best).epsilon(0.05));
}

TEST_CASE("beta of linear operators") {
  CHECK(beta_linear(Matrix{{2, 0}, {0, 3}}, Norm::l2(), Norm::l2()).value == doctest::Approx(2.0));
  const Matrix row{{1, 0}};
  CHECK(alpha_linear(row, Norm::l2(), Norm::l2()).value == 0.0);
  const double beta = beta_linear(row, Norm::l2(), Norm::l2()).value;
  CHECK(beta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beta == doctest::Approx(oracle::sigma_min({{1.0}})).epsilon(1e-12));
  CHECK(beta_linear(Matrix(2, 2), Norm::l2(), Norm::l2()).value == 0.0);
}

TEST_CASE("alpha of positively homogeneous maps") {
  auto id = PHMap(std::make_shared<LinearMap>(Matrix::identity(2)));
  CHECK(alpha0_ph(id).value == doctest::Approx(1.0).epsilon(1e-9));
  auto norm = PHMap(expr_map("norm2(x)", 2, 1));
  CHECK(norm.validate().ok);
  CHECK(alpha0_ph(norm).value == doctest::Approx(1.0).epsilon(1e-9));
  auto fold = PHMap(expr_map("[x1, abs(x2)]", 2, 2));
  const double grid = oracle::circle_min([](double c, double s) { return std::hypot(c, std::abs(s)); }, 3600);
  CHECK(alpha0_ph(fold).value == doctest::Approx(grid).epsilon(1e-9));
  auto bad = PHMap(expr_map("x1^2", 1, 1));
  CHECK_FALSE(bad.validate().ok);
}

TEST_CASE("alpha of fans") {
  const Matrix d{{2, 0}, {0, 3}};
  FanMap single({d}, FanHull::FiniteSet);
  CHECK(alpha_fan(single).value == doctest::Approx(2.0).epsilon(1e-9));
  FanMap pair({Matrix::identity(2), Matrix::identity(2) * 2.0}, FanHull::FiniteSet);
  const double grid = oracle::circle_min(
      [](double c, double s) { return std::min(std::hypot(c, s), 2 * std::hypot(c, s)); }, 3600);
  CHECK(alpha_fan(pair).value == doctest::Approx(grid).epsilon(1e-9));
  FanMap hull({Matrix{{1, 0}, {0, 1}}, Matrix{{-1, 0}, {0, 1}}}, FanHull::ConvexHull);
  CHECK(alpha_fan(hull).value <= 1e-9);
  const Vec e1 = {1, 0}, zero = {0, 0};
  CHECK(hull.dist_to_image(zero, e1) <= 1e-12);
}

TEST_CASE("images") {
  const auto f1 = rule_map("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))");
  CHECK(f1->image(Vec{0.0}).to_string() == "interval(0, 0.5)");
  const auto f2 = rule_map("interval(x1, inf)");
  CHECK(f2->image(Vec{-1.0}).to_string() == "interval(-1, inf)");
  LinearMap lin(Matrix{{2, 0}, {0, 3}});
  CHECK(lin.value(Vec{1, 1}) == Vec{2, 3});
  CHECK(lin.image(Vec{1, 1}).to_string() == "point([2, 3])");
  CHECK_THROWS_AS(f1->value(Vec{0.0}), Error);
}

TEST_CASE("composition, sum and epigraph maps") {
  auto g = expr_map("2*x1", 1, 1);
  auto f = rule_map("interval(x1, inf)");
  ComposedMap fg(f, g);
  CHECK(fg.dist_to_image(Vec{0.0}, Vec{1.0}) == 2.0);
  SumMap sum(f, g);
  CHECK(sum.dist_to_image(Vec{0.0}, Vec{1.0}) == 3.0);
  EpigraphMap epi(expr_map("abs(x1)", 1, 1));
  CHECK(epi.dist_to_image(Vec{0.0}, Vec{-2.0}) == 2.0);
  CHECK(epi.dist_to_image(Vec{5.0}, Vec{-2.0}) == 0.0);
}

TEST_CASE("property: alpha via SVD matches the sampled infimum") {
  std::mt19937_64 g(31);
  for (int i = 0; i < 12; ++i) {
    const std::size_t n = 1 + std::size_t(i % 3);
    const Matrix a = random_matrix(g, n, n);
    const double exact = alpha_linear(a, Norm::l2(), Norm::l2()).value;
    PHMap h(std::make_shared<LinearMap>(a));
    const double sampled = alpha0_ph(h, 10000).value;
    CHECK(sampled >= exact - 1e-9);
    CHECK(sampled <= exact * 1.05 + 1e-9);
  }
}

TEST_CASE("property: singleton fans agree with their operator") {
  std::mt19937_64 g(32);
  for (int i = 0; i < 12; ++i) {
    const std::size_t n = 1 + std::size_t(i % 3);
    const Matrix a = random_matrix(g, n, n);
    const double lin = alpha_linear(a, Norm::l2(), Norm::l2()).value;
    CHECK(alpha_fan(FanMap({a}, FanHull::FiniteSet)).value == doctest::Approx(lin).epsilon(1e-9));
    const double lin1 = alpha_linear(a, Norm::l1(), Norm::l1(), 4096).value;
    const double fan1 = alpha_fan(FanMap({a}, FanHull::FiniteSet, Norm::l1(), Norm::l1())).value;
    CHECK(std::abs(fan1 - lin1) <= 0.05 * std::max(lin1, 1e-3));
  }
}

TEST_CASE("property: fan images are positively homogeneous") {
  std::mt19937_64 g(33);
  std::uniform_real_distribution<double> u(-2, 2), t(0.01, 4);
  for (auto hull : {FanHull::FiniteSet, FanHull::ConvexHull}) {
    FanMap h({random_matrix(g, 2, 2), random_matrix(g, 2, 2), random_matrix(g, 2, 2)}, hull);
    for (int i = 0; i < 100; ++i) {
      const Vec x = {u(g), u(g)};
      const double s = t(g);
      const auto a = h.generator_images(scale(x, s));
      const auto b = h.generator_images(x);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t j = 0; j < 2; ++j) CHECK(a[k][j] == doctest::Approx(s * b[k][j]).epsilon(1e-12));
      const Vec y = {u(g), u(g)};
      CHECK(h.dist_to_image(scale(y, s), scale(x, s)) == doctest::Approx(s * h.dist_to_image(y, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: beta is alpha of the transpose with dual norms") {
  std::mt19937_64 g(34);
  for (int i = 0; i < 10; ++i) {
    const Matrix a = random_matrix(g, 2, 3);
    for (const auto& [in, out] : {std::pair{Norm::l2(), Norm::l2()}, std::pair{Norm::l1(), Norm::linf()}}) {
      const auto b = beta_linear(a, in, out, 2000, 5);
      const auto at = alpha_linear(a.transpose(), out.dual(), in.dual(), 2000, 5);
      CHECK(b.value == at.value);
      CHECK(b.exact == at.exact);
    }
  }
}
