#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subreg/error.hpp"
#include "subreg/convexity.hpp"
#include "subreg/expr.hpp"
#include "subreg/soundness.hpp"

using namespace subreg;

namespace {

const Vec z1 = {0.0};
const Vec z2 = {0.0, 0.0};

bool has_vertex(const Polytope& p, const Vec& v) {
  for (const auto& w : p.extreme_points())
    if (std::abs(w[0] - v[0]) < 1e-12 && (v.size() < 2 || std::abs(w[1] - v[1]) < 1e-12)) return true;
  return false;
}

MaxAffineFn l1_norm() { return MaxAffineFn({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}, {0, 0, 0, 0}); }

}  // namespace

TEST_CASE("subdifferentials of max-affine functions") {
  const auto seg = subdifferential_at(MaxAffineFn({{1, 0}, {-1, 0}}, {0, 0}), z2);
  CHECK(seg.extreme_points().size() == 2);
  CHECK(has_vertex(seg, {1, 0}));
  CHECK(has_vertex(seg, {-1, 0}));
  CHECK_FALSE(seg.full_dimensional());
  const auto sq = subdifferential_at(l1_norm(), z2);
  CHECK(sq.extreme_points().size() == 4);
  for (const Vec& v : std::vector<Vec>{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) CHECK(has_vertex(sq, v));
  CHECK(sq.consistent());
  const auto smooth = subdifferential_at(MaxAffineFn({{0, 0}}, {0}, Matrix::identity(2)), z2);
  CHECK(smooth.extreme_points().size() == 1);
  CHECK(has_vertex(smooth, {0, 0}));
}

TEST_CASE("inradius at the origin") {
  const Polytope sq({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  CHECK(inradius_origin(sq, Norm::l1()).value == doctest::Approx(1.0).epsilon(1e-12));
  const auto seg = inradius_origin(Polytope({{1, 0}, {-1, 0}}), Norm::l2());
  CHECK(seg.value == 0.0);
  CHECK_FALSE(seg.full_dimensional);
  std::vector<Vec> oct;
  for (int i = 0; i < 8; ++i) oct.push_back({std::cos(i * std::numbers::pi / 4), std::sin(i * std::numbers::pi / 4)});
  const double apothem = std::cos(std::numbers::pi / 8);
  CHECK(oracle::inradius_2d(oct) == doctest::Approx(apothem).epsilon(1e-12));
  CHECK(inradius_origin(Polytope(oct), Norm::l2()).value == doctest::Approx(apothem).epsilon(1e-12));
  const auto off = inradius_origin(Polytope({{1, 1}, {2, 1}, {1, 2}}), Norm::l2());
  CHECK(off.value == 0.0);
}

TEST_CASE("sharp minimizers of convex functions") {
  const auto nrm = sharp_min_convex(l1_norm(), z2);
  CHECK(nrm.verdict == Verdict::Certified);
  CHECK(nrm.rate == doctest::Approx(1.0).epsilon(1e-9));
  const auto kink = sharp_min_convex(MaxAffineFn({{1}, {-2}}, {0, 0}), z1);
  CHECK(kink.verdict == Verdict::Certified);
  CHECK(kink.rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sharp_min_convex(MaxAffineFn({{1}, {0}}, {0, 0}), z1).verdict != Verdict::Certified);
}

TEST_CASE("intrad of vector max-affine maps") {
  const auto cone = OrderCone::orthant(2);
  const MaxAffineFn zero2({{0, 0}}, {0});
  const auto sq = intrad({l1_norm(), zero2}, z2, cone, Norm::l2(), Norm::l2());
  CHECK(sq.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sq.best_ystar[0] == doctest::Approx(1.0).epsilon(1e-9));
  const auto lin = intrad({MaxAffineFn({{1, 0}}, {0}), MaxAffineFn({{0, 1}}, {0})}, z2, cone, Norm::l2(), Norm::l2());
  CHECK(lin.value == 0.0);
  // with the linf target norm the dual sphere is the l1 sphere, where y1 + 2 y2 peaks at (0, 1)
  const auto two = intrad({MaxAffineFn({{1}, {-1}}, {0, 0}), MaxAffineFn({{2}, {-2}}, {0, 0})}, z1, cone, Norm::l2(),
                          Norm::linf());
  CHECK(two.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(two.best_ystar[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("SMS by convex scalarization") {
  const MaxAffineFn zero2({{0, 0}}, {0});
  const auto sq = sms_convex_scalarization({l1_norm(), zero2}, z2, OrderCone::orthant(2), {});
  CHECK(sq.bound == doctest::Approx(1.0).epsilon(1e-9));
  // |f(x)| = |x|_1 >= |x|_2, with equality along the axes
  const double grid = oracle::circle_min([](double c, double s) { return std::abs(c) + std::abs(s); }, 3600);
  CHECK(sq.measured == doctest::Approx(1.0 / grid).epsilon(0.02));
  CHECK(sq.holds == Holds::True);
  const auto abs = sms_convex_scalarization({MaxAffineFn({{1}, {-1}}, {0, 0}), MaxAffineFn({{0}}, {0})}, z1,
                                            OrderCone::orthant(2), {});
  CHECK(abs.bound == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(abs.measured == doctest::Approx(1.0).epsilon(1e-9));
  const auto lin = sms_convex_scalarization({MaxAffineFn({{1, 0}}, {0}), MaxAffineFn({{0, 1}}, {0})}, z2,
                                            OrderCone::orthant(2), {});
  CHECK(lin.holds == Holds::NotApplicable);
  CHECK(certify_sms(LinearMap(Matrix::identity(2)), z2, z2, {}).verdict == Verdict::Certified);
}

TEST_CASE("SMS by Frechet scalarization") {
  auto f = std::make_shared<ExprMap>(parse_expr("[abs(x1), x1]"), 1, 2);
  const auto c = sms_frechet_scalarization(*f, z1, 64, {});
  CHECK(c.verdict == Verdict::Certified);
  CHECK(c.rate >= 1.0 - 1e-9);
  auto sq = std::make_shared<ExprMap>(parse_expr("x1^2"), 1, 1);
  CHECK(sms_frechet_scalarization(*sq, z1, 16, {}).verdict != Verdict::Certified);
  auto anti = std::make_shared<ExprMap>(parse_expr("[x1, -x1]"), 1, 2);
  // every y* o f is linear in x here, so no scalarization has a positive descent rate
  const auto a = sms_frechet_scalarization(*anti, z1, 64, {});
  CHECK(a.verdict != Verdict::Certified);
  const auto m = certify_sms(*anti, z1, z2, {});
  CHECK(m.modulus == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("order cones") {
  const auto c = OrderCone::parse("1,0;1,1", 2);
  CHECK(c.dual_contains(Vec{1, 0}));
  CHECK_FALSE(c.dual_contains(Vec{-1, 0.5}));
  CHECK(c.dual_contains(Vec{0, 1}));
  CHECK(OrderCone::parse("Rm+", 3).is_orthant());
}

TEST_CASE("property: steepest descent equals the inradius") {
  std::size_t positive = 0, zero = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const MaxAffineFn phi = random_max_affine_2d(3 + i % 4, 1000 + i);
    const double rho = inradius_origin(subdifferential_at(phi, z2), Norm::l2()).value;
    const double ref = oracle::inradius_2d(phi.slopes());
    CHECK(rho == doctest::Approx(ref).epsilon(1e-9));
    const auto e = descent_rate(*phi.as_mapping(), z2, {});
    if (rho > 0.05) {
      ++positive;
      CHECK(e.extrapolated == doctest::Approx(rho).epsilon(0.05));
      CHECK(oracle::max_linear_descent(phi.slopes()) == doctest::Approx(rho).epsilon(1e-6));
    } else if (rho == 0.0) {
      ++zero;
      CHECK(e.extrapolated <= 0.05);
    }
  }
  CHECK(positive > 5);
  CHECK(zero > 5);
}

TEST_CASE("property: subgradients reproduce directional derivatives") {
  std::mt19937_64 g(51);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::uint64_t i = 0; i < 40; ++i) {
    const MaxAffineFn phi = random_max_affine_2d(3 + i % 4, 2000 + i);
    const Vec xbar = i % 2 ? Vec{0, 0} : Vec{u(g), u(g)};
    const Polytope sub = subdifferential_at(phi, xbar);
    for (int k = 0; k < 20; ++k) {
      const Vec v = {u(g), u(g)};
      const double t = 1e-6;
      const double quotient = (phi(axpy(t, v, xbar)) - phi(xbar)) / t;
      CHECK(std::abs(quotient - sub.support(v)) <= 1e-4);
    }
  }
}

TEST_CASE("property: moving to a kink never shrinks the subdifferential") {
  for (std::uint64_t i = 0; i < 30; ++i) {
    const MaxAffineFn phi = random_max_affine_2d(3 + i % 4, 3000 + i);
    // all pieces meet at the origin; approach it along a ray
    const Vec dir = {std::cos(0.3 + double(i)), std::sin(0.3 + double(i))};
    const Polytope near = subdifferential_at(phi, scale(dir, 0.5));
    const Polytope at = subdifferential_at(phi, z2);
    for (const auto& v : near.extreme_points()) {
      bool found = false;
      for (const auto& w : at.vertices()) found |= std::abs(v[0] - w[0]) < 1e-12 && std::abs(v[1] - w[1]) < 1e-12;
      CHECK(found);
    }
  }
}

TEST_CASE("Minkowski sums of subdifferentials") {
  const Polytope a({{1, 0}, {-1, 0}});
  const Polytope b({{0, 1}, {0, -1}});
  const Polytope s = weighted_sum({a, b}, Vec{1.0, 2.0});
  CHECK(s.extreme_points().size() == 4);
  CHECK(s.support(Vec{1, 1}) == doctest::Approx(3.0));
}
