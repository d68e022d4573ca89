#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subreg/error.hpp"
#include "subreg/linalg.hpp"

using namespace subreg;

namespace {

Matrix random_matrix(std::mt19937_64& g, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(-2, 2);
  Matrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = u(g);
  return a;
}

oracle::Mat rows(const Matrix& a) {
  oracle::Mat m(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) m[i] = a.row(i);
  return m;
}

}  // namespace

TEST_CASE("singular values of small matrices") {
  CHECK(singular_values(Matrix{{2, 0}, {0, 3}}) == Vec{3, 2});
  const Vec s = singular_values(Matrix{{1, 1}, {1, -1}});
  CHECK(s[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(s[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(smallest_singular_value(Matrix{{1, 0}}) == 0.0);
  CHECK(smallest_singular_value(Matrix(2, 2)) == 0.0);
}

TEST_CASE("property: smallest singular value matches inverse iteration") {
  std::mt19937_64 g(21);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + std::size_t(i % 4);
    const Matrix a = random_matrix(g, n, n);
    const double ref = oracle::sigma_min(rows(a));
    if (ref < 1e-3) continue;
    CHECK(std::abs(smallest_singular_value(a) - ref) <= 1e-9 * std::max(1.0, ref));
  }
}

TEST_CASE("property: singular values square to eigenvalues of A^T A") {
  std::mt19937_64 g(22);
  for (int i = 0; i < 30; ++i) {
    const Matrix a = random_matrix(g, 4, 3);
    Vec s = singular_values(a);
    Vec e = symmetric_eigenvalues(a.transpose() * a);
    std::sort(s.begin(), s.end());
    REQUIRE(s.size() == e.size());
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k] * s[k] == doctest::Approx(e[k]).epsilon(1e-9));
  }
}

TEST_CASE("least squares recovers a consistent solution") {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Vec x = {0.5, -1.0};
  const Vec sol = least_squares(a, a.apply(x));
  CHECK(sol[0] == doctest::Approx(0.5));
  CHECK(sol[1] == doctest::Approx(-1.0));
}

TEST_CASE("nnls clips negative coefficients") {
  const Matrix e{{1, 0}, {0, 1}};
  const Vec x = nnls(e, Vec{2, -3});
  CHECK(x[0] == doctest::Approx(2));
  CHECK(x[1] == 0.0);
}

TEST_CASE("Wolfe minimum-norm point") {
  SUBCASE("segment through the origin") {
    const auto r = wolfe_min_norm_point({{1, 0}, {-1, 0}});
    CHECK(norm2(r.point) <= 1e-12);
  }
  SUBCASE("segment away from the origin") {
    const auto r = wolfe_min_norm_point({{1, 1}, {1, -1}});
    CHECK(r.point[0] == doctest::Approx(1));
    CHECK(std::abs(r.point[1]) <= 1e-12);
  }
  SUBCASE("property: agrees with a dense grid over triangles") {
    std::mt19937_64 g(23);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 30; ++i) {
      const std::vector<Vec> pts = {{u(g), u(g)}, {u(g), u(g)}, {u(g), u(g)}};
      const auto r = wolfe_min_norm_point(pts);
      double best = oracle::inf;
      const int n = 300;
      for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b) {
          const double la = double(a) / n, lb = double(b) / n, lc = 1 - la - lb;
          best = std::min(best, std::hypot(la * pts[0][0] + lb * pts[1][0] + lc * pts[2][0],
                                           la * pts[0][1] + lb * pts[1][1] + lc * pts[2][1]));
        }
      CHECK(norm2(r.point) <= best + 1e-12);
      CHECK(norm2(r.point) >= best - 2e-2);
      double wsum = 0;
      for (double w : r.weights) {
        CHECK(w >= -1e-12);
        wsum += w;
      }
      CHECK(wsum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("polyhedral projection") {
  const auto r = project_polyhedron(Matrix{{1, 1}}, Vec{1}, Vec{1, 1});
  REQUIRE(r.feasible);
  CHECK(r.point[0] == doctest::Approx(0.5));
  CHECK(r.point[1] == doctest::Approx(0.5));
  CHECK_FALSE(project_polyhedron(Matrix{{1}, {-1}}, Vec{-1, -1}, Vec{0}).feasible);
  const Vec c = project_cone(Vec{0, 0}, Matrix{{1, 0}, {0, 1}}, Vec{-1, 2});
  CHECK(c[0] == doctest::Approx(0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(2));
}
