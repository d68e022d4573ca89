#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subreg/calculus.hpp"

namespace subreg {

/// phi(x) = max_i (<a_i, x> + b_i) + 0.5 x^T Q x.
class MaxAffineFn {
 public:
  MaxAffineFn(std::vector<Vec> slopes, Vec offsets, std::optional<Matrix> q = std::nullopt);

  /// "(a11,a12,b1);(a21,a22,b2)": each group lists the slope followed by the offset.
  static MaxAffineFn parse(std::string_view pieces);

  std::size_t dim() const { return slopes_.front().size(); }
  std::size_t pieces() const { return slopes_.size(); }
  const std::vector<Vec>& slopes() const { return slopes_; }
  const Vec& offsets() const { return offsets_; }
  const std::optional<Matrix>& quadratic() const { return q_; }
  /// Single piece and no quadratic term.
  bool affine() const { return slopes_.size() == 1 && !q_; }

  double operator()(std::span<const double> x) const;
  /// Scalar mapping handle with the given source norm.
  MappingPtr as_mapping(const Norm& norm_in = Norm::l2()) const;
  std::string to_string() const;

 private:
  std::vector<Vec> slopes_;
  Vec offsets_;
  std::optional<Matrix> q_;
};

/// Convex polytope given by its vertices, with a facet form for dim <= 3.
class Polytope {
 public:
  explicit Polytope(std::vector<Vec> vertices);

  std::size_t dim() const { return vertices_.front().size(); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  /// Extreme points (hull vertices) for dim <= 3; all points otherwise.
  std::vector<Vec> extreme_points() const;
  bool full_dimensional() const;
  /// Facets {g : <normal, g> <= offset} (dim <= 3, full-dimensional only).
  const std::vector<std::pair<Vec, double>>& facets() const;
  /// max over vertices of <d, v>.
  double support(std::span<const double> d) const;
  /// Every vertex satisfies every facet inequality within tol.
  bool consistent(double tol = 1e-9) const;

 private:
  void build() const;

  std::vector<Vec> vertices_;
  mutable bool built_ = false;
  mutable bool full_ = false;
  mutable std::vector<std::pair<Vec, double>> facets_;
  mutable std::vector<Vec> extreme_;
};

/// Minkowski sum sum_i w_i P_i.
Polytope weighted_sum(const std::vector<Polytope>& parts, std::span<const double> weights);

/// Order cone Y+ generated by the rows of a matrix; "Rm+" is the nonnegative orthant.
class OrderCone {
 public:
  explicit OrderCone(Matrix generators);
  static OrderCone orthant(std::size_t m);
  /// "Rm+" or generator rows "1,0;1,1".
  static OrderCone parse(std::string_view text, std::size_t m);

  std::size_t dim() const { return gens_.cols(); }
  const Matrix& generators() const { return gens_; }
  bool is_orthant() const { return orthant_; }
  /// y* in the dual cone: <y*, g> >= 0 for every generator.
  bool dual_contains(std::span<const double> ystar, double tol = 1e-12) const;
  /// Deterministic samples of the dual unit sphere intersected with the dual cone.
  std::vector<Vec> dual_sphere_samples(const Norm& dual_norm, std::size_t count, std::uint64_t seed) const;
  std::string to_string() const;

 private:
  Matrix gens_;
  bool orthant_ = false;
};

Polytope subdifferential_at(const MaxAffineFn& phi, std::span<const double> xbar, double tol = 1e-9);

struct InradiusResult {
  double value = 0.0;
  bool exact = true;
  bool full_dimensional = true;
  std::string flag;  // "not full-dimensional", "origin not interior", "sampled upper estimate"
};

/// sup{rho : rho * (dual unit ball) inside P}; facet distances measured with the primal norm.
InradiusResult inradius_origin(const Polytope& p, const Norm& primal, std::size_t samples = 4096,
                               std::uint64_t seed = kDefaultSeed);

/// Structural sharp-minimizer certificate, cross-checked against the sampled descent rate.
Certificate sharp_min_convex(const MaxAffineFn& phi, std::span<const double> xbar, const Norm& norm = Norm::l2(),
                             const SamplingSchedule& s = {});

struct IntradResult {
  double value = 0.0;
  Vec best_ystar;
  std::size_t directions = 0;
  std::size_t skipped = 0;  // y* giving a non-convex scalarization
  bool exact_subdifferentials = true;
};

/// sup over y* in the dual unit sphere and dual cone of the inradius of d(y* o f)(xbar).
IntradResult intrad(const std::vector<MaxAffineFn>& f, std::span<const double> xbar, const OrderCone& cone,
                    const Norm& norm_x, const Norm& norm_y, std::size_t directions = 0,
                    std::uint64_t seed = kDefaultSeed);

/// Vector mapping x -> (f_1(x), ..., f_m(x)).
MappingPtr max_affine_vector(const std::vector<MaxAffineFn>& f, const Norm& norm_x, const Norm& norm_y);

BoundReport sms_convex_scalarization(const std::vector<MaxAffineFn>& f, std::span<const double> xbar,
                                     const OrderCone& cone, const SamplingSchedule& s, const Norm& norm_x = Norm::l2(),
                                     const Norm& norm_y = Norm::l2(), const CalculusOptions& opt = {});

/// Searches y* on the dual unit sphere for a scalarization with descent rate >= tau.
Certificate sms_frechet_scalarization(const Mapping& f, std::span<const double> xbar, std::size_t directions,
                                      const SamplingSchedule& s, double tau = kDefaultTau);

}  // namespace subreg
