#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subreg/linalg.hpp"
#include "subreg/norm.hpp"

namespace subreg {

/// Closed interval with endpoints in R u {+-inf}.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

class SetDescriptor;

struct EmptySet {
  std::size_t dim = 1;
};
struct FinitePoints {
  std::vector<Vec> points;
};
/// 1-D union of closed intervals; normalized to sorted and disjoint.
struct IntervalUnion {
  std::vector<Interval> intervals;
};
struct Ball {
  Vec center;
  double radius = 0.0;
  Norm norm;
};
/// Product of closed intervals (box with possibly infinite sides).
struct Box {
  Vec lower;
  Vec upper;
};
/// {x : <a_i, x> <= b_i}; zero rows describe the whole space.
struct HalfSpaces {
  Matrix rows;
  Vec offsets;
  std::size_t dim = 1;
};
/// apex + cone generated by the rows of `generators`.
struct TranslatedCone {
  Vec apex;
  Matrix generators;
};
struct ConvexHull {
  std::vector<Vec> points;
};
struct UnionSet {
  std::vector<SetDescriptor> parts;
  std::size_t dim = 1;
};
struct Translated {
  std::shared_ptr<const SetDescriptor> base;
  Vec shift;
};
/// base + radius * B_norm.
struct Inflated {
  std::shared_ptr<const SetDescriptor> base;
  double radius = 0.0;
  Norm norm;
};

/// Immutable closed subset of R^n with an exact distance oracle where one exists.
class SetDescriptor {
 public:
  using Variant = std::variant<EmptySet, FinitePoints, IntervalUnion, Ball, Box, HalfSpaces,
                               TranslatedCone, ConvexHull, UnionSet, Translated, Inflated>;

  SetDescriptor() : v_(EmptySet{1}) {}

  static SetDescriptor empty(std::size_t dim);
  static SetDescriptor point(Vec p);
  static SetDescriptor points(std::vector<Vec> pts);
  static SetDescriptor interval(double lo, double hi);
  static SetDescriptor intervals(std::vector<Interval> parts);
  static SetDescriptor whole(std::size_t dim);
  static SetDescriptor ball(Vec center, double radius, Norm norm);
  static SetDescriptor box(Vec lower, Vec upper);
  static SetDescriptor half_spaces(Matrix rows, Vec offsets);
  static SetDescriptor cone(Vec apex, Matrix generators);
  static SetDescriptor hull(std::vector<Vec> pts);
  static SetDescriptor union_of(std::vector<SetDescriptor> parts);
  static SetDescriptor translate(SetDescriptor base, Vec shift);
  static SetDescriptor inflate(SetDescriptor base, double radius, Norm norm);

  const Variant& variant() const { return v_; }
  std::size_t dim() const;
  bool is_empty() const;

  /// Membership for variants where it is checkable in closed form; nullopt otherwise.
  std::optional<bool> contains(std::span<const double> y, double tol = 1e-12) const;

  /// Set-grammar rendering, e.g. "union(point(0), interval(1, inf))".
  std::string to_string() const;

 private:
  explicit SetDescriptor(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// dist(y, S) measured in `norm`; +inf for the empty set. Throws NoExactOracle for
/// polyhedral / conic / hull descriptors outside the Euclidean (or 1-D) setting.
double dist_point_set(std::span<const double> y, const SetDescriptor& s, const Norm& norm);

}  // namespace subreg
