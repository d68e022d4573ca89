#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subreg/linalg.hpp"

namespace subreg {

enum class NormKind { L1, L2, Linf };

/// l1 / l2 / linf norm with optional positive diagonal weights: |x| = |W x|_p.
class Norm {
 public:
  Norm() = default;
  explicit Norm(NormKind kind, Vec weights = {});

  static Norm l1() { return Norm(NormKind::L1); }
  static Norm l2() { return Norm(NormKind::L2); }
  static Norm linf() { return Norm(NormKind::Linf); }
  static Norm parse(std::string_view tag);

  NormKind kind() const { return kind_; }
  const Vec& weights() const { return weights_; }
  bool weighted() const { return !weights_.empty(); }

  double operator()(std::span<const double> x) const;
  double distance(std::span<const double> a, std::span<const double> b) const;

  /// Dual norm: l1 <-> linf, l2 <-> l2, with reciprocal weights.
  Norm dual() const;

  /// Rescale x so that |x| = 1; x must be nonzero.
  Vec normalize(std::span<const double> x) const;

  std::string tag() const;
  bool operator==(const Norm& other) const = default;

 private:
  NormKind kind_ = NormKind::L2;
  Vec weights_;
};

/// Points on the unit sphere of `norm` in R^dim. Deterministic per seed.
///   dim 1: alternating +1, -1.
///   dim 2: uniform angular grid of `count` angles starting at angle 0.
///   dim >= 3: axis vectors, sign vectors (both normalized), then Gaussian draws.
std::vector<Vec> unit_sphere_samples(std::size_t dim, const Norm& norm, std::size_t count,
                                     std::uint64_t seed);

/// Deterministic child seed for stream `index` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace subreg
