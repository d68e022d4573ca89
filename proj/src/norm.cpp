#include "subreg/norm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "subreg/error.hpp"

namespace subreg {

Norm::Norm(NormKind kind, Vec weights) : kind_(kind), weights_(std::move(weights)) {
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w)) throw Error("norm weights must be positive and finite");
}

Norm Norm::parse(std::string_view tag) {
  if (tag == "l1") return l1();
  if (tag == "l2") return l2();
  if (tag == "linf") return linf();
  throw Error("unknown norm '" + std::string(tag) + "' (expected l1, l2 or linf)");
}

double Norm::operator()(std::span<const double> x) const {
  if (weighted() && weights_.size() != x.size()) throw DimensionError("norm weight dimension mismatch");
  auto w = [&](std::size_t i) { return weighted() ? weights_[i] * x[i] : x[i]; };
  double r = 0.0;
  switch (kind_) {
    case NormKind::L1:
      for (std::size_t i = 0; i < x.size(); ++i) r += std::abs(w(i));
      return r;
    case NormKind::L2: {
      // scaled accumulation keeps tiny radii (1e-12) accurate
      double m = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(w(i)));
      if (m == 0.0 || !std::isfinite(m)) return m;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = w(i) / m;
        r += t * t;
      }
      return m * std::sqrt(r);
    }
    case NormKind::Linf:
      for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(w(i)));
      return r;
  }
  return r;
}

double Norm::distance(std::span<const double> a, std::span<const double> b) const {
  return (*this)(sub(a, b));
}

Norm Norm::dual() const {
  Vec w;
  w.reserve(weights_.size());
  for (double v : weights_) w.push_back(1.0 / v);
  switch (kind_) {
    case NormKind::L1: return Norm(NormKind::Linf, std::move(w));
    case NormKind::L2: return Norm(NormKind::L2, std::move(w));
    case NormKind::Linf: return Norm(NormKind::L1, std::move(w));
  }
  return *this;
}

Vec Norm::normalize(std::span<const double> x) const {
  const double n = (*this)(x);
  if (!(n > 0.0)) throw Error("cannot normalize the zero vector");
  return scale(x, 1.0 / n);
}

std::string Norm::tag() const {
  switch (kind_) {
    case NormKind::L1: return "l1";
    case NormKind::L2: return "l2";
    case NormKind::Linf: return "linf";
  }
  return "l2";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Vec> unit_sphere_samples(std::size_t dim, const Norm& norm, std::size_t count,
                                     std::uint64_t seed) {
  if (dim == 0 || count == 0) throw Error("unit_sphere_samples: dim and count must be positive");
  std::vector<Vec> out;
  out.reserve(count);
  if (dim == 1) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(norm.normalize(Vec{i % 2 == 0 ? 1.0 : -1.0}));
    return out;
  }
  if (dim == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      double c = std::cos(theta);
      double s = std::sin(theta);
      // exact axis points when the grid hits them
      if (4 * i == count || 4 * i == 3 * count) c = 0.0;
      if (2 * i == count) s = 0.0;
      out.push_back(norm.normalize(Vec{c, s}));
    }
    return out;
  }
  // Structured part: axis vectors, then sign vectors (extreme points of the
  // l1 and linf balls), capped at half the budget.
  const std::size_t structured_cap = count / 2;
  for (std::size_t i = 0; i < dim && out.size() < structured_cap; ++i) {
    for (double sgn : {1.0, -1.0}) {
      if (out.size() >= structured_cap) break;
      Vec e(dim, 0.0);
      e[i] = sgn;
      out.push_back(norm.normalize(e));
    }
  }
  std::mt19937_64 rng(derive_seed(seed, 0));
  if (dim < 63) {
    const std::uint64_t patterns = std::uint64_t{1} << dim;
    if (patterns <= structured_cap - std::min(structured_cap, out.size())) {
      for (std::uint64_t m = 0; m < patterns; ++m) {
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = (m >> i) & 1U ? -1.0 : 1.0;
        out.push_back(norm.normalize(v));
      }
    } else {
      std::bernoulli_distribution coin(0.5);
      while (out.size() < structured_cap) {
        Vec v(dim);
        for (auto& x : v) x = coin(rng) ? -1.0 : 1.0;
        out.push_back(norm.normalize(v));
      }
    }
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (out.size() < count) {
    Vec v(dim);
    for (auto& x : v) x = gauss(rng);
    if (norm2(v) < 1e-12) continue;
    out.push_back(norm.normalize(v));
  }
  return out;
}

}  // namespace subreg
