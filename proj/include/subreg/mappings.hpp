#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "subreg/expr.hpp"
#include "subreg/linalg.hpp"
#include "subreg/norm.hpp"
#include "subreg/sets.hpp"

namespace subreg {

inline constexpr std::uint64_t kDefaultSeed = 20240601;
inline constexpr double kDefaultDomainHalfWidth = 10.0;

/// Evaluable mapping R^n =>> R^m with declared norms on source and target.
class Mapping {
 public:
  Mapping(std::size_t dim_in, std::size_t dim_out, Norm norm_in, Norm norm_out);
  virtual ~Mapping() = default;

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  const Norm& norm_in() const { return norm_in_; }
  const Norm& norm_out() const { return norm_out_; }

  virtual std::string kind() const = 0;
  virtual bool single_valued() const { return false; }

  /// f(x) for single-valued kinds; throws Error otherwise.
  Vec value(std::span<const double> x) const;

  /// F(x) as a descriptor; single-valued kinds give a one-point set.
  SetDescriptor image(std::span<const double> x) const;

  /// dist(y, F(x)) in the target norm.
  double dist_to_image(std::span<const double> y, std::span<const double> x) const;

  void set_domain(Vec lower, Vec upper);
  const Vec& domain_lower() const { return lower_; }
  const Vec& domain_upper() const { return upper_; }

 protected:
  virtual Vec value_impl(std::span<const double> x) const;
  virtual SetDescriptor image_impl(std::span<const double> x) const;
  virtual double dist_impl(std::span<const double> y, std::span<const double> x) const;

 private:
  void check_domain(std::span<const double> x) const;

  std::size_t dim_in_;
  std::size_t dim_out_;
  Norm norm_in_;
  Norm norm_out_;
  Vec lower_;
  Vec upper_;
};

using MappingPtr = std::shared_ptr<const Mapping>;

/// Single-valued mapping given by a callable.
class FunctionMap : public Mapping {
 public:
  using Fn = std::function<Vec(std::span<const double>)>;
  FunctionMap(std::string name, Fn fn, std::size_t n, std::size_t m, Norm in = {}, Norm out = {});
  std::string kind() const override { return name_; }
  bool single_valued() const override { return true; }

 protected:
  Vec value_impl(std::span<const double> x) const override;

 private:
  std::string name_;
  Fn fn_;
};

/// Single-valued mapping x -> e(x, p) with p frozen.
class ExprMap : public Mapping {
 public:
  ExprMap(Expr e, std::size_t n, std::size_t m, Norm in = {}, Norm out = {}, Vec p = {});
  std::string kind() const override { return "expr"; }
  bool single_valued() const override { return true; }
  const Expr& expr() const { return e_; }

 protected:
  Vec value_impl(std::span<const double> x) const override;

 private:
  Expr e_;
  Vec p_;
};

class LinearMap : public Mapping {
 public:
  explicit LinearMap(Matrix a, Norm in = {}, Norm out = {});
  std::string kind() const override { return "linear"; }
  bool single_valued() const override { return true; }
  const Matrix& matrix() const { return a_; }

 protected:
  Vec value_impl(std::span<const double> x) const override;

 private:
  Matrix a_;
};

struct HomogeneityReport {
  bool ok = true;
  double worst_defect = 0.0;
  Vec worst_u;
  double worst_t = 0.0;
};

/// Positively homogeneous single-valued mapping h(tu) = t h(u), t > 0.
class PHMap : public Mapping {
 public:
  explicit PHMap(MappingPtr base);
  std::string kind() const override { return "ph"; }
  bool single_valued() const override { return true; }
  const MappingPtr& base() const { return base_; }

  /// Checks h(0) = 0 and h(tu) = t h(u) for t in {0.5, 2, 10} within 1e-9 on sphere samples.
  HomogeneityReport validate(std::size_t count = 256, std::uint64_t seed = kDefaultSeed) const;

 protected:
  Vec value_impl(std::span<const double> x) const override;

 private:
  MappingPtr base_;
};

enum class FanHull { FiniteSet, ConvexHull };

/// H(x) = {L_i x} or conv{L_i x} over a finite generator list.
class FanMap : public Mapping {
 public:
  FanMap(std::vector<Matrix> generators, FanHull hull, Norm in = {}, Norm out = {});
  std::string kind() const override { return "fan"; }
  const std::vector<Matrix>& generators() const { return gens_; }
  FanHull hull() const { return hull_; }
  std::vector<Vec> generator_images(std::span<const double> x) const;

 protected:
  SetDescriptor image_impl(std::span<const double> x) const override;
  double dist_impl(std::span<const double> y, std::span<const double> x) const override;

 private:
  std::vector<Matrix> gens_;
  FanHull hull_;
};

/// Set-valued rule written in the set grammar.
class RuleMap : public Mapping {
 public:
  RuleMap(SetExpr rule, std::size_t n, std::size_t m, Norm in = {}, Norm out = {}, Vec p = {});
  std::string kind() const override { return "setvalued"; }
  const SetExpr& rule() const { return rule_; }

 protected:
  SetDescriptor image_impl(std::span<const double> x) const override;

 private:
  SetExpr rule_;
  Vec p_;
};

/// Set-valued mapping given by a callable.
class SetFunctionMap : public Mapping {
 public:
  using Fn = std::function<SetDescriptor(std::span<const double>)>;
  SetFunctionMap(std::string name, Fn fn, std::size_t n, std::size_t m, Norm in = {}, Norm out = {});
  std::string kind() const override { return name_; }

 protected:
  SetDescriptor image_impl(std::span<const double> x) const override;

 private:
  std::string name_;
  Fn fn_;
};

/// F o g with g single-valued.
class ComposedMap : public Mapping {
 public:
  ComposedMap(MappingPtr outer, MappingPtr inner);
  std::string kind() const override { return "composed"; }
  bool single_valued() const override { return outer_->single_valued(); }

 protected:
  Vec value_impl(std::span<const double> x) const override;
  SetDescriptor image_impl(std::span<const double> x) const override;
  double dist_impl(std::span<const double> y, std::span<const double> x) const override;

 private:
  MappingPtr outer_;
  MappingPtr inner_;
};

/// F + g with g single-valued.
class SumMap : public Mapping {
 public:
  SumMap(MappingPtr f, MappingPtr g);
  std::string kind() const override { return "sum"; }
  bool single_valued() const override { return f_->single_valued(); }

 protected:
  Vec value_impl(std::span<const double> x) const override;
  SetDescriptor image_impl(std::span<const double> x) const override;
  double dist_impl(std::span<const double> y, std::span<const double> x) const override;

 private:
  MappingPtr f_;
  MappingPtr g_;
};

/// Epigraphical mapping x -> [phi(x), +inf) of a scalar function.
class EpigraphMap : public Mapping {
 public:
  explicit EpigraphMap(MappingPtr phi);
  std::string kind() const override { return "epigraph"; }

 protected:
  SetDescriptor image_impl(std::span<const double> x) const override;
  double dist_impl(std::span<const double> y, std::span<const double> x) const override;

 private:
  MappingPtr phi_;
};

/// Injectivity-type constant with its evidence: exact (structural) or a sampled
/// minimum, which is an upper estimate of the true infimum.
struct ConstantEstimate {
  double value = 0.0;
  bool exact = false;
  std::size_t samples = 0;
  Vec argmin;
  std::string evidence() const { return exact ? "structural" : "sampled"; }
};

/// alpha(L) = inf_{|u|=1} |Lu|; exact (SVD) under l2 / weighted l2, sampled otherwise.
ConstantEstimate alpha_linear(const Matrix& a, const Norm& in, const Norm& out,
                              std::size_t count = 10000, std::uint64_t seed = kDefaultSeed);
ConstantEstimate alpha_linear(const LinearMap& l, std::size_t count = 10000,
                              std::uint64_t seed = kDefaultSeed);

/// beta(L) = alpha(L^T) with the dual norms.
ConstantEstimate beta_linear(const Matrix& a, const Norm& in, const Norm& out,
                             std::size_t count = 10000, std::uint64_t seed = kDefaultSeed);
ConstantEstimate beta_linear(const LinearMap& l, std::size_t count = 10000,
                             std::uint64_t seed = kDefaultSeed);

/// Sampled inf of |h(u)| over the unit sphere, followed by a local polish.
ConstantEstimate alpha0_ph(const Mapping& h, std::size_t count = 4096,
                           std::uint64_t seed = kDefaultSeed);

/// inf_{|u|=1} dist(0, H(u)); exact for finite-set fans under l2, sampled otherwise.
ConstantEstimate alpha_fan(const FanMap& h, std::size_t count = 4096,
                           std::uint64_t seed = kDefaultSeed);

/// Sampled infimum of a positive function on the unit sphere of `norm` with local polish.
ConstantEstimate sphere_infimum(std::size_t dim, const Norm& norm,
                                const std::function<double(std::span<const double>)>& f,
                                std::size_t count, std::uint64_t seed);

}  // namespace subreg
