#include "subreg/mappings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subreg/error.hpp"

namespace subreg {

namespace {

double inf_norm(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

Vec weighted_scale(const Vec& weights, std::span<const double> v) {
  Vec r(v.begin(), v.end());
  if (!weights.empty())
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= weights[i];
  return r;
}

}  // namespace

// ---------------------------------------------------------------- Mapping

Mapping::Mapping(std::size_t dim_in, std::size_t dim_out, Norm norm_in, Norm norm_out)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      norm_in_(std::move(norm_in)),
      norm_out_(std::move(norm_out)),
      lower_(dim_in, -kDefaultDomainHalfWidth),
      upper_(dim_in, kDefaultDomainHalfWidth) {
  if (dim_in == 0 || dim_out == 0) throw DimensionError("mapping dimensions must be positive");
}

void Mapping::set_domain(Vec lower, Vec upper) {
  if (lower.size() != dim_in_ || upper.size() != dim_in_) throw DimensionError("domain box dimension mismatch");
  lower_ = std::move(lower);
  upper_ = std::move(upper);
}

void Mapping::check_domain(std::span<const double> x) const {
  if (x.size() != dim_in_)
    throw DimensionError("point of dimension " + std::to_string(x.size()) + " passed to a mapping on R^" +
                         std::to_string(dim_in_));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower_[i] - 1e-12 && x[i] <= upper_[i] + 1e-12))
      throw Error("point outside the domain box (coordinate " + std::to_string(i + 1) + ")");
}

Vec Mapping::value(std::span<const double> x) const {
  check_domain(x);
  if (!single_valued()) throw Error("mapping of kind '" + kind() + "' is not single-valued");
  Vec v = value_impl(x);
  if (v.size() != dim_out_)
    throw DimensionError("mapping value has dimension " + std::to_string(v.size()) + ", declared " +
                         std::to_string(dim_out_));
  return v;
}

SetDescriptor Mapping::image(std::span<const double> x) const {
  check_domain(x);
  return image_impl(x);
}

double Mapping::dist_to_image(std::span<const double> y, std::span<const double> x) const {
  check_domain(x);
  if (y.size() != dim_out_) throw DimensionError("target point dimension mismatch");
  return dist_impl(y, x);
}

Vec Mapping::value_impl(std::span<const double>) const {
  throw Error("mapping of kind '" + kind() + "' is not single-valued");
}

SetDescriptor Mapping::image_impl(std::span<const double> x) const {
  return SetDescriptor::point(value(x));
}

double Mapping::dist_impl(std::span<const double> y, std::span<const double> x) const {
  if (single_valued()) return norm_out_.distance(y, value(x));
  return dist_point_set(y, image_impl(x), norm_out_);
}

// ---------------------------------------------------------------- concrete kinds

FunctionMap::FunctionMap(std::string name, Fn fn, std::size_t n, std::size_t m, Norm in, Norm out)
    : Mapping(n, m, std::move(in), std::move(out)), name_(std::move(name)), fn_(std::move(fn)) {}

Vec FunctionMap::value_impl(std::span<const double> x) const { return fn_(x); }

ExprMap::ExprMap(Expr e, std::size_t n, std::size_t m, Norm in, Norm out, Vec p)
    : Mapping(n, m, std::move(in), std::move(out)), e_(std::move(e)), p_(std::move(p)) {
  if (e_.max_x_index() > n) throw DimensionError("expression references x" + std::to_string(e_.max_x_index()) +
                                                 " but the mapping is declared on R^" + std::to_string(n));
}

Vec ExprMap::value_impl(std::span<const double> x) const { return e_.eval(Env{x, p_}); }

LinearMap::LinearMap(Matrix a, Norm in, Norm out)
    : Mapping(a.cols(), a.rows(), std::move(in), std::move(out)), a_(std::move(a)) {
  for (std::size_t i = 0; i < a_.rows(); ++i)
    for (std::size_t j = 0; j < a_.cols(); ++j)
      if (!std::isfinite(a_(i, j))) throw Error("linear operator entries must be finite");
}

Vec LinearMap::value_impl(std::span<const double> x) const { return a_.apply(x); }

PHMap::PHMap(MappingPtr base)
    : Mapping(base->dim_in(), base->dim_out(), base->norm_in(), base->norm_out()), base_(std::move(base)) {
  if (!base_->single_valued()) throw Error("p.h. mapping must be single-valued");
}

Vec PHMap::value_impl(std::span<const double> x) const { return base_->value(x); }

HomogeneityReport PHMap::validate(std::size_t count, std::uint64_t seed) const {
  HomogeneityReport rep;
  const Vec zero(dim_in(), 0.0);
  const double at_zero = inf_norm(base_->value(zero));
  if (at_zero > 1e-9) {
    rep.ok = false;
    rep.worst_defect = at_zero;
    rep.worst_u = zero;
    return rep;
  }
  for (const Vec& u : unit_sphere_samples(dim_in(), norm_in(), count, seed)) {
    const Vec hu = base_->value(u);
    for (double t : {0.5, 2.0, 10.0}) {
      const Vec tu = scale(u, t);
      const Vec htu = base_->value(tu);
      const Vec expect = scale(hu, t);
      const double d = inf_norm(sub(htu, expect)) / std::max(1.0, inf_norm(expect));
      if (d > rep.worst_defect) {
        rep.worst_defect = d;
        rep.worst_u = u;
        rep.worst_t = t;
      }
    }
  }
  rep.ok = rep.worst_defect <= 1e-9;
  return rep;
}

FanMap::FanMap(std::vector<Matrix> generators, FanHull hull, Norm in, Norm out)
    : Mapping(generators.empty() ? 1 : generators[0].cols(), generators.empty() ? 1 : generators[0].rows(),
              std::move(in), std::move(out)),
      gens_(std::move(generators)),
      hull_(hull) {
  if (gens_.empty()) throw Error("fan needs at least one generator");
  for (const auto& g : gens_)
    if (g.rows() != dim_out() || g.cols() != dim_in()) throw DimensionError("fan generators must share one shape");
}

std::vector<Vec> FanMap::generator_images(std::span<const double> x) const {
  std::vector<Vec> out;
  out.reserve(gens_.size());
  for (const auto& g : gens_) out.push_back(g.apply(x));
  return out;
}

SetDescriptor FanMap::image_impl(std::span<const double> x) const {
  auto imgs = generator_images(x);
  return hull_ == FanHull::FiniteSet ? SetDescriptor::points(std::move(imgs)) : SetDescriptor::hull(std::move(imgs));
}

double FanMap::dist_impl(std::span<const double> y, std::span<const double> x) const {
  if (hull_ == FanHull::FiniteSet) {
    double best = kInf;
    for (const auto& img : generator_images(x)) best = std::min(best, norm_out().distance(y, img));
    return best;
  }
  return dist_point_set(y, image_impl(x), norm_out());
}

RuleMap::RuleMap(SetExpr rule, std::size_t n, std::size_t m, Norm in, Norm out, Vec p)
    : Mapping(n, m, std::move(in), std::move(out)), rule_(std::move(rule)), p_(std::move(p)) {
  if (rule_.max_x_index() > n) throw DimensionError("set rule references x" + std::to_string(rule_.max_x_index()) +
                                                    " but the mapping is declared on R^" + std::to_string(n));
}

SetDescriptor RuleMap::image_impl(std::span<const double> x) const {
  SetDescriptor s = rule_.eval(Env{x, p_});
  if (s.dim() != dim_out())
    throw DimensionError("set rule produced a subset of R^" + std::to_string(s.dim()) + ", declared R^" +
                         std::to_string(dim_out()));
  return s;
}

SetFunctionMap::SetFunctionMap(std::string name, Fn fn, std::size_t n, std::size_t m, Norm in, Norm out)
    : Mapping(n, m, std::move(in), std::move(out)), name_(std::move(name)), fn_(std::move(fn)) {}

SetDescriptor SetFunctionMap::image_impl(std::span<const double> x) const { return fn_(x); }

ComposedMap::ComposedMap(MappingPtr outer, MappingPtr inner)
    : Mapping(inner->dim_in(), outer->dim_out(), inner->norm_in(), outer->norm_out()),
      outer_(std::move(outer)),
      inner_(std::move(inner)) {
  if (!inner_->single_valued()) throw Error("composition requires a single-valued inner mapping");
  if (inner_->dim_out() != outer_->dim_in()) throw DimensionError("composition dimension mismatch");
  set_domain(inner_->domain_lower(), inner_->domain_upper());
}

Vec ComposedMap::value_impl(std::span<const double> x) const { return outer_->value(inner_->value(x)); }
SetDescriptor ComposedMap::image_impl(std::span<const double> x) const { return outer_->image(inner_->value(x)); }
double ComposedMap::dist_impl(std::span<const double> y, std::span<const double> x) const {
  return outer_->dist_to_image(y, inner_->value(x));
}

SumMap::SumMap(MappingPtr f, MappingPtr g)
    : Mapping(f->dim_in(), f->dim_out(), f->norm_in(), f->norm_out()), f_(std::move(f)), g_(std::move(g)) {
  if (!g_->single_valued()) throw Error("sum requires a single-valued perturbation");
  if (g_->dim_in() != f_->dim_in() || g_->dim_out() != f_->dim_out()) throw DimensionError("sum dimension mismatch");
  set_domain(f_->domain_lower(), f_->domain_upper());
}

Vec SumMap::value_impl(std::span<const double> x) const { return add(f_->value(x), g_->value(x)); }
SetDescriptor SumMap::image_impl(std::span<const double> x) const {
  return SetDescriptor::translate(f_->image(x), g_->value(x));
}
double SumMap::dist_impl(std::span<const double> y, std::span<const double> x) const {
  return f_->dist_to_image(sub(y, g_->value(x)), x);
}

EpigraphMap::EpigraphMap(MappingPtr phi)
    : Mapping(phi->dim_in(), 1, phi->norm_in(), Norm::l2()), phi_(std::move(phi)) {
  if (!phi_->single_valued() || phi_->dim_out() != 1) throw Error("epigraphical mapping needs a scalar function");
  set_domain(phi_->domain_lower(), phi_->domain_upper());
}

SetDescriptor EpigraphMap::image_impl(std::span<const double> x) const {
  return SetDescriptor::interval(phi_->value(x)[0], kInf);
}

double EpigraphMap::dist_impl(std::span<const double> y, std::span<const double> x) const {
  return std::max(phi_->value(x)[0] - y[0], 0.0);
}

// ---------------------------------------------------------------- injectivity constants

ConstantEstimate sphere_infimum(std::size_t dim, const Norm& norm,
                                const std::function<double(std::span<const double>)>& f, std::size_t count,
                                std::uint64_t seed) {
  const std::vector<Vec> samples = unit_sphere_samples(dim, norm, count, seed);
  std::vector<double> vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = f(samples[i]);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min<std::size_t>(8, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

  ConstantEstimate est;
  est.value = vals[order[0]];
  est.argmin = samples[order[0]];
  est.samples = samples.size();
  if (dim == 1) return est;

  // Pattern search on the sphere from the best samples; every accepted point is a
  // genuine unit vector, so the result stays an upper estimate.
  for (std::size_t k = 0; k < keep; ++k) {
    Vec u = samples[order[k]];
    double fu = vals[order[k]];
    double step = 0.05;
    for (int iter = 0; iter < 2000 && step > 1e-10; ++iter) {
      bool improved = false;
      for (std::size_t i = 0; i < dim && !improved; ++i) {
        for (double s : {1.0, -1.0}) {
          Vec v = u;
          v[i] += s * step;
          if (norm(v) <= 1e-14) continue;
          v = norm.normalize(v);
          const double fv = f(v);
          ++est.samples;
          if (fv < fu) {
            u = std::move(v);
            fu = fv;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fu < est.value) {
      est.value = fu;
      est.argmin = u;
    }
  }
  return est;
}

ConstantEstimate alpha_linear(const Matrix& a, const Norm& in, const Norm& out, std::size_t count,
                              std::uint64_t seed) {
  ConstantEstimate est;
  if (a.rows() < a.cols()) {
    // nontrivial kernel in any norm
    est.value = 0.0;
    est.exact = true;
    return est;
  }
  if (in.kind() == NormKind::L2 && out.kind() == NormKind::L2) {
    Matrix scaled = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double wo = out.weighted() ? out.weights()[i] : 1.0;
        const double wi = in.weighted() ? in.weights()[j] : 1.0;
        scaled(i, j) = wo * a(i, j) / wi;
      }
    est.value = smallest_singular_value(scaled);
    est.exact = true;
    return est;
  }
  return sphere_infimum(
      a.cols(), in, [&](std::span<const double> u) { return out(a.apply(u)); }, count, seed);
}

ConstantEstimate alpha_linear(const LinearMap& l, std::size_t count, std::uint64_t seed) {
  return alpha_linear(l.matrix(), l.norm_in(), l.norm_out(), count, seed);
}

ConstantEstimate beta_linear(const Matrix& a, const Norm& in, const Norm& out, std::size_t count,
                             std::uint64_t seed) {
  return alpha_linear(a.transpose(), out.dual(), in.dual(), count, seed);
}

ConstantEstimate beta_linear(const LinearMap& l, std::size_t count, std::uint64_t seed) {
  return beta_linear(l.matrix(), l.norm_in(), l.norm_out(), count, seed);
}

ConstantEstimate alpha0_ph(const Mapping& h, std::size_t count, std::uint64_t seed) {
  if (!h.single_valued()) throw Error("alpha0 needs a single-valued p.h. mapping");
  return sphere_infimum(
      h.dim_in(), h.norm_in(),
      [&](std::span<const double> u) {
        try {
          return h.norm_out()(h.value(u));
        } catch (const EvalError& e) {
          std::string at;
          for (double v : u) at += (at.empty() ? "" : ",") + std::to_string(v);
          throw EvalError(std::string(e.what()) + " at u=(" + at + ")");
        }
      },
      count, seed);
}

ConstantEstimate alpha_fan(const FanMap& h, std::size_t count, std::uint64_t seed) {
  const Norm& in = h.norm_in();
  const Norm& out = h.norm_out();
  if (h.hull() == FanHull::FiniteSet) {
    if (in.kind() == NormKind::L2 && out.kind() == NormKind::L2) {
      // inf_u min_i |L_i u| = min_i inf_u |L_i u|
      ConstantEstimate est;
      est.exact = true;
      est.value = kInf;
      for (const auto& g : h.generators()) est.value = std::min(est.value, alpha_linear(g, in, out).value);
      return est;
    }
    return sphere_infimum(
        h.dim_in(), in,
        [&](std::span<const double> u) {
          double best = kInf;
          for (const auto& img : h.generator_images(u)) best = std::min(best, out(img));
          return best;
        },
        count, seed);
  }
  if (out.kind() != NormKind::L2) throw NoExactOracle("no exact inner oracle: convex-hull fan needs an l2 target norm");
  if (h.generators().size() == 1) return alpha_linear(h.generators()[0], in, out, count, seed);
  return sphere_infimum(
      h.dim_in(), in,
      [&](std::span<const double> u) {
        std::vector<Vec> imgs = h.generator_images(u);
        for (auto& v : imgs) v = weighted_scale(out.weights(), v);
        return norm2(wolfe_min_norm_point(imgs).point);
      },
      count, seed);
}

}  // namespace subreg
