#include "subreg/geneq.hpp"

#include <algorithm>
#include <cmath>

#include "subreg/error.hpp"

namespace subreg {

namespace {

constexpr double kAcceptResidual = 1e-7;
constexpr double kMergeRadius = 1e-5;
constexpr double kBoundaryTol = 1e-12;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Evenly spaced points in [c - r, c + r], `count` odd so that c is included exactly.
Vec axis_grid(double c, double r, std::size_t count) {
  Vec g(count);
  const double half = static_cast<double>(count - 1) / 2.0;
  for (std::size_t i = 0; i < count; ++i) g[i] = c + r * (static_cast<double>(i) - half) / half;
  g[(count - 1) / 2] = c;
  return g;
}

/// Cartesian grid over the box c +- r filtered to the ball of `norm`.
std::vector<Vec> ball_grid(std::span<const double> c, double r, std::size_t per_axis, const Norm& norm) {
  const std::size_t d = c.size();
  std::vector<Vec> axes;
  for (std::size_t i = 0; i < d; ++i) axes.push_back(axis_grid(c[i], r, per_axis));
  std::vector<Vec> out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = axes[i][idx[i]];
    if (norm.distance(x, c) <= r * (1.0 + 1e-12)) out.push_back(std::move(x));
    std::size_t i = 0;
    while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == d) break;
  }
  return out;
}

struct Candidate {
  Vec x;
  double r;
};

std::vector<Candidate> cluster(std::vector<Candidate> pts, const Norm& norm) {
  std::sort(pts.begin(), pts.end(), [](const Candidate& a, const Candidate& b) { return a.r < b.r; });
  std::vector<Candidate> out;
  for (auto& c : pts) {
    bool merged = false;
    for (const auto& o : out)
      if (norm.distance(c.x, o.x) <= kMergeRadius) {
        merged = true;
        break;
      }
    if (!merged) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
  return out;
}

Vec point_of(const SetDescriptor& s) {
  if (const auto* fp = std::get_if<FinitePoints>(&s.variant()); fp && fp->points.size() == 1) return fp->points[0];
  throw Error("field is not single-valued at this point");
}

/// T as a single-valued function, when its images are one-point sets.
MappingPtr single_valued_view(const MappingPtr& field) {
  if (field->single_valued()) return field;
  return std::make_shared<FunctionMap>(
      "field-values", [field](std::span<const double> x) { return point_of(field->image(x)); }, field->dim_in(),
      field->dim_out(), field->norm_in(), field->norm_out());
}

bool field_single_valued_near(const GenEqProblem& prob, const SamplingSchedule& s) {
  if (prob.field->single_valued()) return true;
  try {
    (void)point_of(prob.field->image(prob.xbar));
    SamplingSchedule local = s;
    local.r0 = prob.delta;
    local.points = 16;
    for (std::size_t k = 0; k < local.shells; ++k)
      for (const Vec& x : shell_points(prob.xbar, prob.norm_x, local, k)) (void)point_of(prob.field->image(x));
  } catch (const Error&) {
    return false;
  }
  return true;
}

/// x =>> f(pbar, xbar) + H(x - xbar) + T(x).
MappingPtr approximated_map(const GenEqProblem& prob, const std::shared_ptr<const FanMap>& fan) {
  const Vec f0 = prob.f(prob.pbar, prob.xbar);
  const Vec xbar = prob.xbar;
  const MappingPtr field = prob.field;
  auto fn = [f0, xbar, field, fan](std::span<const double> x) {
    const SetDescriptor tx = field->image(x);
    const Vec v = sub(x, xbar);
    const std::vector<Vec> hv = fan->generator_images(v);
    if (fan->hull() == FanHull::FiniteSet || hv.size() == 1) {
      std::vector<SetDescriptor> parts;
      for (const auto& h : hv) parts.push_back(SetDescriptor::translate(tx, add(f0, h)));
      return parts.size() == 1 ? parts.front() : SetDescriptor::union_of(std::move(parts));
    }
    const Vec t = point_of(tx);
    std::vector<Vec> pts;
    for (const auto& h : hv) pts.push_back(add(add(f0, h), t));
    return SetDescriptor::hull(std::move(pts));
  };
  return std::make_shared<SetFunctionMap>("approximated-equation", fn, prob.n, prob.m, prob.norm_x, prob.norm_y);
}

/// sup of the defect curve over shells reaching radius <= rho.
double defect_within(const RateEstimate& curve, double rho) {
  const std::size_t K = curve.shells();
  std::size_t k0 = 0;
  while (k0 + 1 < K && curve.radii[k0 + 1] >= rho) ++k0;
  double e = 0.0;
  for (std::size_t k = k0; k < K; ++k)
    if (!std::isnan(curve.shell_max[k])) e = std::max(e, curve.shell_max[k]);
  return e;
}

struct Measured {
  double value = 0.0;
  double inner = 0.0;   // over the parameters nearest pbar
  double inner_rho = 0.0;
  bool isolated = true;
  std::size_t solutions = 0;
};

Measured measure(const GenEqProblem& prob) {
  Measured m;
  const std::vector<Vec> grid = parameter_grid(prob);
  const auto samples = trace_solution_map(prob, grid, prob.delta);
  m.value = measured_solution_calmness(prob, samples);
  double dmin = kInf;
  for (const auto& p : grid) dmin = std::min(dmin, prob.norm_p.distance(p, prob.pbar));
  for (const auto& smp : samples) {
    m.solutions += smp.solutions.size();
    const double dp = prob.norm_p.distance(smp.p, prob.pbar);
    if (dp > dmin * (1.0 + 1e-9)) continue;
    for (const auto& x : smp.solutions) {
      const double dx = prob.norm_x.distance(x, prob.xbar);
      if (dx > prob.delta * (1.0 + 1e-12)) continue;
      m.inner = std::max(m.inner, dx / dp);
      m.inner_rho = std::max(m.inner_rho, dx);
    }
  }
  const auto at_pbar = trace_solution_map(prob, {prob.pbar}, prob.delta);
  for (const auto& x : at_pbar.front().solutions)
    if (prob.norm_x.distance(x, prob.xbar) > kMergeRadius) m.isolated = false;
  return m;
}

void record_measurement(BoundReport& r, const Measured& m) {
  r.measured = m.value;
  r.set("solutions_traced", static_cast<double>(m.solutions));
  r.set("xbar_isolated", m.isolated ? 1.0 : 0.0);
  if (!m.isolated) r.notes.push_back("another solution exists at pbar inside the delta-ball");
}

}  // namespace

MappingPtr normal_cone_box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.empty()) throw DimensionError("normal cone box bounds mismatch");
  const std::size_t n = lower.size();
  auto fn = [lower, upper](std::span<const double> x) {
    const std::size_t d = x.size();
    Vec lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] < lower[i] - kBoundaryTol || x[i] > upper[i] + kBoundaryTol) return SetDescriptor::empty(d);
      const bool at_lo = std::abs(x[i] - lower[i]) <= kBoundaryTol;
      const bool at_hi = std::abs(x[i] - upper[i]) <= kBoundaryTol;
      lo[i] = at_lo ? -kInf : 0.0;
      hi[i] = at_hi ? kInf : 0.0;
    }
    return SetDescriptor::box(std::move(lo), std::move(hi));
  };
  return std::make_shared<SetFunctionMap>("normal-cone-box", fn, n, n);
}

MappingPtr zero_field(std::size_t n, std::size_t m) {
  return std::make_shared<SetFunctionMap>(
      "zero", [m](std::span<const double>) { return SetDescriptor::point(Vec(m, 0.0)); }, n, m);
}

void GenEqProblem::validate() const {
  if (!f) throw Error("generalized equation: base f is not set");
  if (!field) throw Error("generalized equation: field T is not set");
  if (pbar.size() != k || xbar.size() != n) throw DimensionError("generalized equation: anchor dimension mismatch");
  if (field->dim_in() != n || field->dim_out() != m) throw DimensionError("generalized equation: field dimension mismatch");
  if (f(pbar, xbar).size() != m) throw DimensionError("generalized equation: base value dimension mismatch");
  if (!(delta > 0.0) || !(zeta > 0.0)) throw Error("generalized equation: radii must be positive");
  const double r0 = residual(*this, pbar, xbar);
  if (!(r0 <= 1e-9)) throw AnchorError("xbar does not solve the equation at pbar: residual " + fmt(r0), r0);
  if (fan && (fan->dim_in() != n || fan->dim_out() != m)) throw DimensionError("fan dimension mismatch");
}

std::shared_ptr<const FanMap> GenEqProblem::fan_or_jacobian() const {
  if (fan) return fan;
  const Vec p = pbar;
  const BaseFn base = f;
  const FunctionMap fx(
      "f(pbar,.)", [base, p](std::span<const double> x) { return base(p, x); }, n, m, norm_x, norm_y);
  const JacobianCheck jc = fd_jacobian(fx, xbar);
  return std::make_shared<FanMap>(std::vector<Matrix>{jc.jacobian}, FanHull::FiniteSet, norm_x, norm_y);
}

double residual(const GenEqProblem& prob, std::span<const double> p, std::span<const double> x) {
  if (p.size() != prob.k || x.size() != prob.n) throw DimensionError("residual: dimension mismatch");
  const Vec fx = prob.f(p, x);
  return dist_point_set(scale(fx, -1.0), prob.field->image(x), prob.norm_y);
}

std::vector<Vec> parameter_grid(const GenEqProblem& prob, std::size_t per_axis) {
  std::vector<Vec> g = ball_grid(prob.pbar, prob.zeta, per_axis, prob.norm_p);
  std::erase_if(g, [&](const Vec& p) { return prob.norm_p.distance(p, prob.pbar) == 0.0; });
  return g;
}

std::vector<SolutionSample> trace_solution_map(const GenEqProblem& prob, const std::vector<Vec>& pgrid,
                                               double delta) {
  if (prob.n > 3) throw DimensionError("solution tracing supports n <= 3");
  std::vector<SolutionSample> out(pgrid.size());
  parallel_for(pgrid.size(), [&](std::size_t pi) {
    const Vec& p = pgrid[pi];
    auto res = [&](std::span<const double> x) { return residual(prob, p, x); };
    std::vector<Candidate> found;
    SolutionSample smp;
    smp.p = p;
    if (prob.n == 1) {
      smp.method = "grid+golden-section";
      const Vec g = axis_grid(prob.xbar[0], delta, 2001);
      Vec r(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) r[i] = res(Vec{g[i]});
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(r[i])) continue;
        const bool left = i == 0 || r[i] <= r[i - 1];
        const bool right = i + 1 == g.size() || r[i] <= r[i + 1];
        if (!(left && right)) continue;
        Candidate best{{g[i]}, r[i]};
        double a = g[i == 0 ? 0 : i - 1], b = g[i + 1 == g.size() ? i : i + 1];
        const double phi = 0.6180339887498949;
        double c = b - phi * (b - a), d = a + phi * (b - a);
        auto rv = [&](double x) {
          const double v = res(Vec{x});
          return std::isfinite(v) ? v : 1e300;
        };
        double fc = rv(c), fd = rv(d);
        for (int it = 0; it < 200 && (b - a) > 1e-16 * std::max(1.0, std::abs(a)); ++it) {
          if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rv(c);
          } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rv(d);
          }
        }
        const double xm = fc <= fd ? c : d;
        const double fm = std::min(fc, fd);
        if (fm < best.r) best = Candidate{{xm}, fm};
        if (best.r <= kAcceptResidual) found.push_back(std::move(best));
      }
    } else {
      smp.method = "grid+compass";
      const std::size_t per_axis = prob.n == 2 ? 41 : 15;
      const double spacing = 2.0 * delta / static_cast<double>(per_axis - 1);
      std::vector<Candidate> starts;
      for (auto& x : ball_grid(prob.xbar, delta, per_axis, prob.norm_x)) {
        const double v = res(x);
        if (std::isfinite(v)) starts.push_back(Candidate{std::move(x), v});
      }
      std::sort(starts.begin(), starts.end(), [](const Candidate& a, const Candidate& b) { return a.r < b.r; });
      if (starts.size() > 24) starts.resize(24);
      for (auto& st : starts) {
        Vec x = st.x;
        double fx = st.r;
        double step = spacing;
        while (step > 1e-14 && fx > 1e-15) {
          bool improved = false;
          for (std::size_t i = 0; i < prob.n && !improved; ++i)
            for (double sgn : {1.0, -1.0}) {
              Vec y = x;
              y[i] += sgn * step;
              if (prob.norm_x.distance(y, prob.xbar) > delta) continue;
              const double fy = res(y);
              if (fy < fx) {
                x = std::move(y);
                fx = fy;
                improved = true;
                break;
              }
            }
          if (!improved) step *= 0.5;
        }
        if (fx <= kAcceptResidual) found.push_back(Candidate{std::move(x), fx});
      }
    }
    for (auto& c : cluster(std::move(found), prob.norm_x)) {
      smp.solutions.push_back(std::move(c.x));
      smp.residuals.push_back(c.r);
    }
    out[pi] = std::move(smp);
  });
  return out;
}

double measured_solution_calmness(const GenEqProblem& prob, const std::vector<SolutionSample>& samples,
                                  double* witness_p) {
  double best = 0.0;
  for (const auto& smp : samples) {
    const double dp = prob.norm_p.distance(smp.p, prob.pbar);
    if (!(dp > 0.0)) continue;
    for (const auto& x : smp.solutions) {
      const double dx = prob.norm_x.distance(x, prob.xbar);
      if (dx > prob.delta * (1.0 + 1e-12)) continue;
      if (dx / dp > best) {
        best = dx / dp;
        if (witness_p) *witness_p = smp.p[0];
      }
    }
  }
  return best;
}

RateEstimate partial_prederivative_curve(const GenEqProblem& prob, const SamplingSchedule& s,
                                         std::size_t p_per_axis) {
  const auto fan = prob.fan_or_jacobian();
  std::vector<Vec> ps = ball_grid(prob.pbar, prob.zeta, p_per_axis, prob.norm_p);
  std::vector<Vec> fbar;
  for (const auto& p : ps) fbar.push_back(prob.f(p, prob.xbar));
  SamplingSchedule local = s;
  local.r0 = prob.delta;
  return shell_scan(
      prob.xbar, prob.norm_x, local,
      [&](std::span<const double> x, double d) {
        const Vec v = sub(x, prob.xbar);
        double worst = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i)
          worst = std::max(worst, fan->dist_to_image(sub(prob.f(ps[i], x), fbar[i]), v) / d);
        return worst;
      },
      Bias::UnderEstimatesLimsup);
}

double partial_prederivative_defect(const GenEqProblem& prob, const SamplingSchedule& s) {
  return partial_prederivative_curve(prob, s).cumulative_max.front();
}

RateEstimate parameter_calmness(const GenEqProblem& prob, std::span<const double> x, const SamplingSchedule& s) {
  const Vec xv(x.begin(), x.end());
  const BaseFn base = prob.f;
  const FunctionMap fp(
      "f(.,x)", [base, xv](std::span<const double> p) { return base(p, xv); }, prob.k, prob.m, prob.norm_p,
      prob.norm_y);
  return calmness_modulus_sv(fp, prob.pbar, s);
}

BoundReport isolated_calmness_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                    const CalculusOptions& opt) {
  prob.validate();
  BoundReport r;
  r.theorem = "geneq-isolated-calmness";
  const auto fan = prob.fan_or_jacobian();
  const RateEstimate curve = partial_prederivative_curve(prob, s);
  double eps = curve.cumulative_max.front();
  if (opt.assume_eps && *opt.assume_eps <= eps) {
    r.notes.push_back("eps assumed by the user (" + fmt(*opt.assume_eps) + ") instead of the measured " + fmt(eps));
    eps = *opt.assume_eps;
  }
  const MappingPtr phi = approximated_map(prob, fan);
  Certificate ck = certify_sms(*phi, prob.xbar, Vec(prob.m, 0.0), s, opt.tau, opt.rate);
  const double kappa = ck.modulus;
  const double clm = parameter_calmness(prob, prob.xbar, s).extrapolated;
  r.set("eps", eps);
  r.set("kappa", kappa);
  r.set("clm_f", clm);
  r.hypothesis("H + T SMS at (xbar, 0)", ck.certified(), to_string(ck.verdict));
  r.hypothesis("eps * kappa < 1", ck.certified() && eps * kappa < 1.0, "product " + fmt(eps * kappa));
  if (r.hypotheses_met()) r.bound = clm * kappa / (1.0 - eps * kappa);
  r.set("bound", r.bound);

  const Measured m = measure(prob);
  record_measurement(r, m);
  if (ck.certified() && defect_decays(curve)) {
    // vanishing defect: the product clm * kappa bounds the limit; at the innermost
    // parameters it is compared with the defect left at the radius actually reached
    r.strict_bound = clm * kappa;
    const double e_rho = defect_within(curve, m.inner_rho);
    const double finite = e_rho * kappa < 1.0 ? clm * kappa / (1.0 - e_rho * kappa) : kInf;
    r.strict_holds = m.inner <= finite + 1e-6;
    r.set("measured_inner", m.inner);
    r.notes.push_back("defect decays with the radius: product bound clm * kappa applies");
  }
  r.certificates = {std::move(ck)};
  r.finish();
  return r;
}

BoundReport single_valued_field_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                      const CalculusOptions& opt) {
  prob.validate();
  BoundReport r;
  r.theorem = "geneq-single-valued-field";
  const bool sv = field_single_valued_near(prob, s);
  r.hypothesis("T single-valued near xbar", sv);
  double clm_t = kInf;
  if (sv) clm_t = calmness_modulus_sv(*single_valued_view(prob.field), prob.xbar, s, opt.rate).extrapolated;
  const auto fan = prob.fan_or_jacobian();
  const ConstantEstimate a = alpha_fan(*fan, opt.sphere_samples);
  double eps = partial_prederivative_defect(prob, s);
  if (opt.assume_eps && *opt.assume_eps <= eps) {
    r.notes.push_back("eps assumed by the user (" + fmt(*opt.assume_eps) + ") instead of the measured " + fmt(eps));
    eps = *opt.assume_eps;
  }
  const double clm = parameter_calmness(prob, prob.xbar, s).extrapolated;
  r.set("alpha_fan", a.value);
  r.set("clm_T", clm_t);
  r.set("eps", eps);
  r.set("clm_f", clm);
  const double margin = a.value - clm_t - eps;
  r.hypothesis("alpha(H) - clm(T) > eps", sv && margin > 0.0, "margin " + fmt(margin));
  if (r.hypotheses_met()) r.bound = clm / margin;
  r.set("bound", r.bound);
  record_measurement(r, measure(prob));
  r.finish();
  return r;
}

BoundReport convex_scalarized_geneq_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                          const CalculusOptions& opt) {
  prob.validate();
  BoundReport r;
  r.theorem = "geneq-convex-scalarization";
  if (prob.maxaffine.size() != prob.m) throw Error("scalarized bound needs one max-affine component per equation");
  const OrderCone cone = prob.cone ? *prob.cone : OrderCone::orthant(prob.m);

  // f(pbar, .) must coincide with the declared components
  double mismatch = 0.0;
  {
    SamplingSchedule local = s;
    local.r0 = prob.delta;
    local.points = 16;
    std::vector<Vec> xs{prob.xbar};
    for (std::size_t k = 0; k < local.shells; ++k)
      for (auto& x : shell_points(prob.xbar, prob.norm_x, local, k)) xs.push_back(std::move(x));
    for (const auto& x : xs) {
      const Vec fx = prob.f(prob.pbar, x);
      for (std::size_t i = 0; i < prob.m; ++i) mismatch = std::max(mismatch, std::abs(fx[i] - prob.maxaffine[i](x)));
    }
  }
  r.hypothesis("f(pbar, .) matches its max-affine components", mismatch <= 1e-9, "max gap " + fmt(mismatch));

  const IntradResult ir = intrad(prob.maxaffine, prob.xbar, cone, prob.norm_x, prob.norm_y);
  const bool sv = field_single_valued_near(prob, s);
  r.hypothesis("T single-valued near xbar", sv);
  double clm_t = kInf;
  if (sv) clm_t = calmness_modulus_sv(*single_valued_view(prob.field), prob.xbar, s, opt.rate).extrapolated;

  // uniform calmness of f(., x) over x near xbar: sampled sup over 16 points
  double clm_f = parameter_calmness(prob, prob.xbar, s).extrapolated;
  for (const Vec& u : unit_sphere_samples(prob.n, prob.norm_x, 15, s.seed)) {
    const double t = prob.delta * 0.5;
    clm_f = std::max(clm_f, parameter_calmness(prob, axpy(t, u, prob.xbar), s).extrapolated);
  }
  r.set("intrad", ir.value);
  r.set("clm_T", clm_t);
  r.set("clm_f_uniform", clm_f);
  r.hypothesis("0 interior to some d(y* o f(pbar, .))(xbar)", ir.value > 0.0, "intrad " + fmt(ir.value));
  r.hypothesis("clm(T) / intrad < 1", sv && ir.value > 0.0 && clm_t < ir.value,
               "ratio " + fmt(ir.value > 0.0 ? clm_t / ir.value : kInf));
  if (r.hypotheses_met()) r.bound = clm_f / (ir.value - clm_t);
  r.set("bound", r.bound);
  record_measurement(r, measure(prob));
  r.finish();
  return r;
}

}  // namespace subreg
