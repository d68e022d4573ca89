#include "subreg/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "subreg/error.hpp"

namespace subreg {

namespace {

constexpr double kHoldsTol = 1e-6;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const LinearMap* as_linear(const Mapping& m) {
  if (auto* l = dynamic_cast<const LinearMap*>(&m)) return l;
  if (auto* p = dynamic_cast<const PHMap*>(&m)) return dynamic_cast<const LinearMap*>(p->base().get());
  return nullptr;
}

bool l2_pair(const Mapping& m) {
  return m.norm_in().kind() == NormKind::L2 && m.norm_out().kind() == NormKind::L2;
}

double measured_modulus(const Certificate& c) {
  return c.verdict == Verdict::Refuted ? kInf : c.modulus;
}

}  // namespace

std::string to_string(Holds h) {
  switch (h) {
    case Holds::True: return "true";
    case Holds::False: return "false";
    case Holds::NotApplicable: return "not-applicable";
  }
  return "not-applicable";
}

bool BoundReport::hypotheses_met() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) { return h.satisfied; });
}

double BoundReport::value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw Error("bound report has no value '" + key + "'");
}

void BoundReport::set(const std::string& key, double v, const std::string& ev) {
  for (auto& [k, e] : evidence)
    if (k == key) e = ev;
  for (auto& [k, old] : values)
    if (k == key) {
      old = v;
      return;
    }
  values.emplace_back(key, v);
  evidence.emplace_back(key, ev);
}

std::string BoundReport::evidence_of(const std::string& key) const {
  for (const auto& [k, e] : evidence)
    if (k == key) return e;
  return "sampled";
}

void BoundReport::hypothesis(const std::string& name, bool ok, const std::string& detail) {
  hypotheses.push_back(Hypothesis{name, ok, detail});
}

void BoundReport::finish() {
  bool sampled = false;
  for (const auto& [k, e] : evidence)
    if (k != "bound" && e == "sampled") sampled = true;
  for (auto& [k, e] : evidence)
    if (k == "bound") e = sampled ? "sampled" : "structural";
  if (!hypotheses_met()) {
    holds = Holds::NotApplicable;
    slack = std::isfinite(bound) && std::isfinite(measured) ? bound - measured : kInf;
    return;
  }
  slack = bound - measured;
  if (std::isinf(bound) && std::isinf(measured)) slack = 0.0;
  holds = measured <= bound + kHoldsTol ? Holds::True : Holds::False;
}

Certificate sms_factor(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                       const SamplingSchedule& s, const CalculusOptions& opt) {
  if (const LinearMap* lin = as_linear(f); lin && l2_pair(f)) {
    check_anchor(f, xbar, ybar);
    const ConstantEstimate a = alpha_linear(*lin);
    if (a.exact && a.value >= opt.tau) {
      Certificate c;
      c.verdict = Verdict::Certified;
      c.rate = a.value;
      c.modulus = 1.0 / a.value;
      c.criterion = "injectivity constant (SVD)";
      c.evidence = "structural";
      c.tau = opt.tau;
      return c;
    }
  }
  return certify_sms(f, xbar, ybar, s, opt.tau, opt.rate);
}

bool continuity_check(const Mapping& g, std::span<const double> zbar, const SamplingSchedule& s, double* first_osc,
                      double* last_osc) {
  const Vec g0 = g.value(zbar);
  const RateEstimate osc = shell_scan(
      zbar, g.norm_in(), s,
      [&](std::span<const double> z, double) { return g.norm_out().distance(g.value(z), g0); },
      Bias::UnderEstimatesLimsup);
  const double first = osc.shell_max.front();
  const double last = osc.shell_max.back();
  if (first_osc) *first_osc = first;
  if (last_osc) *last_osc = last;
  const double shrink = std::pow(s.radius(s.shells - 1) / s.r0, 0.25);
  return last <= std::max(1e-12, first * shrink);
}

BoundReport composition_bound(const MappingPtr& g, const MappingPtr& f, std::span<const double> zbar,
                              std::span<const double> ybar, const SamplingSchedule& s, const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "composition";
  const Vec xbar = g->value(zbar);
  check_anchor(*f, xbar, ybar);

  double first = 0, last = 0;
  const bool cont = continuity_check(*g, zbar, s, &first, &last);
  r.hypothesis("g continuous at zbar", cont, "oscillation " + fmt(first) + " on the first shell, " + fmt(last) +
                                                 " on the last");

  Certificate cg = sms_factor(*g, zbar, xbar, s, opt);
  Certificate cf = sms_factor(*f, xbar, ybar, s, opt);
  r.hypothesis("g SMS at zbar", cg.certified(), to_string(cg.verdict));
  r.hypothesis("F SMS at (g(zbar), ybar)", cf.certified(), to_string(cf.verdict));
  r.set("kappa_g", cg.modulus, cg.evidence);
  r.set("kappa_F", cf.modulus, cf.evidence);
  if (cg.certified() && cf.certified()) r.bound = cg.modulus * cf.modulus;
  r.set("bound", r.bound);

  const ComposedMap comp(f, g);
  Certificate cm = certify_sms(comp, zbar, ybar, s, opt.tau, opt.rate);
  r.measured = measured_modulus(cm);
  r.certificates = {std::move(cg), std::move(cf), std::move(cm)};
  r.finish();
  return r;
}

BoundReport perturbation_bound(const MappingPtr& f, const MappingPtr& g, std::span<const double> xbar,
                               std::span<const double> ybar, const SamplingSchedule& s, const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "calm-perturbation";
  Certificate cf = sms_factor(*f, xbar, ybar, s, opt);
  const RateEstimate clm_est = calmness_modulus_sv(*g, xbar, s, opt.rate);
  const double kappa = cf.modulus;
  const double clm = clm_est.extrapolated;
  r.set("kappa_F", kappa, cf.evidence);
  r.set("clm_g", clm);
  r.hypothesis("F SMS at (xbar, ybar)", cf.certified(), to_string(cf.verdict));
  const double product = kappa * clm;
  r.hypothesis("kappa * clm(g) < 1", cf.certified() && product < 1.0, "product " + fmt(product));
  if (cf.certified() && product < 1.0) r.bound = kappa / (1.0 - product);
  r.set("bound", r.bound);

  const SumMap sum(f, g);
  const Vec yshift = add(ybar, g->value(xbar));
  Certificate cm = certify_sms(sum, xbar, yshift, s, opt.tau, opt.rate);
  r.measured = measured_modulus(cm);
  r.certificates = {std::move(cf), std::move(cm)};
  r.finish();
  return r;
}

RateEstimate eps_approx_curve(const Mapping& f, const Mapping& h, std::span<const double> xbar,
                              const SamplingSchedule& s, const RateOptions& opt) {
  if (f.dim_in() != h.dim_in() || f.dim_out() != h.dim_out()) throw DimensionError("f and h dimensions differ");
  const Vec f0 = f.value(xbar);
  return shell_scan(
      xbar, f.norm_in(), s,
      [&](std::span<const double> x, double d) {
        const Vec rem = sub(sub(f.value(x), f0), h.value(sub(x, xbar)));
        return f.norm_out()(rem) / d;
      },
      Bias::UnderEstimatesLimsup, opt);
}

double eps_approx_defect(const Mapping& f, const Mapping& h, std::span<const double> xbar,
                         const SamplingSchedule& s, const RateOptions& opt) {
  return eps_approx_curve(f, h, xbar, s, opt).extrapolated;
}

namespace {

double apply_assumed_eps(BoundReport& r, double measured, const CalculusOptions& opt) {
  if (!opt.assume_eps) return measured;
  if (*opt.assume_eps <= measured) {
    r.notes.push_back("eps assumed by the user (" + fmt(*opt.assume_eps) + ") instead of the measured " +
                      fmt(measured));
    r.set("eps_measured", measured);
    return *opt.assume_eps;
  }
  r.notes.push_back("assumed eps " + fmt(*opt.assume_eps) + " exceeds the measured defect; measured value kept");
  return measured;
}

}  // namespace

BoundReport sms_from_approx(const MappingPtr& f, const MappingPtr& h, std::span<const double> xbar,
                            const SamplingSchedule& s, const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "eps-approximation";
  if (auto* ph = dynamic_cast<const PHMap*>(h.get())) {
    const HomogeneityReport hr = ph->validate();
    r.hypothesis("h positively homogeneous", hr.ok, "worst defect " + fmt(hr.worst_defect));
  }
  const double eps = apply_assumed_eps(r, eps_approx_defect(*f, *h, xbar, s, opt.rate), opt);
  ConstantEstimate a0;
  if (const LinearMap* lin = as_linear(*h); lin && l2_pair(*h)) {
    a0 = alpha_linear(*lin);
  } else {
    a0 = alpha0_ph(*h, opt.sphere_samples);
  }
  r.set("eps", eps);
  r.set("alpha0", a0.value, a0.evidence());
  r.hypothesis("alpha0(h) > eps", a0.value > eps, fmt(a0.value) + " vs " + fmt(eps) + " (" + a0.evidence() + ")");
  if (a0.value > eps) r.bound = 1.0 / (a0.value - eps);
  r.set("bound", r.bound);

  const Vec y0 = f->value(xbar);
  Certificate cm = certify_sms(*f, xbar, y0, s, opt.tau, opt.rate);
  r.measured = measured_modulus(cm);

  // Converse direction: with kappa = measured modulus of f,
  //   derived:    alpha0(h) >= 1/kappa - eps
  //   as printed: alpha0(h) >= 1/(kappa - eps), meaningful only for eps < kappa
  if (cm.certified() && r.measured > 0.0 && std::isfinite(r.measured)) {
    const double kappa = r.measured;
    const double derived = 1.0 / kappa - eps;
    r.set("converse_derived_lower", derived);
    r.set("converse_derived_ok", a0.value >= derived - kHoldsTol ? 1.0 : 0.0);
    if (eps < kappa) {
      const double printed = 1.0 / (kappa - eps);
      r.set("converse_printed_lower", printed);
      const bool ok = a0.value >= printed - kHoldsTol;
      r.set("converse_printed_ok", ok ? 1.0 : 0.0);
      if (!ok) r.notes.push_back("converse as printed (alpha0 >= 1/(kappa - eps)) fails numerically");
    } else {
      r.notes.push_back("converse as printed is vacuous: eps >= kappa");
    }
  }
  r.certificates = {std::move(cm)};
  r.finish();
  return r;
}

RateEstimate prederivative_curve(const Mapping& f, const FanMap& h, std::span<const double> xbar, double delta,
                                 const SamplingSchedule& s, const RateOptions& opt) {
  if (!(delta > 0.0)) throw Error("prederivative radius delta must be positive");
  if (f.dim_in() != h.dim_in() || f.dim_out() != h.dim_out()) throw DimensionError("f and H dimensions differ");
  SamplingSchedule local = s;
  local.r0 = delta;
  const Vec f0 = f.value(xbar);
  return shell_scan(
      xbar, f.norm_in(), local,
      [&](std::span<const double> x, double d) {
        const Vec v = sub(x, xbar);
        return h.dist_to_image(sub(f.value(x), f0), v) / d;
      },
      Bias::UnderEstimatesLimsup, opt);
}

double prederivative_defect(const Mapping& f, const FanMap& h, std::span<const double> xbar, double delta,
                            const SamplingSchedule& s, const RateOptions& opt) {
  return prederivative_curve(f, h, xbar, delta, s, opt).cumulative_max.front();
}

bool defect_decays(const RateEstimate& curve) {
  const double first = curve.shell_max.front();
  double tail = 0.0;
  const std::size_t K = curve.shells();
  for (std::size_t k = K - (K + 2) / 3; k < K; ++k) tail = std::max(tail, curve.shell_max[k]);
  return tail <= 1e-12 || tail <= 0.5 * first;
}

BoundReport sms_from_prederivative(const MappingPtr& f, const std::shared_ptr<const FanMap>& h,
                                   std::span<const double> xbar, double delta, const SamplingSchedule& s,
                                   const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "outer-prederivative";
  const RateEstimate curve = prederivative_curve(*f, *h, xbar, delta, s, opt.rate);
  const double eps = apply_assumed_eps(r, curve.cumulative_max.front(), opt);
  const ConstantEstimate a = alpha_fan(*h, opt.sphere_samples);
  r.set("eps", eps);
  r.set("eps_tail", curve.extrapolated);
  r.set("alpha_fan", a.value, a.evidence());
  r.hypothesis("alpha(H) > eps", a.value > eps, fmt(a.value) + " vs " + fmt(eps) + " (" + a.evidence() + ")");
  if (a.value > eps) r.bound = 1.0 / (a.value - eps);
  r.set("bound", r.bound);

  const Vec y0 = f->value(xbar);
  Certificate cm = certify_sms(*f, xbar, y0, s, opt.tau, opt.rate);
  r.measured = measured_modulus(cm);
  if (defect_decays(curve) && a.value > 0.0) {
    // vanishing remainder: the bound sharpens to 1/alpha(H); at finite radius the
    // measurement is compared with the tail defect still present
    r.strict_bound = 1.0 / a.value;
    const double tail_eps = curve.extrapolated;
    const double finite_radius = a.value > tail_eps ? 1.0 / (a.value - tail_eps) : kInf;
    r.strict_holds = r.measured <= finite_radius + kHoldsTol;
    r.notes.push_back("defect decays with the radius: sharper bound 1/alpha(H) applies");
  }
  r.certificates = {std::move(cm)};
  r.finish();
  return r;
}

JacobianCheck fd_jacobian(const Mapping& f, std::span<const double> x, double h) {
  const std::size_t n = f.dim_in(), m = f.dim_out();
  const Vec f0 = f.value(x);
  auto central = [&](double step, Matrix* fwd, Matrix* bwd) {
    Matrix j(m, n);
    for (std::size_t c = 0; c < n; ++c) {
      Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
      xp[c] += step;
      xm[c] -= step;
      const Vec fp = f.value(xp), fm = f.value(xm);
      for (std::size_t i = 0; i < m; ++i) {
        j(i, c) = (fp[i] - fm[i]) / (2.0 * step);
        if (fwd) (*fwd)(i, c) = (fp[i] - f0[i]) / step;
        if (bwd) (*bwd)(i, c) = (f0[i] - fm[i]) / step;
      }
    }
    return j;
  };
  Matrix fwd(m, n), bwd(m, n);
  JacobianCheck out;
  out.jacobian = central(h, &fwd, &bwd);
  const Matrix half = central(h / 2.0, nullptr, nullptr);
  double scale_j = 1.0, gap_r = 0.0, gap_s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < n; ++c) {
      scale_j = std::max(scale_j, std::abs(out.jacobian(i, c)));
      gap_r = std::max(gap_r, std::abs(out.jacobian(i, c) - half(i, c)));
      gap_s = std::max(gap_s, std::abs(fwd(i, c) - bwd(i, c)));
    }
  out.richardson_gap = gap_r / scale_j;
  out.one_sided_gap = gap_s / scale_j;
  out.differentiable = out.richardson_gap <= 1e-4 && out.one_sided_gap <= 1e-2;
  return out;
}

BoundReport smooth_kernel_check(const MappingPtr& f, std::span<const double> xbar, const SamplingSchedule& s,
                                double fd_step, const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "smooth-kernel";
  const JacobianCheck jc = fd_jacobian(*f, xbar, fd_step);
  r.hypothesis("f differentiable at xbar", jc.differentiable,
               "step agreement " + fmt(jc.richardson_gap) + ", one-sided gap " + fmt(jc.one_sided_gap));
  if (!jc.differentiable) r.notes.push_back("differentiability check failed: use the prederivative criterion");
  const ConstantEstimate a = alpha_linear(jc.jacobian, f->norm_in(), f->norm_out());
  r.set("alpha_J", a.value, a.evidence());
  const bool kernel_trivial = a.value > 1e-8;
  r.hypothesis("kernel of the derivative trivial", kernel_trivial, "alpha(J) = " + fmt(a.value) + " (" +
                                                                       a.evidence() + ")");
  if (kernel_trivial) r.bound = 1.0 / a.value;
  r.set("bound", r.bound);
  const Vec y0 = f->value(xbar);
  Certificate cm = certify_sms(*f, xbar, y0, s, opt.tau, opt.rate);
  r.measured = measured_modulus(cm);
  r.certificates = {std::move(cm)};
  r.finish();
  return r;
}

}  // namespace subreg
