#include "subreg/moduli.hpp"

#include <cmath>

#include "subreg/error.hpp"

namespace subreg {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified-numerically";
    case Verdict::Refuted: return "refuted-with-witness";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double loglog_slope(const RateEstimate& est) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < est.shells(); ++k) {
    const double m = est.shell_min[k];
    if (!(m > 0.0) || !std::isfinite(m)) continue;
    const double lx = std::log(est.radii[k]);
    const double ly = std::log(m);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 3) return 0.0;
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (den == 0.0) return 0.0;
  return (static_cast<double>(n) * sxy - sx * sy) / den;
}

Certificate verdict_from_rate(RateEstimate est, double tau, const std::string& property,
                              const std::string& criterion) {
  if (!(tau > 0.0)) throw Error("threshold tau must be positive");
  Certificate c;
  c.property = property;
  c.criterion = criterion;
  c.tau = tau;
  c.rate = est.extrapolated;

  bool all_positive = true;
  for (double m : est.shell_min)
    if (!(m > 0.0)) all_positive = false;
  c.loglog_slope = loglog_slope(est);
  c.diverging = all_positive && c.loglog_slope <= -0.9;

  const std::size_t K = est.shells();
  bool tail_small = K >= 3;
  for (std::size_t k = K >= 3 ? K - 3 : 0; k < K; ++k)
    if (!(est.shell_min[k] <= tau * 1e-2)) tail_small = false;

  if (est.extrapolated >= tau) {
    c.verdict = Verdict::Certified;
    c.modulus = c.diverging ? 0.0 : reciprocal(est.extrapolated);
    if (c.diverging) c.notes.push_back("shell minima grow like 1/r (log-log slope heuristic): rate taken as +inf");
  } else if (tail_small) {
    c.verdict = Verdict::Refuted;
    c.modulus = kInf;
    for (std::size_t k = K - 3; k < K; ++k) c.witnesses.push_back(est.min_witnesses[k]);
  } else {
    c.verdict = Verdict::Inconclusive;
    c.modulus = est.extrapolated > 0.0 ? reciprocal(est.extrapolated) : kInf;
  }
  c.estimate = std::move(est);
  return c;
}

Certificate certify_sms(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                        const SamplingSchedule& s, double tau, const RateOptions& opt) {
  return verdict_from_rate(displacement_rate(f, xbar, ybar, s, opt), tau, "SMS", "displacement-rate reciprocal");
}

Certificate isolated_calmness_via_inverse(const Mapping& f, std::span<const double> xbar,
                                          std::span<const double> ybar, const SamplingSchedule& s, double tau,
                                          const RateOptions& opt) {
  Certificate c = certify_sms(f, xbar, ybar, s, tau, opt);
  c.property = "isolated-calmness";
  c.criterion = "inverse-map equivalence";
  return c;
}

Certificate sharp_min_check(const MappingPtr& phi, std::span<const double> xbar, const SamplingSchedule& s,
                            double tau, const RateOptions& opt) {
  Certificate c = verdict_from_rate(descent_rate(*phi, xbar, s, opt), tau, "sharp-minimizer", "descent rate");
  // the sharpness constant is the rate itself, never the reciprocal
  c.modulus = c.verdict == Verdict::Refuted ? kInf : c.modulus;
  const EpigraphMap epi(phi);
  const Vec ybar{phi->value(xbar)[0]};
  Certificate e = certify_sms(epi, xbar, ybar, s, tau, opt);
  e.criterion = "epigraphical mapping";
  c.companions.push_back(std::move(e));
  return c;
}

}  // namespace subreg
