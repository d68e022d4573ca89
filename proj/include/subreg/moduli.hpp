#pragma once

#include <string>
#include <vector>

#include "subreg/rates.hpp"

namespace subreg {

inline constexpr double kDefaultTau = 0.05;

enum class Verdict { Certified, Refuted, Inconclusive };
std::string to_string(Verdict v);

struct Certificate {
  std::string property = "SMS";  // SMS | isolated-calmness | sharp-minimizer
  Verdict verdict = Verdict::Inconclusive;
  double modulus = kInf;         // extended real; 1/rate with 1/inf = 0
  double rate = 0.0;             // extrapolated rate (or exact constant for structural evidence)
  std::string criterion;
  std::string evidence = "sampled";  // sampled | structural
  double tau = kDefaultTau;
  bool diverging = false;        // shell minima grow like 1/r: rate treated as +inf
  double loglog_slope = 0.0;
  std::vector<Witness> witnesses;
  RateEstimate estimate;
  std::vector<Certificate> companions;
  std::vector<std::string> notes;

  bool certified() const { return verdict == Verdict::Certified; }
};

/// Least-squares slope of log m_k against log r_k over shells with positive finite minima.
double loglog_slope(const RateEstimate& est);

/// Turns a liminf estimate into a verdict: certified when the extrapolated rate is >= tau,
/// refuted when the last three shell minima are <= tau/100, inconclusive otherwise.
Certificate verdict_from_rate(RateEstimate est, double tau, const std::string& property,
                              const std::string& criterion);

Certificate certify_sms(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                        const SamplingSchedule& s, double tau = kDefaultTau, const RateOptions& opt = {});

/// Isolated calmness of F^{-1} at (ybar, xbar), read off the SMS certificate of F.
Certificate isolated_calmness_via_inverse(const Mapping& f, std::span<const double> xbar,
                                          std::span<const double> ybar, const SamplingSchedule& s,
                                          double tau = kDefaultTau, const RateOptions& opt = {});

/// Local sharp minimizer test; the SMS certificate of the epigraphical mapping is attached
/// as a companion.
Certificate sharp_min_check(const MappingPtr& phi, std::span<const double> xbar, const SamplingSchedule& s,
                            double tau = kDefaultTau, const RateOptions& opt = {});

}  // namespace subreg
