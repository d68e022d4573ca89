#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subreg/moduli.hpp"

namespace subreg {

enum class Holds { True, False, NotApplicable };
std::string to_string(Holds h);

struct Hypothesis {
  std::string name;
  bool satisfied = false;
  std::string detail;
};

/// Certified bound next to an independently measured modulus.
struct BoundReport {
  std::string theorem;
  std::vector<std::pair<std::string, double>> values;  // hypothesis values in computation order
  std::vector<std::pair<std::string, std::string>> evidence;  // per value: sampled | structural | exact
  std::vector<Hypothesis> hypotheses;
  double bound = kInf;
  double measured = kInf;
  double slack = kInf;
  Holds holds = Holds::NotApplicable;
  /// Sharper bound available when the defect vanishes with the radius.
  std::optional<double> strict_bound;
  std::optional<bool> strict_holds;
  std::vector<Certificate> certificates;
  std::vector<std::string> notes;

  bool hypotheses_met() const;
  double value(const std::string& key) const;
  void set(const std::string& key, double v, const std::string& evidence = "sampled");
  std::string evidence_of(const std::string& key) const;
  void hypothesis(const std::string& name, bool ok, const std::string& detail = "");
  /// Sets slack and the holds flag from bound, measured and the hypotheses.
  void finish();
};

/// Options shared by the bound producers.
struct CalculusOptions {
  double tau = kDefaultTau;
  RateOptions rate;
  std::size_t sphere_samples = 4096;
  /// Downward override of a measured defect; recorded in the report notes.
  std::optional<double> assume_eps;
};

/// SMS certificate of a factor: exact constant for linear operators under l2, sampled otherwise.
Certificate sms_factor(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                       const SamplingSchedule& s, const CalculusOptions& opt = {});

/// Oscillation test for continuity of g at zbar on the shells.
bool continuity_check(const Mapping& g, std::span<const double> zbar, const SamplingSchedule& s,
                      double* first_osc = nullptr, double* last_osc = nullptr);

BoundReport composition_bound(const MappingPtr& g, const MappingPtr& f, std::span<const double> zbar,
                              std::span<const double> ybar, const SamplingSchedule& s,
                              const CalculusOptions& opt = {});

BoundReport perturbation_bound(const MappingPtr& f, const MappingPtr& g, std::span<const double> xbar,
                               std::span<const double> ybar, const SamplingSchedule& s,
                               const CalculusOptions& opt = {});

/// Calmness curve of the remainder x -> f(x) - f(xbar) - h(x - xbar).
RateEstimate eps_approx_curve(const Mapping& f, const Mapping& h, std::span<const double> xbar,
                              const SamplingSchedule& s, const RateOptions& opt = {});
double eps_approx_defect(const Mapping& f, const Mapping& h, std::span<const double> xbar,
                         const SamplingSchedule& s, const RateOptions& opt = {});

BoundReport sms_from_approx(const MappingPtr& f, const MappingPtr& h, std::span<const double> xbar,
                            const SamplingSchedule& s, const CalculusOptions& opt = {});

/// Shell curve of dist(f(xbar+v) - f(xbar), H(v)) / |v| over the punctured delta-ball.
RateEstimate prederivative_curve(const Mapping& f, const FanMap& h, std::span<const double> xbar, double delta,
                                 const SamplingSchedule& s, const RateOptions& opt = {});
double prederivative_defect(const Mapping& f, const FanMap& h, std::span<const double> xbar, double delta,
                            const SamplingSchedule& s, const RateOptions& opt = {});
/// The defect decays with the radius: tail maximum <= half the first-shell maximum, or ~0.
bool defect_decays(const RateEstimate& curve);

BoundReport sms_from_prederivative(const MappingPtr& f, const std::shared_ptr<const FanMap>& h,
                                   std::span<const double> xbar, double delta, const SamplingSchedule& s,
                                   const CalculusOptions& opt = {});

struct JacobianCheck {
  Matrix jacobian;
  bool differentiable = false;
  double richardson_gap = 0.0;  // |J_h - J_{h/2}| relative
  double one_sided_gap = 0.0;   // |forward - backward| relative
};

/// Central-difference Jacobian at steps h and h/2 with a one-sided consistency check.
JacobianCheck fd_jacobian(const Mapping& f, std::span<const double> x, double h = 1e-5);

BoundReport smooth_kernel_check(const MappingPtr& f, std::span<const double> xbar, const SamplingSchedule& s,
                                double fd_step = 1e-5, const CalculusOptions& opt = {});

}  // namespace subreg
