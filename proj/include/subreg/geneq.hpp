#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "subreg/convexity.hpp"

namespace subreg {

/// Base f(p, x): R^k x R^n -> R^m.
using BaseFn = std::function<Vec(std::span<const double> p, std::span<const double> x)>;

/// Normal cone to the box [lower, upper]; empty outside the box.
MappingPtr normal_cone_box(Vec lower, Vec upper);
/// x =>> {0} in R^m.
MappingPtr zero_field(std::size_t n, std::size_t m);

/// 0 in f(p, x) + T(x), solved for x near xbar as p moves near pbar.
struct GenEqProblem {
  std::size_t n = 1;  // x dimension
  std::size_t k = 1;  // p dimension
  std::size_t m = 1;  // equation dimension
  BaseFn f;
  MappingPtr field;   // T: R^n =>> R^m
  Vec pbar;
  Vec xbar;
  /// Fan for the approximated equation; the finite-difference Jacobian in x when unset.
  std::shared_ptr<const FanMap> fan;
  double delta = 0.5;  // x radius
  double zeta = 0.5;   // p radius
  Norm norm_x;
  Norm norm_p;
  Norm norm_y;
  /// Components of f(pbar, .) as max-affine functions, with the order cone.
  std::vector<MaxAffineFn> maxaffine;
  std::optional<OrderCone> cone;

  void validate() const;
  std::shared_ptr<const FanMap> fan_or_jacobian() const;
};

double residual(const GenEqProblem& prob, std::span<const double> p, std::span<const double> x);

struct SolutionSample {
  Vec p;
  std::vector<Vec> solutions;
  Vec residuals;
  std::string method;
};

/// Parameter grid: `per_axis` points per axis in the zeta-ball around pbar, pbar excluded.
std::vector<Vec> parameter_grid(const GenEqProblem& prob, std::size_t per_axis = 33);

/// Multi-start grid search with golden-section (1-D) or compass (2-D, 3-D) refinement in the delta-ball.
std::vector<SolutionSample> trace_solution_map(const GenEqProblem& prob, const std::vector<Vec>& pgrid,
                                               double delta);

/// max over traced p and solutions inside the delta-ball of |x - xbar| / |p - pbar|.
double measured_solution_calmness(const GenEqProblem& prob, const std::vector<SolutionSample>& samples,
                                  double* witness_p = nullptr);

/// Shell curve of sup_p dist(f(p,x) - f(p,xbar), H(x - xbar)) / |x - xbar| over the delta-ball.
RateEstimate partial_prederivative_curve(const GenEqProblem& prob, const SamplingSchedule& s,
                                         std::size_t p_per_axis = 9);
double partial_prederivative_defect(const GenEqProblem& prob, const SamplingSchedule& s);

/// Calmness modulus of p -> f(p, x) at pbar.
RateEstimate parameter_calmness(const GenEqProblem& prob, std::span<const double> x, const SamplingSchedule& s);

BoundReport isolated_calmness_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                    const CalculusOptions& opt = {});
BoundReport single_valued_field_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                      const CalculusOptions& opt = {});
BoundReport convex_scalarized_geneq_bound(const GenEqProblem& prob, const SamplingSchedule& s,
                                          const CalculusOptions& opt = {});

}  // namespace subreg
