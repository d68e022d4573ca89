#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "subreg/error.hpp"
#include "subreg/mappings.hpp"

namespace subreg {

/// Geometric shells r_{k+1} < |x - xbar| <= r_k with r_k = r0 * decay^k, k = 0..K-1.
struct SamplingSchedule {
  double r0 = 0.5;
  double decay = 0.6;
  std::size_t shells = 10;
  std::size_t points = 1024;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
  double radius(std::size_t k) const;
  /// Number of trailing shells used for extrapolation, ceil(K/3).
  std::size_t tail() const { return (shells + 2) / 3; }
};

enum class Bias { OverEstimatesLiminf, UnderEstimatesLimsup };
std::string to_string(Bias b);

struct Witness {
  std::size_t shell = 0;
  Vec x;
  double ratio = 0.0;
};

struct RateEstimate {
  Vec radii;                 // r_0 .. r_K
  Vec shell_min;             // m_k, NaN for skipped shells
  Vec shell_max;             // M_k, NaN for skipped shells
  Vec cumulative;            // c_k = min_{j >= k} m_j
  Vec cumulative_max;        // max_{j >= k} M_j
  double extrapolated = 0.0;
  Bias bias = Bias::OverEstimatesLiminf;
  std::vector<Witness> min_witnesses;  // one per shell
  std::vector<Witness> max_witnesses;
  std::vector<std::string> skipped;    // per-shell evaluation errors (only with skip_eval_errors)
  std::size_t evaluations = 0;
  /// All shell minima >= -1e6: the liminf is not -inf (calm from below).
  bool calm_from_below = true;

  std::size_t shells() const { return shell_min.size(); }
  /// Final-shell minimum m_{K-1}.
  double final_min() const { return shell_min.empty() ? kInf : shell_min.back(); }
};

struct RateOptions {
  bool skip_eval_errors = false;
};

/// Ratio at a sample point x with |x - xbar| = d.
using RatioFn = std::function<double(std::span<const double> x, double d)>;

/// Sample points of shell k; depends only on (xbar, norm, schedule).
std::vector<Vec> shell_points(std::span<const double> xbar, const Norm& norm, const SamplingSchedule& s,
                              std::size_t k);

/// Generic shell engine; shells run in parallel with per-shell seeds.
RateEstimate shell_scan(std::span<const double> xbar, const Norm& norm, const SamplingSchedule& s,
                        const RatioFn& ratio, Bias bias, const RateOptions& opt = {});

/// liminf (phi(x) - phi(xbar)) / |x - xbar|.
RateEstimate descent_rate(const Mapping& phi, std::span<const double> xbar, const SamplingSchedule& s,
                          const RateOptions& opt = {});

/// Descent rate of x -> dist(ybar, F(x)); refuses anchors off the graph.
RateEstimate displacement_rate(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                               const SamplingSchedule& s, const RateOptions& opt = {});

/// limsup |g(x) - g(xbar)| / |x - xbar|.
RateEstimate calmness_modulus_sv(const Mapping& g, std::span<const double> xbar, const SamplingSchedule& s,
                                 const RateOptions& opt = {});

/// Throws AnchorError when dist(ybar, F(xbar)) > tol.
void check_anchor(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar, double tol = 1e-9);

/// Exhaustive grid over the punctured ball (dim <= 2) of an arbitrary ratio; one shell.
RateEstimate oracle_grid(std::span<const double> xbar, const Norm& norm, double radius, std::size_t resolution,
                         const RatioFn& ratio);

/// Grid oracle of the displacement ratio dist(ybar, F(x)) / |x - xbar|.
RateEstimate oracle_rate_grid(const Mapping& f, std::span<const double> xbar, std::span<const double> ybar,
                              double radius, std::size_t resolution);

/// Worker threads for parallel loops: SUBREG_THREADS if set, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads; exceptions rethrown in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace subreg
