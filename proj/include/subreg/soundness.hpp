#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "subreg/geneq.hpp"

namespace subreg {

struct SoundnessCase {
  std::size_t index = 0;
  std::string description;
  BoundReport report;
};

struct SoundnessSummary {
  std::string theorem;
  std::size_t instances = 0;
  std::size_t held = 0;         // holds == true
  std::size_t not_applicable = 0;
  double worst_excess = -kInf;  // max of measured - bound over applicable cases
  std::vector<SoundnessCase> cases;

  bool all_hold() const { return held == instances; }
};

/// Bound producers with a randomized family: composition, calm-perturbation, eps-approximation,
/// outer-prederivative, smooth-kernel, geneq-isolated-calmness, geneq-single-valued-field,
/// geneq-convex-scalarization.
const std::vector<std::string>& soundness_theorems();

/// Accepts the descriptive names and the short ids thm3.1, thm3.2, thm4.1, thm4.2, cor4.1,
/// thm5.1, cor5.2, thm5.2; throws Error for anything else.
std::string canonical_theorem(std::string_view id);

/// `count` seeded hypothesis-satisfying random instances of one family.
SoundnessSummary soundness_suite(std::string_view theorem, std::size_t count, std::uint64_t seed,
                                 const SamplingSchedule& s = {});

/// Fixed worked instances of one family.
SoundnessSummary catalog_suite(std::string_view theorem, const SamplingSchedule& s = {});

/// Random convex max-affine function on R^2 with `pieces` pieces through the origin (b = 0).
MaxAffineFn random_max_affine_2d(std::size_t pieces, std::uint64_t seed);

}  // namespace subreg
