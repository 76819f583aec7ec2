#pragma once

// Quantumness of a set of states: the smallest accessible fidelity over all
// priors, bracketed from both sides.

#include "qlab/fidelity.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qlab {

struct QuantumnessConfig {
  /// Brackets evaluated during the simplex search (lighter verification).
  FidelityConfig search;
  /// Brackets recomputed at the starting prior and the best search priors.
  FidelityConfig final;
  int final_candidates = 3;  // best distinct search priors re-verified
  int starts = 4;  // uniform prior plus starts - 1 Dirichlet draws
  int max_evaluations = 80;  // per start
  double initial_step = 0.25;
  double tolerance = 1e-7;  // stop once the simplex values agree this closely
  /// Optional per-state mask; masked weights are held at zero.
  std::vector<bool> fixed_zero;

  QuantumnessConfig();
};

struct PriorProbe {
  std::vector<double> prior;
  double lower = 0.0;
  double upper = 0.0;
};

struct QuantumnessReport {
  double value_lower = 0.0;
  double value_upper = 0.0;
  std::vector<double> worst_prior;
  FidelityBracket worst_bracket;  // full-verification bracket at worst_prior
  std::vector<PriorProbe> trace;  // search probes in evaluation order
};

/// Multistart Nelder-Mead over the probability simplex minimizing the upper
/// end of the fidelity bracket (clip + renormalize keeps iterates feasible).
/// The starting prior and the best search priors are re-verified with the
/// final configuration; value_upper is the smallest of those upper bounds and
/// value_lower the smallest lower bound seen at any probed prior.
QuantumnessReport quantumness(std::span<const PureState> states, const QuantumnessConfig& config, std::uint64_t seed);

struct ExtremePrior {
  double value = 0.0;
  std::vector<double> prior;
};

/// Fidelity at the point mass on the first state, confirmed by the seesaw:
/// the maximum of F over priors.
ExtremePrior max_fidelity_over_priors(std::span<const PureState> states, std::uint64_t seed = 0);

}  // namespace qlab
