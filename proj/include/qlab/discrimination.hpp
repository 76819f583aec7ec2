#pragma once

// The linear-in-POVM subproblem
//
//   maximize  sum_b Tr(E_b A_b)  over POVMs {E_b},   A_b PSD,
//
// with its dual  minimize Tr Y  subject to  Y >= A_b for all b.
// Every solver returns a primal POVM together with a dual-feasible Y, so
// Tr(Y) is always a valid upper bound on the optimum.

#include "qlab/core.hpp"

#include <optional>
#include <span>

namespace qlab {

enum class DiscriminationMethod { kSingle, kHelstrom, kCommuting, kBarrier, kTrivial };

const char* to_string(DiscriminationMethod m);

struct DiscriminationResult {
  Povm povm;
  double value = 0.0;     // sum_b Tr(E_b A_b)
  HermitianOp dual;       // Y with Y >= A_b (up to roundoff)
  double dual_gap = 0.0;  // Tr(Y) - value
  int iterations = 0;
  DiscriminationMethod method = DiscriminationMethod::kTrivial;
};

struct BarrierConfig {
  double gap_tolerance = 1e-10;  // relative to max_b ||A_b||
  int max_iterations = 2000;     // Newton steps
};

/// Exact two-outcome solution: E_1 projects onto the nonnegative eigenspace of
/// A_1 - A_2; Y = A_2 + (A_1 - A_2)_+.
DiscriminationResult helstrom(const HermitianOp& a1, const HermitianOp& a2);

/// Exact pointwise-max assignment in a joint eigenbasis; nullopt when the
/// operators do not commute (within 1e-12 relative).
std::optional<DiscriminationResult> discrimination_commuting(std::span<const HermitianOp> ops);

/// Log-barrier Newton method on the dual. Primal iterates E_b = mu (Y - A_b)^-1
/// are renormalized to exact POVMs; small-eigenvalue purification and dual
/// repair (Y = herm(sum_b A_b E_b) shifted to feasibility) tighten the gap.
/// Stops once the certified gap is below gap_tolerance or after
/// max_iterations Newton steps; the best primal and dual found are returned.
DiscriminationResult discrimination_barrier(std::span<const HermitianOp> ops, const BarrierConfig& config = {});

/// Dispatch: one operator -> {I}; two -> Helstrom; commuting -> pointwise max;
/// otherwise the barrier method. Throws InputError on empty input, mixed
/// dimensions, or when every operator vanishes.
DiscriminationResult discrimination_step(std::span<const HermitianOp> ops, const BarrierConfig& config = {});

}  // namespace qlab
