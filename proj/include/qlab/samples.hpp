#pragma once

// Seeded random instances shared by the verification suites.

#include "qlab/channels.hpp"
#include "qlab/random.hpp"

namespace qlab {

/// Entanglement-breaking map with 1..max_terms Holevo terms: R_k density
/// matrices, X_k PSD rescaled so that sum_k X_k has norm one.
CpMap random_holevo_map(int in_dim, int out_dim, Rng& rng, int max_terms = 3);

/// Ginibre Kraus operators (1..max_operators) rescaled so that
/// ||sum_k A_k* A_k|| = 1.
CpMap random_kraus_map(int in_dim, int out_dim, Rng& rng, int max_operators = 3);

/// Haar pure state on C^{d1 d2} as a density matrix (entangled almost surely).
HermitianOp random_bipartite_pure(int d1, int d2, Rng& rng);

/// min_states..max_states Haar states with a uniform random prior.
Ensemble random_ensemble(int dim, int min_states, int max_states, Rng& rng);

/// Uniform random joint distribution.
JointDistribution random_joint(int rows, int cols, Rng& rng);

}  // namespace qlab
