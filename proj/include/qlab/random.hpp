#pragma once

// Seeded sampling. Every routine is a pure function of its seed (or of the
// generator state passed in); independent tasks get independent streams via
// derive_seed.

#include "qlab/core.hpp"

#include <cstdint>
#include <random>

namespace qlab {

using Rng = std::mt19937_64;

/// splitmix64 mix of (root, stream); used to give every restart/trial its own
/// reproducible generator.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// Complex Gaussian vector (iid standard normal real and imaginary parts).
CVector gaussian_vector(int dim, Rng& rng);
/// Complex Ginibre matrix.
CMatrix gaussian_matrix(int rows, int cols, Rng& rng);

/// Haar-distributed pure state (normalized complex Gaussian).
PureState random_pure_state(int dim, Rng& rng);
PureState random_pure_state(int dim, std::uint64_t seed);

/// Random POVM. With outcomes >= dim the elements are rank-one frame vectors
/// v_b v_b* conjugated by S^{-1/2}, S = sum_b v_b v_b*; with fewer outcomes
/// full-rank Wishart elements are used instead. A single outcome yields {I}.
Povm random_povm(int dim, int outcomes, std::uint64_t seed);

/// Uniform point on the probability simplex (normalized exponentials).
std::vector<double> random_simplex_point(int n, Rng& rng);

/// Density matrix G G* / Tr(G G*) with G a dim x rank Ginibre matrix.
HermitianOp random_density(int dim, Rng& rng, int rank = -1);
/// Random PSD matrix G G* (unnormalized) of the given rank.
HermitianOp random_psd(int dim, Rng& rng, int rank = -1);

}  // namespace qlab
