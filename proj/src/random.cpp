#include "qlab/random.hpp"

#include <algorithm>

namespace qlab {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(root) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

CVector gaussian_vector(int dim, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = n01(rng);
    const double im = n01(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

CMatrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double re = n01(rng);
      const double im = n01(rng);
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

PureState random_pure_state(int dim, Rng& rng) {
  if (dim < 1) throw InputError("random_pure_state: dim must be >= 1");
  for (;;) {
    CVector v = gaussian_vector(dim, rng);
    if (v.norm() > 1e-150) return PureState(v);
  }
}

PureState random_pure_state(int dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure_state(dim, rng);
}

Povm random_povm(int dim, int outcomes, std::uint64_t seed) {
  if (dim < 1 || outcomes < 1) throw InputError("random_povm: dim and outcomes must be >= 1");
  if (outcomes == 1) return Povm::identity(dim);
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed + attempt);
    std::vector<CMatrix> raw;
    raw.reserve(outcomes);
    CMatrix s = CMatrix::Zero(dim, dim);
    for (int b = 0; b < outcomes; ++b) {
      CMatrix g = outcomes >= dim ? CMatrix(gaussian_vector(dim, rng)) : gaussian_matrix(dim, dim, rng);
      raw.push_back(g * g.adjoint());
      s += raw.back();
    }
    const HermitianOp sh = HermitianOp::hermitian_part(s);
    if (min_eigenvalue(sh) <= 1e-8 * std::max(1.0, max_eigenvalue(sh))) continue;
    const CMatrix w = inv_sqrt(sh).matrix();
    std::vector<HermitianOp> els;
    els.reserve(outcomes);
    CMatrix sum = CMatrix::Zero(dim, dim);
    for (const CMatrix& r : raw) {
      els.push_back(HermitianOp::hermitian_part(w * r * w));
      sum += els.back().matrix();
    }
    // Fold the residual roundoff into the last element so the completeness
    // check sees an exact identity.
    els.back() = HermitianOp::hermitian_part(els.back().matrix() + (CMatrix::Identity(dim, dim) - sum));
    return Povm(std::move(els));
  }
}

std::vector<double> random_simplex_point(int n, Rng& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) {
    x = ex(rng);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

HermitianOp random_psd(int dim, Rng& rng, int rank) {
  if (rank <= 0) rank = dim;
  CMatrix g = gaussian_matrix(dim, rank, rng);
  return HermitianOp::hermitian_part(g * g.adjoint());
}

HermitianOp random_density(int dim, Rng& rng, int rank) {
  HermitianOp p = random_psd(dim, rng, rank);
  return p * (1.0 / p.trace());
}

}  // namespace qlab
