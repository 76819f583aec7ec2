#include "qlab/samples.hpp"

namespace qlab {

namespace {

int draw_count(int max_count, Rng& rng) {
  return 1 + static_cast<int>(std::uniform_int_distribution<int>(0, std::max(max_count, 1) - 1)(rng));
}

}  // namespace

CpMap random_holevo_map(int in_dim, int out_dim, Rng& rng, int max_terms) {
  const int k = draw_count(max_terms, rng);
  std::vector<HermitianOp> rs;
  std::vector<HermitianOp> xs;
  CMatrix total = CMatrix::Zero(in_dim, in_dim);
  for (int t = 0; t < k; ++t) {
    rs.push_back(random_density(out_dim, rng));
    xs.push_back(random_psd(in_dim, rng));
    total += xs.back().matrix();
  }
  const double scale = 1.0 / max_eigenvalue(total);
  std::vector<HolevoTerm> terms;
  for (int t = 0; t < k; ++t) terms.push_back({rs[t], xs[t] * scale});
  return CpMap::holevo(in_dim, out_dim, std::move(terms));
}

CpMap random_kraus_map(int in_dim, int out_dim, Rng& rng, int max_operators) {
  const int k = draw_count(max_operators, rng);
  std::vector<CMatrix> ops;
  CMatrix total = CMatrix::Zero(in_dim, in_dim);
  for (int t = 0; t < k; ++t) {
    ops.push_back(gaussian_matrix(out_dim, in_dim, rng));
    total += ops.back().adjoint() * ops.back();
  }
  const double scale = 1.0 / std::sqrt(max_eigenvalue(total));
  for (CMatrix& a : ops) a *= scale;
  return CpMap::kraus(in_dim, out_dim, std::move(ops));
}

HermitianOp random_bipartite_pure(int d1, int d2, Rng& rng) {
  return HermitianOp::projector(random_pure_state(d1 * d2, rng));
}

Ensemble random_ensemble(int dim, int min_states, int max_states, Rng& rng) {
  const int n = std::uniform_int_distribution<int>(min_states, max_states)(rng);
  std::vector<PureState> states;
  for (int i = 0; i < n; ++i) states.push_back(random_pure_state(dim, rng));
  return Ensemble(random_simplex_point(n, rng), std::move(states));
}

JointDistribution random_joint(int rows, int cols, Rng& rng) {
  const std::vector<double> w = random_simplex_point(rows * cols, rng);
  RMatrix p(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) p(i, j) = w[static_cast<std::size_t>(i * cols + j)];
  }
  return JointDistribution(p);
}

}  // namespace qlab
