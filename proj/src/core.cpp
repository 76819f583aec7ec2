#include "qlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qlab {

namespace {

constexpr double kPhaseTie = 1e-10;

bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  }
  return true;
}

void check_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw InputError(os.str());
  }
}

// Closed forms for 2x2 Hermitian matrices; the inner loops of every optimizer
// in this library run at qubit scale.
double eig2_center(const CMatrix& m) { return 0.5 * (m(0, 0).real() + m(1, 1).real()); }
double eig2_radius(const CMatrix& m) {
  return std::hypot(0.5 * (m(0, 0).real() - m(1, 1).real()), std::abs(m(0, 1)));
}

}  // namespace

CVector canonicalize_phase(const CVector& v) {
  if (v.size() == 0) return v;
  const double max_mod = v.cwiseAbs().maxCoeff();
  if (!(max_mod > 0.0)) return v;
  Eigen::Index k = 0;
  while (std::abs(v(k)) < max_mod * (1.0 - kPhaseTie)) ++k;
  const Complex c = v(k);
  if (c.imag() == 0.0 && c.real() >= 0.0) return v;
  const double mod = std::abs(c);
  CVector out = v * (std::conj(c) / mod);
  out(k) = Complex(mod, 0.0);
  return out;
}

PureState::PureState(const CVector& amplitudes) {
  if (amplitudes.size() == 0) throw InputError("PureState: empty amplitude vector");
  if (!all_finite(amplitudes)) throw InputError("PureState: non-finite amplitude");
  const double norm = amplitudes.norm();
  if (!(norm > 1e-300)) throw InputError("PureState: zero vector cannot be normalized");
  amps_ = canonicalize_phase(amplitudes / norm);
}

PureState PureState::basis(int dim, int index) {
  if (dim < 1 || index < 0 || index >= dim) throw InputError("PureState::basis: index out of range");
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return PureState(v);
}

HermitianOp::HermitianOp(const CMatrix& m) {
  check_square(m, "HermitianOp");
  if (!all_finite(m)) throw InputError("HermitianOp: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::kHermitian * scale) {
    std::ostringstream os;
    os << "HermitianOp: matrix is not conjugate-symmetric (max deviation " << asym << ")";
    throw InputError(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOp HermitianOp::hermitian_part(const CMatrix& m) {
  check_square(m, "HermitianOp::hermitian_part");
  HermitianOp out;
  out.m_ = 0.5 * (m + m.adjoint());
  return out;
}

HermitianOp HermitianOp::identity(int dim) { return hermitian_part(CMatrix::Identity(dim, dim)); }
HermitianOp HermitianOp::zero(int dim) { return hermitian_part(CMatrix::Zero(dim, dim)); }
HermitianOp HermitianOp::projector(const PureState& s) { return hermitian_part(s.projector()); }

HermitianOp HermitianOp::diagonal(std::span<const double> values) {
  CMatrix m = CMatrix::Zero(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return HermitianOp(m);
}

HermitianOp HermitianOp::operator+(const HermitianOp& o) const {
  if (o.dim() != dim()) throw InputError("HermitianOp: dimension mismatch in +");
  return hermitian_part(m_ + o.m_);
}

HermitianOp HermitianOp::operator-(const HermitianOp& o) const {
  if (o.dim() != dim()) throw InputError("HermitianOp: dimension mismatch in -");
  return hermitian_part(m_ - o.m_);
}

HermitianOp HermitianOp::operator*(double s) const { return hermitian_part(m_ * s); }

Eigensystem eigh(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) throw NumericError("eigh: eigensolver failed to converge");
  const Eigen::Index n = hermitian.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RVector& ascending = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return ascending(a) > ascending(b); });
  Eigensystem out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = ascending(order[i]);
    out.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  return out;
}

Eigensystem eigh(const HermitianOp& a) { return eigh(a.matrix()); }

double max_eigenvalue(const CMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  if (m.rows() == 2) return eig2_center(m) + eig2_radius(m);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("max_eigenvalue: eigensolver failed");
  return es.eigenvalues()(m.rows() - 1);
}

double min_eigenvalue(const CMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  if (m.rows() == 2) return eig2_center(m) - eig2_radius(m);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("min_eigenvalue: eigensolver failed");
  return es.eigenvalues()(0);
}

double operator_norm(const HermitianOp& a) {
  return std::max(std::abs(max_eigenvalue(a)), std::abs(min_eigenvalue(a)));
}

std::pair<double, CVector> dominating_eigenvector(const CMatrix& m) {
  if (m.rows() == 2) {
    const double a = m(0, 0).real();
    const double c = m(1, 1).real();
    const Complex b = m(0, 1);
    const double lambda = eig2_center(m) + eig2_radius(m);
    CVector v(2);
    CVector w(2);
    v << b, lambda - a;
    w << lambda - c, std::conj(b);
    const double nv = v.norm();
    const double nw = w.norm();
    if (std::max(nv, nw) <= 1e-300 || std::abs(b) == 0.0) {
      // Diagonal: ties go to the lower index.
      v << (a >= c ? 1.0 : 0.0), (a >= c ? 0.0 : 1.0);
      return {lambda, v};
    }
    return {lambda, nv >= nw ? CVector(v / nv) : CVector(w / nw)};
  }
  Eigensystem es = eigh(m);
  return {es.values(0), es.vectors.col(0)};
}

std::pair<double, PureState> dominating_eigenvector(const HermitianOp& a) {
  auto [lambda, v] = dominating_eigenvector(a.matrix());
  return {lambda, PureState(v)};
}

HermitianOp inv_sqrt(const HermitianOp& a) {
  Eigensystem es = eigh(a);
  const double lmin = es.values(es.values.size() - 1);
  if (!(lmin > tol::kPositiveDefinite)) {
    std::ostringstream os;
    os << "inv_sqrt: matrix is not positive definite (min eigenvalue " << lmin << ")";
    throw NotPositiveDefinite(os.str());
  }
  RVector s = es.values.cwiseSqrt().cwiseInverse();
  return HermitianOp::hermitian_part(es.vectors * s.asDiagonal() * es.vectors.adjoint());
}

HermitianOp sqrt_psd(const HermitianOp& a) {
  Eigensystem es = eigh(a);
  RVector s = es.values.cwiseMax(0.0).cwiseSqrt();
  return HermitianOp::hermitian_part(es.vectors * s.asDiagonal() * es.vectors.adjoint());
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    }
  }
  return out;
}

CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

HermitianOp tensor(const HermitianOp& a, const HermitianOp& b) {
  return HermitianOp::hermitian_part(kron(a.matrix(), b.matrix()));
}

PureState tensor(const PureState& a, const PureState& b) {
  return PureState(kron(a.amplitudes(), b.amplitudes()));
}

CMatrix partial_trace_first(const CMatrix& m, int d1, int d2) {
  if (m.rows() != d1 * d2 || m.cols() != d1 * d2) throw InputError("partial_trace_first: dimension mismatch");
  CMatrix out = CMatrix::Zero(d2, d2);
  for (int i = 0; i < d1; ++i) out += m.block(i * d2, i * d2, d2, d2);
  return out;
}

CMatrix partial_trace_second(const CMatrix& m, int d1, int d2) {
  if (m.rows() != d1 * d2 || m.cols() != d1 * d2) throw InputError("partial_trace_second: dimension mismatch");
  CMatrix out(d1, d1);
  for (int i = 0; i < d1; ++i) {
    for (int k = 0; k < d1; ++k) out(i, k) = m.block(i * d2, k * d2, d2, d2).trace();
  }
  return out;
}

bool is_psd(const HermitianOp& a, double tolerance) { return min_eigenvalue(a) >= -tolerance; }

Povm::Povm(std::vector<HermitianOp> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw InputError("Povm: needs at least one element");
  const int d = elements_.front().dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t b = 0; b < elements_.size(); ++b) {
    const HermitianOp& e = elements_[b];
    if (e.dim() != d) throw InputError("Povm: elements have different dimensions");
    const double lmin = min_eigenvalue(e);
    if (lmin < -tol::kPsd) {
      std::ostringstream os;
      os << "Povm: element " << b << " is not positive semidefinite (min eigenvalue " << lmin << ")";
      throw InputError(os.str());
    }
    sum += e.matrix();
  }
  const double dev = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > tol::kPovmSum) {
    std::ostringstream os;
    os << "Povm: elements do not sum to the identity (max deviation " << dev << ")";
    throw InputError(os.str());
  }
}

Povm Povm::identity(int dim) { return Povm({HermitianOp::identity(dim)}); }

Povm Povm::from_basis(const CMatrix& unitary) {
  std::vector<HermitianOp> els;
  els.reserve(unitary.cols());
  for (Eigen::Index k = 0; k < unitary.cols(); ++k) {
    const CVector u = unitary.col(k);
    els.push_back(HermitianOp::hermitian_part(u * u.adjoint()));
  }
  return Povm(std::move(els));
}

void validate_probability_vector(std::span<const double> w, const char* what) {
  if (w.empty()) throw InputError(std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      std::ostringstream os;
      os << what << ": entry " << i << " is negative or not finite (" << w[i] << ")";
      throw InputError(os.str());
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > tol::kWeightSum) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": weights sum to " << sum << ", expected 1";
    throw InputError(os.str());
  }
}

Ensemble::Ensemble(std::vector<double> weights, std::vector<PureState> states)
    : weights_(std::move(weights)), states_(std::move(states)) {
  if (states_.empty()) throw InputError("Ensemble: needs at least one state");
  if (weights_.size() != states_.size()) throw InputError("Ensemble: weights and states differ in length");
  validate_probability_vector(weights_, "Ensemble");
  const int d = states_.front().dim();
  for (const PureState& s : states_) {
    if (s.dim() != d) throw InputError("Ensemble: states have different dimensions");
  }
}

Ensemble Ensemble::uniform(std::vector<PureState> states) {
  std::vector<double> w(states.size(), states.empty() ? 0.0 : 1.0 / static_cast<double>(states.size()));
  return Ensemble(std::move(w), std::move(states));
}

Ensemble Ensemble::with_weights(std::vector<double> weights) const { return Ensemble(std::move(weights), states_); }

bool spans_space(std::span<const PureState> states, double rank_tolerance) {
  if (states.empty()) return false;
  const int d = states.front().dim();
  CMatrix gram = CMatrix::Zero(d, d);
  for (const PureState& s : states) gram += s.projector();
  return min_eigenvalue(gram) > rank_tolerance;
}

JointDistribution::JointDistribution(RMatrix p) : p_(std::move(p)) {
  if (p_.size() == 0) throw InputError("JointDistribution: empty matrix");
  std::vector<double> flat(p_.data(), p_.data() + p_.size());
  validate_probability_vector(flat, "JointDistribution");
}

std::vector<double> JointDistribution::row_marginal() const {
  std::vector<double> out(rows());
  for (int i = 0; i < rows(); ++i) out[i] = p_.row(i).sum();
  return out;
}

std::vector<double> JointDistribution::col_marginal() const {
  std::vector<double> out(cols());
  for (int j = 0; j < cols(); ++j) out[j] = p_.col(j).sum();
  return out;
}

}  // namespace qlab
