#pragma once

// Validated finite-dimensional quantum objects and the small dense linear
// algebra every other module builds on. Dimensions are tiny (d <= ~16), so
// everything is dense Eigen with dynamic size.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Malformed or contract-violating input (bad dimensions, non-normalized
/// weights, non-Hermitian matrices, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not deliver its contract (eigensolver breakdown,
/// loss of definiteness).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericError {
 public:
  using NumericError::NumericError;
};

namespace tol {
inline constexpr double kStateNorm = 1e-12;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kPsd = 1e-10;
inline constexpr double kPovmSum = 1e-10;
inline constexpr double kWeightSum = 1e-12;
inline constexpr double kPositiveDefinite = 1e-12;
}  // namespace tol

/// Applies the phase convention: the first component of (numerically) largest
/// modulus is made real and nonnegative. Components within a relative 1e-10 of
/// the maximum count as tied, which keeps the rule idempotent bit-for-bit.
CVector canonicalize_phase(const CVector& v);

/// Unit vector in C^d with canonical global phase.
class PureState {
 public:
  /// Normalizes and canonicalizes. Throws InputError on empty, zero or
  /// non-finite input.
  explicit PureState(const CVector& amplitudes);

  static PureState basis(int dim, int index);

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }

  CMatrix projector() const { return amps_ * amps_.adjoint(); }
  /// <this|other>
  Complex inner(const PureState& other) const { return amps_.dot(other.amps_); }
  /// |<this|other>|^2
  double overlap(const PureState& other) const { return std::norm(inner(other)); }

  friend bool operator==(const PureState& a, const PureState& b) { return a.amps_ == b.amps_; }

 private:
  CVector amps_;
};

/// Self-adjoint dim x dim matrix. Stored exactly Hermitian.
class HermitianOp {
 public:
  HermitianOp() = default;
  /// Checks conjugate symmetry within 1e-12 (scaled by the largest entry when
  /// that exceeds one) and stores the exact Hermitian part.
  explicit HermitianOp(const CMatrix& m);

  /// (m + m*)/2 without a symmetry check; for internally produced matrices.
  static HermitianOp hermitian_part(const CMatrix& m);
  static HermitianOp identity(int dim);
  static HermitianOp zero(int dim);
  static HermitianOp projector(const PureState& s);
  static HermitianOp diagonal(std::span<const double> values);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  double trace() const { return m_.trace().real(); }
  /// <v|A|v>
  double expectation(const CVector& v) const { return v.dot(m_ * v).real(); }

  HermitianOp operator+(const HermitianOp& o) const;
  HermitianOp operator-(const HermitianOp& o) const;
  HermitianOp operator*(double s) const;
  friend HermitianOp operator*(double s, const HermitianOp& a) { return a * s; }

 private:
  CMatrix m_;
};

/// Eigen-decomposition with eigenvalues in descending order; equal eigenvalues
/// keep the solver's ascending-index order (stable sort).
struct Eigensystem {
  RVector values;
  CMatrix vectors;  // columns
};

Eigensystem eigh(const HermitianOp& a);
Eigensystem eigh(const CMatrix& hermitian);

double max_eigenvalue(const CMatrix& hermitian);
double min_eigenvalue(const CMatrix& hermitian);
inline double max_eigenvalue(const HermitianOp& a) { return max_eigenvalue(a.matrix()); }
inline double min_eigenvalue(const HermitianOp& a) { return min_eigenvalue(a.matrix()); }

/// Largest absolute eigenvalue.
double operator_norm(const HermitianOp& a);

/// (lambda_max, canonical unit eigenvector). Ties resolve to the first
/// eigenvector in the descending stable order.
std::pair<double, PureState> dominating_eigenvector(const HermitianOp& a);
std::pair<double, CVector> dominating_eigenvector(const CMatrix& hermitian);

/// B with B a B = I. Throws NotPositiveDefinite when lambda_min <= 1e-12.
HermitianOp inv_sqrt(const HermitianOp& a);
/// Square root of a PSD matrix (negative roundoff eigenvalues clipped).
HermitianOp sqrt_psd(const HermitianOp& a);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CVector kron(const CVector& a, const CVector& b);
HermitianOp tensor(const HermitianOp& a, const HermitianOp& b);
PureState tensor(const PureState& a, const PureState& b);

/// Tr_1 of an operator on C^{d1} (x) C^{d2}.
CMatrix partial_trace_first(const CMatrix& m, int d1, int d2);
/// Tr_2 of an operator on C^{d1} (x) C^{d2}.
CMatrix partial_trace_second(const CMatrix& m, int d1, int d2);

bool is_psd(const HermitianOp& a, double tolerance = tol::kPsd);

/// Finite POVM: PSD elements summing to the identity.
class Povm {
 public:
  /// Throws InputError when an element is not PSD (lambda_min < -1e-10), the
  /// dimensions disagree, or the sum deviates from I by more than 1e-10.
  explicit Povm(std::vector<HermitianOp> elements);

  static Povm identity(int dim);
  /// Projective measurement in the columns of a unitary.
  static Povm from_basis(const CMatrix& unitary);

  int dim() const { return elements_.front().dim(); }
  std::size_t size() const { return elements_.size(); }
  const std::vector<HermitianOp>& elements() const { return elements_; }
  const HermitianOp& operator[](std::size_t b) const { return elements_[b]; }

 private:
  std::vector<HermitianOp> elements_;
};

/// Probability vector checks shared by Ensemble and friends.
void validate_probability_vector(std::span<const double> w, const char* what);

/// Pure-state ensemble {p_i, |psi_i>}. Repeated states are kept verbatim.
class Ensemble {
 public:
  Ensemble(std::vector<double> weights, std::vector<PureState> states);
  static Ensemble uniform(std::vector<PureState> states);

  int dim() const { return states_.front().dim(); }
  std::size_t size() const { return states_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PureState>& states() const { return states_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const PureState& state(std::size_t i) const { return states_[i]; }

  /// Same states, new prior.
  Ensemble with_weights(std::vector<double> weights) const;

 private:
  std::vector<double> weights_;
  std::vector<PureState> states_;
};

/// True when the states span C^d (Gram operator has full rank).
bool spans_space(std::span<const PureState> states, double rank_tolerance = 1e-10);

/// Joint distribution p_ij over rows x cols.
class JointDistribution {
 public:
  explicit JointDistribution(RMatrix p);

  int rows() const { return static_cast<int>(p_.rows()); }
  int cols() const { return static_cast<int>(p_.cols()); }
  double operator()(int i, int j) const { return p_(i, j); }
  const RMatrix& matrix() const { return p_; }

  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  JointDistribution transposed() const { return JointDistribution(p_.transpose()); }

 private:
  RMatrix p_;
};

}  // namespace qlab
