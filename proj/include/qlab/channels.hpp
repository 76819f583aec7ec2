#pragma once

// Completely positive maps in Kraus form or entanglement-breaking (Holevo)
// form, the maximal output operator norm nu_inf, and executable checks of its
// multiplicativity when one factor is entanglement breaking.

#include "qlab/core.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace qlab {

struct KrausForm {
  std::vector<CMatrix> operators;  // out_dim x in_dim
};

/// One term R (x) Tr(X .) of rho -> sum_k R_k Tr(X_k rho).
struct HolevoTerm {
  HermitianOp R;  // PSD, out_dim
  HermitianOp X;  // PSD, in_dim
};

struct HolevoForm {
  std::vector<HolevoTerm> terms;
};

/// A completely positive, not necessarily trace-preserving, map.
class CpMap {
 public:
  static CpMap kraus(int in_dim, int out_dim, std::vector<CMatrix> operators);
  /// Throws InputError unless every R_k and X_k is PSD within 1e-10.
  static CpMap holevo(int in_dim, int out_dim, std::vector<HolevoTerm> terms);
  static CpMap identity(int dim);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  bool is_holevo() const { return std::holds_alternative<HolevoForm>(rep_); }
  const HolevoForm& holevo_form() const;
  const KrausForm& kraus_form() const;

  /// Image of rho; throws InputError on a dimension mismatch.
  HermitianOp apply(const HermitianOp& rho) const;
  /// Image of |v><v| for an (unnormalized) vector v.
  CMatrix apply_pure(const CVector& v) const;
  /// Adjoint map under the Hilbert-Schmidt pairing, evaluated on |u><u|.
  CMatrix apply_adjoint_pure(const CVector& u) const;

  /// Equivalent Kraus representation. Holevo terms expand as
  /// sqrt(r_a x_c) |u_a><w_c| over eigenpairs of R_k and X_k.
  CpMap to_kraus() const;

 private:
  CpMap(int in_dim, int out_dim, std::variant<KrausForm, HolevoForm> rep)
      : in_dim_(in_dim), out_dim_(out_dim), rep_(std::move(rep)) {}

  int in_dim_;
  int out_dim_;
  std::variant<KrausForm, HolevoForm> rep_;
};

inline HermitianOp apply(const CpMap& m, const HermitianOp& rho) { return m.apply(rho); }

/// rho -> sum_i p_i Pi_i rho Pi_i in Holevo form (R_i = p_i Pi_i, X_i = Pi_i).
CpMap phi_from_ensemble(const Ensemble& e);

/// m1 (x) m2. Two Holevo maps give a Holevo map with pairwise tensored terms;
/// otherwise both are converted to Kraus form and tensored pairwise.
CpMap tensor_maps(const CpMap& m1, const CpMap& m2);

/// rho -> m(B rho B*) for a fixed in_dim x in_dim matrix B.
CpMap precompose(const CpMap& m, const CMatrix& b);

struct NuInfConfig {
  int restarts = 32;
  int max_iterations = 500;
  double relative_tolerance = 1e-11;
  /// 360 x 180 Bloch grid sweep (plus a polish ascent from its best point)
  /// whenever in_dim == 2.
  bool bloch_grid = true;
  /// Additional deterministic starting points, run after the random restarts.
  std::vector<PureState> extra_starts;
};

/// Lower bound on nu_inf with its audit trail. best_per_restart lists the
/// random restarts first, then extra starts, then the grid polish (if run).
struct NuInfReport {
  double value = 0.0;
  PureState argmax_state = PureState::basis(1, 0);
  int restarts_used = 0;
  std::vector<double> best_per_restart;
};

/// ||m(psi psi*)|| along with the maximizing output eigenvector.
double output_norm(const CpMap& m, const CVector& psi);

/// Local ascent of psi -> ||m(psi psi*)|| from one start. Returns the final
/// value and state.
std::pair<double, CVector> nu_inf_ascent(const CpMap& m, const CVector& start, int max_iterations = 500,
                                         double relative_tolerance = 1e-11);

NuInfReport nu_infinity(const CpMap& m, const NuInfConfig& config, std::uint64_t seed);
NuInfReport nu_infinity(const CpMap& m, int restarts, std::uint64_t seed);

struct EbCheckConfig {
  int factor_restarts = 32;
  int product_restarts = 64;
  double tolerance = 1e-6;
};

struct EbMultiplicativityReport {
  NuInfReport nu1;
  NuInfReport nu2;
  NuInfReport nu12;
  double gap = 0.0;          // nu12 - nu1 * nu2
  bool lower_bound_ok = false;  // nu12 >= nu1 * nu2 - tolerance
};

/// Computes nu_inf of psi, omega and psi (x) omega. The product run is also
/// started from the tensor product of the factor maximizers.
EbMultiplicativityReport check_eb_multiplicativity(const CpMap& psi, const CpMap& omega, const EbCheckConfig& config,
                                                   std::uint64_t seed);
EbMultiplicativityReport check_eb_multiplicativity(const CpMap& psi, const CpMap& omega, int restarts,
                                                   std::uint64_t seed);

struct AppendixReport {
  std::vector<double> x;            // x_k, one per retained term
  std::vector<std::size_t> kept;    // indices of retained Holevo terms
  std::vector<HermitianOp> g_prime;  // G'_k
  std::vector<HermitianOp> g;        // G_k = Omega(G'_k)
  double lhs = 0.0;                  // ||(Psi (x) Omega)(tau)||
  double rhs = 0.0;                  // max_k ||G_k|| * ||Psi(tau_1)||
  double reconstruction_error = 0.0;  // (Psi (x) Omega)(tau) vs sum x_k R_k (x) G_k
  double identity_reconstruction_error = 0.0;  // (Psi (x) id)(tau) vs sum x_k R_k (x) G'_k
  double marginal_error = 0.0;        // Psi(tau_1) vs sum x_k R_k
  double operator_slack = 0.0;        // lambda_min(max||G|| Psi(tau_1) (x) I - (Psi (x) Omega)(tau))
  bool holds = false;
};

inline constexpr double kHolevoTermCutoff = 1e-14;

/// Evaluates every object of the operator-norm proof of EB multiplicativity on
/// a concrete bipartite input tau12 and checks the identities (within 1e-9)
/// and the final norm inequality (slack >= -1e-10). Terms with x_k <= 1e-14
/// are dropped.
AppendixReport appendix_chain_check(const CpMap& psi, const CpMap& omega, const HermitianOp& tau12);

}  // namespace qlab
