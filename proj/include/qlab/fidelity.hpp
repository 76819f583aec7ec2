#pragma once

// Accessible fidelity of a pure-state ensemble. Lower bounds come from
// concrete intercept/resend strategies (seesaw), upper bounds from feasible
// operators X with <psi|X|psi> >= g(psi psi*) for every pure psi.

#include "qlab/core.hpp"
#include "qlab/discrimination.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qlab {

/// rho -> sum_i p_i <psi_i|rho|psi_i> |psi_i><psi_i| with the states stored
/// column-wise; the fast path behind every fidelity computation.
class EnsembleMap {
 public:
  explicit EnsembleMap(const Ensemble& e);

  int dim() const { return static_cast<int>(states_.rows()); }
  CMatrix apply(const CMatrix& rho) const;
  CMatrix apply_pure(const CVector& v) const;
  /// g(v v*) = ||apply_pure(v)||.
  double g_pure(const CVector& v) const;

 private:
  CMatrix states_;
  RVector weights_;
};

struct EavesdropStrategy {
  Povm povm = Povm::identity(1);
  std::vector<PureState> resend_states;
};

/// sum_i sum_b p_i <psi_i|E_b|psi_i> |<psi_i|phi_b>|^2.
double intercept_resend_fidelity(const Ensemble& e, const EavesdropStrategy& s);

/// ||Phi(rho)||.
double g_value(const Ensemble& e, const HermitianOp& rho);

/// A POVM read as an ensemble of density operators with average I/d.
struct MixedEnsemble {
  std::vector<double> weights;      // Tr(E_b)/d
  std::vector<HermitianOp> states;  // E_b / Tr(E_b)
  std::vector<std::size_t> source;  // index b of each retained element
};

/// Elements with zero trace (<= 1e-15 d) are dropped.
MixedEnsemble povm_to_ensemble(const Povm& p);

struct SeesawConfig {
  int outcomes = 0;  // 0 means d^2
  int restarts = 16;
  int max_iterations = 300;
  double tolerance = 1e-12;  // minimal accepted improvement per iteration
  /// Warm starts, run before the seeded restarts. Padded with zero elements
  /// (or rejected when they have more outcomes than configured).
  std::vector<EavesdropStrategy> initial_strategies;
  BarrierConfig barrier;
};

struct SeesawResult {
  double value = 0.0;
  EavesdropStrategy strategy;
  /// Dual of the last accepted POVM step of the best run: Y >= Phi(phi_b phi_b*).
  HermitianOp dual;
  /// Warm starts first, then restart 0 (measure nothing) and the random ones.
  std::vector<double> best_per_restart;
  /// Value after each accepted iteration of the best run.
  std::vector<double> trajectory;
};

/// Alternates resend states (dominating eigenvectors of Phi(E_b)) with the
/// exact or certified POVM step. Duplicate resend states are merged and the
/// freed outcomes are reseeded with the most violated constraints of the
/// previous step's dual. Values never decrease.
SeesawResult accessible_fidelity_seesaw(const Ensemble& e, const SeesawConfig& config, std::uint64_t seed);
SeesawResult accessible_fidelity_seesaw(const Ensemble& e, int outcomes, int restarts, std::uint64_t seed);

/// max over unit phi of lambda_max(Phi(phi phi*) - X) by alternating
/// maximization of <psi|Phi(phi phi*) - X|psi> from the given start.
/// Returns (violation, phi).
std::pair<double, CVector> violation_ascent(const EnsembleMap& phi, const CMatrix& x, const CVector& start,
                                            int max_iterations = 200);

struct CertificateConfig {
  int max_rounds = 40;
  int search_restarts = 8;
  double violation_tolerance = 1e-7;
  int random_probes = 100000;
  int verify_restarts = 64;
  double min_eigenvalue = 1e-10;
  bool require_spanning = true;
  bool scalar_fallback = true;
  BarrierConfig barrier;
};

struct Certificate {
  HermitianOp X;
  /// min over probed psi of <psi|X|psi> - g(psi psi*).
  double margin = 0.0;
  long probe_count = 0;
  double trace() const { return X.trace(); }
};

/// Probes X with random states, ascent restarts and, for qubits, a Bloch grid
/// over the constraint index. Returns the certificate with its margin.
Certificate verify_certificate(const Ensemble& e, const HermitianOp& x, int random_probes, int ascent_restarts,
                               std::uint64_t seed);

/// Exchange method over the constraints X >= Phi(phi phi*): solve the finite
/// problem on a probe set, add the most violated phi, repeat. The result is
/// inflated by the verified violation and regularized to lambda_min >= 1e-10.
/// When enabled, the scalar certificate nu_inf I is built as well and the one
/// with the smaller trace is returned. Throws InputError when the states do
/// not span C^d and require_spanning is set.
Certificate dual_certificate_search(const Ensemble& e, const CertificateConfig& config, std::uint64_t seed,
                                    std::span<const PureState> warm_probes = {});
Certificate dual_certificate_search(const Ensemble& e, int max_rounds, std::uint64_t seed);

/// nu_inf(Phi) I, inflated by its verified violation.
Certificate scalar_certificate(const Ensemble& e, const CertificateConfig& config, std::uint64_t seed);

struct FidelityConfig {
  SeesawConfig seesaw;
  CertificateConfig certificate;
};

struct FidelityBracket {
  double lower = 0.0;
  double upper = 0.0;
  EavesdropStrategy strategy;
  Certificate certificate;
  double width() const { return upper - lower; }
};

FidelityBracket accessible_fidelity(const Ensemble& e, const FidelityConfig& config, std::uint64_t seed);

}  // namespace qlab
