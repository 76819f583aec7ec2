#pragma once

// Bipartite constructions: product ensembles and strategies, the product
// certificate X1 (x) X2, and the composite measurement built from a joint
// distribution over two state sets.

#include "qlab/fidelity.hpp"
#include "qlab/quantumness.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qlab {

/// Weights p_i q_j and states psi_i (x) theta_j in row-major (i, j) order.
Ensemble product_ensemble(const Ensemble& e1, const Ensemble& e2);

/// POVM E_b (x) F_c with resend states phi_b (x) theta_c, row-major (b, c).
EavesdropStrategy product_strategy(const EavesdropStrategy& s1, const EavesdropStrategy& s2);

struct ProductFeasibilityReport {
  double nu_omega1 = 0.0;  // nu_inf of Phi_1(X_1^-1/2 . X_1^-1/2)
  double nu_omega2 = 0.0;
  double worst_margin = 0.0;  // min over probes of Tr[(X1 (x) X2) rho] - g12(rho)
  long probe_count = 0;
  bool feasible = false;
};

/// Both Omega maps must have nu_inf <= 1 + 1e-6 and every bipartite probe
/// (random states plus ascent restarts) must have margin >= -1e-7. Throws
/// InputError when a certificate is not positive definite.
ProductFeasibilityReport check_feasible_product(const Ensemble& e1, const Ensemble& e2, const Certificate& x1,
                                                const Certificate& x2, int random_probes, std::uint64_t seed,
                                                int ascent_restarts = 64);

struct Thm1Config {
  FidelityConfig factor;
  SeesawConfig product;
  double tolerance = 5e-3;
  bool check_feasibility = false;
  int feasibility_probes = 10000;

  Thm1Config();
};

struct Thm1Report {
  FidelityBracket f1;
  FidelityBracket f2;
  double f12_lower = 0.0;
  double f12_upper = 0.0;
  bool easy_direction = false;  // f12_lower >= f1.lower * f2.lower - 1e-8
  bool consistent = false;
  std::optional<ProductFeasibilityReport> feasibility;
};

/// Brackets both factors, runs the product seesaw warm-started from the
/// product of the factor strategies, and takes Tr(X1) Tr(X2) as the product
/// upper bound. consistent: the factor interval widened by the tolerance
/// meets [f12_lower, f12_upper].
Thm1Report verify_thm1(const Ensemble& e1, const Ensemble& e2, const Thm1Config& config, std::uint64_t seed);

struct Thm2Composite {
  std::vector<double> marginal;  // p_i
  double marginal_value = 0.0;   // seesaw value of {p_i, psi_i}
  Povm marginal_povm = Povm::identity(1);
  std::vector<PureState> phis;
  std::vector<double> norms;                   // N_b
  std::vector<double> mixture;                 // r_b
  std::vector<std::vector<double>> conditionals;  // q_{b,j}; empty when dropped
  std::vector<bool> kept;                      // N_b > 1e-14
  std::vector<Povm> conditional_povms;         // F_{b,c}; {I} when dropped
  std::vector<double> conditional_values;      // seesaw value of {q_{b,j}, theta_j}; 0 when dropped
  std::vector<std::vector<PureState>> chis;
  Povm composite = Povm::identity(1);          // M_{b,c} = E_b (x) F_{b,c}, row-major
  double norm_sum_error = 0.0;                 // |sum_b N_b - marginal_value|
};

struct Thm2Config {
  SeesawConfig seesaw;
  bool with_quantumness = false;
  QuantumnessConfig quantumness;
  double quantumness_tolerance = 5e-3;
};

/// Builds the composite measurement for the joint ensemble {p_ij, psi_i (x) theta_j}.
Thm2Composite theorem2_compose(const JointDistribution& p, std::span<const PureState> states1,
                               std::span<const PureState> states2, const SeesawConfig& config, std::uint64_t seed);

struct Thm2Ordering {
  Thm2Composite composite;
  double lhs = 0.0;       // sum_{b,c} ||sum_ij p_ij (Pi_i (x) Pi_j) M_bc (Pi_i (x) Pi_j)||
  double rhs_weak = 0.0;  // sum_b N_b F_b
  bool holds = false;     // lhs >= rhs_weak - 1e-9 and the N_b sum identity within 1e-9
};

struct Thm2Report {
  Thm2Ordering forward;
  Thm2Ordering swapped;  // factors exchanged, p transposed
  std::optional<QuantumnessReport> q1;
  std::optional<QuantumnessReport> q2;
  std::optional<bool> quantumness_bound;  // forward.lhs >= q1.lower q2.lower - tol
  bool holds = false;
};

/// Direct evaluation of the composite on the joint ensemble, both orderings.
Thm2Report verify_thm2(const JointDistribution& p, std::span<const PureState> states1,
                       std::span<const PureState> states2, const Thm2Config& config, std::uint64_t seed);

}  // namespace qlab
