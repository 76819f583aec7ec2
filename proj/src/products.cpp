#include "qlab/products.hpp"

#include "qlab/channels.hpp"
#include "qlab/random.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

Ensemble product_ensemble(const Ensemble& e1, const Ensemble& e2) {
  std::vector<double> w;
  std::vector<PureState> s;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    for (std::size_t j = 0; j < e2.size(); ++j) {
      w.push_back(e1.weight(i) * e2.weight(j));
      s.push_back(tensor(e1.state(i), e2.state(j)));
    }
  }
  // Products of normalized weights can miss 1 by a few ulps.
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return Ensemble(std::move(w), std::move(s));
}

EavesdropStrategy product_strategy(const EavesdropStrategy& s1, const EavesdropStrategy& s2) {
  std::vector<HermitianOp> els;
  std::vector<PureState> phis;
  for (std::size_t b = 0; b < s1.povm.size(); ++b) {
    for (std::size_t c = 0; c < s2.povm.size(); ++c) {
      els.push_back(tensor(s1.povm[b], s2.povm[c]));
      phis.push_back(tensor(s1.resend_states[b], s2.resend_states[c]));
    }
  }
  return EavesdropStrategy{Povm(std::move(els)), std::move(phis)};
}

ProductFeasibilityReport check_feasible_product(const Ensemble& e1, const Ensemble& e2, const Certificate& x1,
                                                const Certificate& x2, int random_probes, std::uint64_t seed,
                                                int ascent_restarts) {
  if (x1.X.dim() != e1.dim() || x2.X.dim() != e2.dim()) {
    throw InputError("check_feasible_product: certificate dimension mismatch");
  }
  if (min_eigenvalue(x1.X) <= tol::kPositiveDefinite || min_eigenvalue(x2.X) <= tol::kPositiveDefinite) {
    throw InputError("check_feasible_product: certificates must be positive definite");
  }
  ProductFeasibilityReport r;
  const CpMap omega1 = precompose(phi_from_ensemble(e1), inv_sqrt(x1.X).matrix());
  const CpMap omega2 = precompose(phi_from_ensemble(e2), inv_sqrt(x2.X).matrix());
  r.nu_omega1 = nu_infinity(omega1, NuInfConfig{}, derive_seed(seed, 1)).value;
  r.nu_omega2 = nu_infinity(omega2, NuInfConfig{}, derive_seed(seed, 2)).value;

  const Certificate joint = verify_certificate(product_ensemble(e1, e2), tensor(x1.X, x2.X), random_probes,
                                               ascent_restarts, derive_seed(seed, 3));
  r.worst_margin = joint.margin;
  r.probe_count = joint.probe_count;
  r.feasible = r.nu_omega1 <= 1.0 + 1e-6 && r.nu_omega2 <= 1.0 + 1e-6 && r.worst_margin >= -1e-7;
  return r;
}

Thm1Config::Thm1Config() { product.restarts = 4; }

Thm1Report verify_thm1(const Ensemble& e1, const Ensemble& e2, const Thm1Config& config, std::uint64_t seed) {
  if (e1.dim() * e2.dim() > 16) throw InputError("verify_thm1: product dimension above 16");
  Thm1Report r;
  r.f1 = accessible_fidelity(e1, config.factor, derive_seed(seed, 1));
  r.f2 = accessible_fidelity(e2, config.factor, derive_seed(seed, 2));

  SeesawConfig product = config.product;
  const EavesdropStrategy warm = product_strategy(r.f1.strategy, r.f2.strategy);
  const int outcomes = product.outcomes == 0 ? e1.dim() * e1.dim() * e2.dim() * e2.dim() : product.outcomes;
  product.outcomes = std::max(outcomes, static_cast<int>(warm.povm.size()));
  product.initial_strategies.insert(product.initial_strategies.begin(), warm);
  r.f12_lower = accessible_fidelity_seesaw(product_ensemble(e1, e2), product, derive_seed(seed, 3)).value;
  r.f12_upper = r.f1.upper * r.f2.upper;

  r.easy_direction = r.f12_lower >= r.f1.lower * r.f2.lower - 1e-8;
  const double lo = r.f1.lower * r.f2.lower - config.tolerance;
  const double hi = r.f1.upper * r.f2.upper + config.tolerance;
  r.consistent = lo <= r.f12_upper && r.f12_lower <= hi;
  if (config.check_feasibility) {
    r.feasibility = check_feasible_product(e1, e2, r.f1.certificate, r.f2.certificate, config.feasibility_probes,
                                           derive_seed(seed, 4));
  }
  return r;
}

Thm2Composite theorem2_compose(const JointDistribution& p, std::span<const PureState> states1,
                               std::span<const PureState> states2, const SeesawConfig& config, std::uint64_t seed) {
  if (static_cast<std::size_t>(p.rows()) != states1.size() || static_cast<std::size_t>(p.cols()) != states2.size()) {
    throw InputError("theorem2_compose: joint distribution shape does not match the state counts");
  }
  const std::vector<PureState> list1(states1.begin(), states1.end());
  const std::vector<PureState> list2(states2.begin(), states2.end());
  const int d1 = list1.front().dim();
  const int d2 = list2.front().dim();

  Thm2Composite c;
  c.marginal = p.row_marginal();
  const Ensemble marginal(c.marginal, list1);
  SeesawResult first = accessible_fidelity_seesaw(marginal, config, derive_seed(seed, 1));
  c.marginal_value = first.value;
  c.marginal_povm = first.strategy.povm;

  const std::size_t nb = c.marginal_povm.size();
  std::vector<HermitianOp> els;
  double norm_sum = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const CMatrix& e = c.marginal_povm[b].matrix();
    // Sum_i p_i Pi_i E_b Pi_i and its dominating eigenvector.
    CMatrix image = CMatrix::Zero(d1, d1);
    std::vector<CMatrix> terms;
    for (std::size_t i = 0; i < list1.size(); ++i) {
      const CMatrix proj = list1[i].projector();
      terms.push_back(proj * e * proj);
      image += c.marginal[i] * terms.back();
    }
    auto [lam, phi] = dominating_eigenvector(HermitianOp::hermitian_part(image));
    c.phis.push_back(phi);

    std::vector<double> q(list2.size(), 0.0);
    double n = 0.0;
    for (std::size_t j = 0; j < list2.size(); ++j) {
      for (std::size_t i = 0; i < list1.size(); ++i) {
        q[j] += p(static_cast<int>(i), static_cast<int>(j)) * phi.amplitudes().dot(terms[i] * phi.amplitudes()).real();
      }
      q[j] = std::max(q[j], 0.0);
      n += q[j];
    }
    c.norms.push_back(n);
    norm_sum += n;

    const bool keep = n > 1e-14;
    c.kept.push_back(keep);
    if (keep) {
      for (double& x : q) x /= n;
      SeesawResult cond = accessible_fidelity_seesaw(Ensemble(q, list2), config, derive_seed(seed, 100 + b));
      c.conditionals.push_back(std::move(q));
      c.conditional_values.push_back(cond.value);
      c.conditional_povms.push_back(cond.strategy.povm);
      c.chis.push_back(cond.strategy.resend_states);
    } else {
      c.conditionals.emplace_back();
      c.conditional_values.push_back(0.0);
      c.conditional_povms.push_back(Povm::identity(d2));
      c.chis.push_back({list2.front()});
    }
    for (const HermitianOp& f : c.conditional_povms.back().elements()) els.push_back(tensor(c.marginal_povm[b], f));
  }
  for (double n : c.norms) c.mixture.push_back(norm_sum > 0.0 ? n / norm_sum : 0.0);
  c.composite = Povm(std::move(els));
  c.norm_sum_error = std::abs(norm_sum - c.marginal_value);
  return c;
}

namespace {

Thm2Ordering evaluate_ordering(const JointDistribution& p, std::span<const PureState> s1,
                               std::span<const PureState> s2, const SeesawConfig& config, std::uint64_t seed) {
  Thm2Ordering o;
  o.composite = theorem2_compose(p, s1, s2, config, seed);
  std::vector<CMatrix> proj;
  std::vector<double> w;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    for (std::size_t j = 0; j < s2.size(); ++j) {
      w.push_back(p(static_cast<int>(i), static_cast<int>(j)));
      proj.push_back(kron(s1[i].projector(), s2[j].projector()));
    }
  }
  const int d = s1.front().dim() * s2.front().dim();
  for (const HermitianOp& m : o.composite.composite.elements()) {
    CMatrix image = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < proj.size(); ++k) image += w[k] * proj[k] * m.matrix() * proj[k];
    o.lhs += operator_norm(HermitianOp::hermitian_part(image));
  }
  for (std::size_t b = 0; b < o.composite.norms.size(); ++b) {
    o.rhs_weak += o.composite.norms[b] * o.composite.conditional_values[b];
  }
  o.holds = o.lhs >= o.rhs_weak - 1e-9 && o.composite.norm_sum_error <= 1e-9;
  return o;
}

}  // namespace

Thm2Report verify_thm2(const JointDistribution& p, std::span<const PureState> states1,
                       std::span<const PureState> states2, const Thm2Config& config, std::uint64_t seed) {
  Thm2Report r;
  r.forward = evaluate_ordering(p, states1, states2, config.seesaw, derive_seed(seed, 1));
  r.swapped = evaluate_ordering(p.transposed(), states2, states1, config.seesaw, derive_seed(seed, 2));
  r.holds = r.forward.holds && r.swapped.holds;
  if (config.with_quantumness) {
    r.q1 = quantumness(states1, config.quantumness, derive_seed(seed, 3));
    r.q2 = quantumness(states2, config.quantumness, derive_seed(seed, 4));
    r.quantumness_bound =
        r.forward.lhs >= r.q1->value_lower * r.q2->value_lower - config.quantumness_tolerance;
    r.holds = r.holds && *r.quantumness_bound;
  }
  return r;
}

}  // namespace qlab
