#include "qlab/fidelity.hpp"

#include "qlab/channels.hpp"
#include "qlab/parallel.hpp"
#include "qlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace qlab {

EnsembleMap::EnsembleMap(const Ensemble& e) : states_(e.dim(), static_cast<Eigen::Index>(e.size())), weights_(e.size()) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    states_.col(static_cast<Eigen::Index>(i)) = e.state(i).amplitudes();
    weights_(static_cast<Eigen::Index>(i)) = e.weight(i);
  }
}

CMatrix EnsembleMap::apply(const CMatrix& rho) const {
  if (rho.rows() != states_.rows() || rho.cols() != states_.rows()) {
    throw InputError("EnsembleMap::apply: dimension mismatch");
  }
  const RVector c = (states_.adjoint() * rho * states_).diagonal().real().cwiseProduct(weights_);
  return states_ * c.asDiagonal() * states_.adjoint();
}

CMatrix EnsembleMap::apply_pure(const CVector& v) const {
  const RVector c = (states_.adjoint() * v).cwiseAbs2().cwiseProduct(weights_);
  return states_ * c.asDiagonal() * states_.adjoint();
}

double EnsembleMap::g_pure(const CVector& v) const { return max_eigenvalue(apply_pure(v)); }

double intercept_resend_fidelity(const Ensemble& e, const EavesdropStrategy& s) {
  if (s.povm.size() != s.resend_states.size()) {
    throw InputError("intercept_resend_fidelity: one resend state per POVM element is required");
  }
  if (s.povm.dim() != e.dim()) throw InputError("intercept_resend_fidelity: dimension mismatch");
  double f = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const PureState& psi = e.state(i);
    for (std::size_t b = 0; b < s.povm.size(); ++b) {
      if (s.resend_states[b].dim() != e.dim()) throw InputError("intercept_resend_fidelity: dimension mismatch");
      f += e.weight(i) * s.povm[b].expectation(psi.amplitudes()) * psi.overlap(s.resend_states[b]);
    }
  }
  return f;
}

double g_value(const Ensemble& e, const HermitianOp& rho) {
  if (rho.dim() != e.dim()) throw InputError("g_value: dimension mismatch");
  return operator_norm(HermitianOp::hermitian_part(EnsembleMap(e).apply(rho.matrix())));
}

MixedEnsemble povm_to_ensemble(const Povm& p) {
  const double d = p.dim();
  MixedEnsemble out;
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double t = p[b].trace();
    if (t <= 1e-15 * d) continue;
    out.weights.push_back(t / d);
    out.states.push_back(p[b] * (1.0 / t));
    out.source.push_back(b);
  }
  return out;
}

namespace {

constexpr double kFreeOutcome = 1e-13;
constexpr double kSameState = 1.0 - 1e-12;

double overlap(const CVector& a, const CVector& b) { return std::norm(a.dot(b)); }

struct SeesawRun {
  double value = 0.0;
  std::vector<CMatrix> povm;
  std::vector<CVector> phis;
  std::optional<HermitianOp> dual;
  std::vector<double> trajectory;
};

// Resend states and per-outcome values ||Phi(E_b)|| for a fixed POVM.
void evaluate(const EnsembleMap& map, SeesawRun& run, std::vector<double>& lams) {
  const std::size_t nb = run.povm.size();
  lams.assign(nb, 0.0);
  run.phis.resize(nb);
  run.value = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    auto [lam, v] = dominating_eigenvector(map.apply(run.povm[b]));
    lams[b] = std::max(lam, 0.0);
    run.phis[b] = v;
    run.value += lams[b];
  }
}

// Up to `wanted` candidates phi with lambda_max(Phi(phi phi*) - Y) > 0, most
// violated first, distinct from each other and from `taken`.
std::vector<CVector> violators(const EnsembleMap& map, const Ensemble& e, const CMatrix& y,
                               const std::vector<CVector>& taken, std::size_t wanted, Rng& rng) {
  std::vector<std::pair<double, CVector>> found;
  auto consider = [&](const CVector& start) {
    auto r = violation_ascent(map, y, start, 100);
    if (r.first > 1e-12) found.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < e.size(); ++i) consider(e.state(i).amplitudes());
  for (int k = 0; k < 4; ++k) consider(gaussian_vector(map.dim(), rng).normalized());
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<CVector> out;
  for (auto& [v, phi] : found) {
    if (out.size() >= wanted) break;
    bool fresh = true;
    for (const CVector& t : taken) fresh = fresh && overlap(t, phi) < kSameState;
    for (const CVector& t : out) fresh = fresh && overlap(t, phi) < kSameState;
    if (fresh) out.push_back(phi);
  }
  return out;
}

SeesawRun seesaw_run(const EnsembleMap& map, const Ensemble& e, std::vector<CMatrix> start, const SeesawConfig& cfg,
                     std::uint64_t seed) {
  Rng rng(seed);
  const int d = e.dim();
  const std::size_t nb = start.size();
  SeesawRun run;
  run.povm = std::move(start);
  std::vector<double> lams;
  evaluate(map, run, lams);
  run.trajectory.push_back(run.value);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    // Outcomes resending the same state act as one outcome.
    for (std::size_t b = 0; b < nb; ++b) {
      if (lams[b] <= kFreeOutcome) continue;
      bool merged = false;
      for (std::size_t c = b + 1; c < nb; ++c) {
        if (lams[c] > kFreeOutcome && overlap(run.phis[b], run.phis[c]) >= kSameState) {
          run.povm[b] += run.povm[c];
          run.povm[c].setZero();
          lams[c] = 0.0;
          merged = true;
        }
      }
      if (merged) {
        auto [lam, v] = dominating_eigenvector(map.apply(run.povm[b]));
        lams[b] = std::max(lam, 0.0);
        run.phis[b] = v;
      }
    }

    std::vector<std::size_t> free;
    std::vector<CVector> taken;
    for (std::size_t b = 0; b < nb; ++b) {
      if (lams[b] <= kFreeOutcome) {
        free.push_back(b);
      } else {
        taken.push_back(run.phis[b]);
      }
    }
    if (!free.empty()) {
      std::vector<CVector> fill;
      if (run.dual) {
        fill = violators(map, e, run.dual->matrix(), taken, free.size(), rng);
      } else {
        std::vector<std::size_t> order(e.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e.weight(a) > e.weight(b); });
        for (std::size_t i : order) {
          if (fill.size() >= free.size()) break;
          const CVector& s = e.state(i).amplitudes();
          bool fresh = true;
          for (const CVector& t : taken) fresh = fresh && overlap(t, s) < kSameState;
          for (const CVector& t : fill) fresh = fresh && overlap(t, s) < kSameState;
          if (fresh) fill.push_back(s);
        }
      }
      while (fill.size() < free.size()) fill.push_back(gaussian_vector(d, rng).normalized());
      for (std::size_t k = 0; k < free.size(); ++k) run.phis[free[k]] = fill[k];
    }

    std::vector<HermitianOp> ops;
    ops.reserve(nb);
    for (const CVector& phi : run.phis) ops.push_back(HermitianOp::hermitian_part(map.apply_pure(phi)));
    DiscriminationResult step = discrimination_step(ops, cfg.barrier);

    SeesawRun next;
    next.povm.reserve(nb);
    for (const HermitianOp& el : step.povm.elements()) next.povm.push_back(el.matrix());
    std::vector<double> next_lams;
    evaluate(map, next, next_lams);
    if (!(next.value > run.value + cfg.tolerance)) break;
    run.povm = std::move(next.povm);
    run.phis = std::move(next.phis);
    run.value = next.value;
    run.dual = std::move(step.dual);
    lams = std::move(next_lams);
    run.trajectory.push_back(run.value);
  }
  return run;
}

std::vector<CMatrix> padded(const Povm& p, std::size_t outcomes) {
  if (p.size() > outcomes) throw InputError("accessible_fidelity_seesaw: warm start has too many outcomes");
  std::vector<CMatrix> out;
  for (const HermitianOp& el : p.elements()) out.push_back(el.matrix());
  while (out.size() < outcomes) out.push_back(CMatrix::Zero(p.dim(), p.dim()));
  return out;
}

}  // namespace

SeesawResult accessible_fidelity_seesaw(const Ensemble& e, const SeesawConfig& config, std::uint64_t seed) {
  const int d = e.dim();
  const int outcomes = config.outcomes == 0 ? d * d : config.outcomes;
  if (outcomes < 1) throw InputError("accessible_fidelity_seesaw: outcomes must be >= 1");
  if (config.restarts < 1) throw InputError("accessible_fidelity_seesaw: restarts must be >= 1");
  const EnsembleMap map(e);
  const std::size_t nb = static_cast<std::size_t>(outcomes);

  std::vector<std::vector<CMatrix>> starts;
  for (const EavesdropStrategy& s : config.initial_strategies) {
    if (s.povm.dim() != d) throw InputError("accessible_fidelity_seesaw: warm start has the wrong dimension");
    starts.push_back(padded(s.povm, nb));
  }
  std::vector<CMatrix> nothing(nb, CMatrix::Zero(d, d));
  nothing.front() = CMatrix::Identity(d, d);
  starts.push_back(std::move(nothing));
  for (int k = 1; k < config.restarts; ++k) {
    starts.push_back(padded(random_povm(d, outcomes, derive_seed(seed, static_cast<std::uint64_t>(k))), nb));
  }

  std::vector<SeesawRun> runs = parallel_map(starts.size(), [&](std::size_t k) {
    return seesaw_run(map, e, starts[k], config, derive_seed(seed, 1000 + k));
  });

  SeesawResult result;
  std::size_t best = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    result.best_per_restart.push_back(runs[k].value);
    if (runs[k].value > runs[best].value) best = k;
  }
  SeesawRun& winner = runs[best];
  std::vector<HermitianOp> els;
  std::vector<PureState> phis;
  for (std::size_t b = 0; b < nb; ++b) {
    els.push_back(HermitianOp::hermitian_part(winner.povm[b]));
    phis.emplace_back(winner.phis[b]);
  }
  result.value = winner.value;
  result.strategy = EavesdropStrategy{Povm(std::move(els)), std::move(phis)};
  result.dual = winner.dual ? *winner.dual : HermitianOp::zero(d);
  result.trajectory = std::move(winner.trajectory);
  return result;
}

SeesawResult accessible_fidelity_seesaw(const Ensemble& e, int outcomes, int restarts, std::uint64_t seed) {
  SeesawConfig config;
  config.outcomes = outcomes;
  config.restarts = restarts;
  return accessible_fidelity_seesaw(e, config, seed);
}

std::pair<double, CVector> violation_ascent(const EnsembleMap& phi, const CMatrix& x, const CVector& start,
                                            int max_iterations) {
  CVector f = start.normalized();
  auto [value, psi] = dominating_eigenvector(CMatrix(phi.apply_pure(f) - x));
  for (int it = 0; it < max_iterations; ++it) {
    CVector nf = dominating_eigenvector(phi.apply_pure(psi)).second;
    auto [nv, npsi] = dominating_eigenvector(CMatrix(phi.apply_pure(nf) - x));
    if (!(nv > value + 1e-15 * std::max(1.0, std::abs(value)))) break;
    value = nv;
    f = std::move(nf);
    psi = std::move(npsi);
  }
  return {value, f};
}

namespace {

struct Probe {
  double violation;
  CVector state;
};

// Worst constraint max_phi lambda_max(Phi(phi phi*) - X) found by ascents
// from the given starts, plus (qubits) a polished Bloch-grid search.
Probe worst_constraint(const EnsembleMap& map, const CMatrix& x, const std::vector<CVector>& starts, bool grid) {
  Probe worst{-std::numeric_limits<double>::infinity(), CVector()};
  for (const CVector& s : starts) {
    auto [v, f] = violation_ascent(map, x, s);
    if (v > worst.violation) worst = {v, f};
  }
  if (grid && map.dim() == 2) {
    double best = -std::numeric_limits<double>::infinity();
    CVector best_state(2);
    CVector v(2);
    for (int j = 0; j < 180; ++j) {
      const double theta = (j + 0.5) * std::numbers::pi / 180.0;
      for (int k = 0; k < 360; ++k) {
        const double phi = k * std::numbers::pi / 180.0;
        v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
        const double val = max_eigenvalue(CMatrix(map.apply_pure(v) - x));
        if (val > best) {
          best = val;
          best_state = v;
        }
      }
    }
    auto [pv, pf] = violation_ascent(map, x, best_state);
    if (best > worst.violation) worst = {best, best_state};
    if (pv > worst.violation) worst = {pv, pf};
  }
  return worst;
}

HermitianOp shifted(const HermitianOp& x, double shift) {
  CMatrix m = x.matrix();
  m.diagonal().array() += shift;
  return HermitianOp::hermitian_part(m);
}

// Raises X by its verified violation and by whatever lifts lambda_min to the
// floor, then re-verifies with fresh probes (repeating if those find more).
Certificate finalize(const Ensemble& e, HermitianOp x, const CertificateConfig& cfg, std::uint64_t seed) {
  Certificate cert = verify_certificate(e, x, cfg.random_probes, cfg.verify_restarts, derive_seed(seed, 0));
  long probes = cert.probe_count;
  for (int pass = 1; pass <= 4; ++pass) {
    double shift = std::max(0.0, -cert.margin);
    const double floor_gap = cfg.min_eigenvalue - min_eigenvalue(cert.X);
    if (floor_gap > 0.0) shift = std::max(shift, floor_gap);
    if (shift == 0.0) break;
    x = shifted(cert.X, shift);
    cert = verify_certificate(e, x, cfg.random_probes, cfg.verify_restarts, derive_seed(seed, pass));
    probes += cert.probe_count;
    if (cert.margin >= 0.0 && min_eigenvalue(cert.X) >= cfg.min_eigenvalue * (1.0 - 1e-6)) break;
  }
  cert.probe_count = probes;
  return cert;
}

}  // namespace

Certificate verify_certificate(const Ensemble& e, const HermitianOp& x, int random_probes, int ascent_restarts,
                               std::uint64_t seed) {
  if (x.dim() != e.dim()) throw InputError("verify_certificate: dimension mismatch");
  const EnsembleMap map(e);
  const int d = e.dim();
  const CMatrix& xm = x.matrix();
  Rng rng(derive_seed(seed, 0));

  double margin = std::numeric_limits<double>::infinity();
  long probes = 0;
  for (int k = 0; k < random_probes; ++k) {
    const CVector psi = gaussian_vector(d, rng).normalized();
    margin = std::min(margin, x.expectation(psi) - map.g_pure(psi));
    ++probes;
  }
  std::vector<CVector> starts;
  for (std::size_t i = 0; i < e.size(); ++i) starts.push_back(e.state(i).amplitudes());
  for (int k = 0; k < ascent_restarts; ++k) starts.push_back(gaussian_vector(d, rng).normalized());
  const Probe worst = worst_constraint(map, xm, starts, true);
  probes += static_cast<long>(starts.size()) + (d == 2 ? 360L * 180L + 1 : 0L);
  margin = std::min(margin, -worst.violation);
  return Certificate{x, margin, probes};
}

Certificate scalar_certificate(const Ensemble& e, const CertificateConfig& config, std::uint64_t seed) {
  const NuInfReport nu = nu_infinity(phi_from_ensemble(e), NuInfConfig{}, derive_seed(seed, 0));
  return finalize(e, HermitianOp::identity(e.dim()) * nu.value, config, derive_seed(seed, 1));
}

Certificate dual_certificate_search(const Ensemble& e, const CertificateConfig& config, std::uint64_t seed,
                                    std::span<const PureState> warm_probes) {
  if (config.require_spanning && !spans_space(e.states())) {
    throw InputError("dual_certificate_search: the ensemble states do not span the space");
  }
  const EnsembleMap map(e);
  const int d = e.dim();
  Rng rng(derive_seed(seed, 0));

  std::vector<CVector> probes;
  auto add_probe = [&](const CVector& s) {
    for (const CVector& t : probes) {
      if (overlap(t, s) >= kSameState) return false;
    }
    probes.push_back(s);
    return true;
  };
  for (std::size_t i = 0; i < e.size(); ++i) add_probe(e.state(i).amplitudes());
  for (const PureState& s : warm_probes) {
    if (s.dim() != d) throw InputError("dual_certificate_search: warm probe has the wrong dimension");
    add_probe(s.amplitudes());
  }

  HermitianOp y;
  std::vector<CVector> recent;
  for (int round = 0; round < std::max(config.max_rounds, 1); ++round) {
    std::vector<HermitianOp> ops;
    ops.reserve(probes.size());
    for (const CVector& p : probes) ops.push_back(HermitianOp::hermitian_part(map.apply_pure(p)));
    y = discrimination_step(ops, config.barrier).dual;
    if (round + 1 >= config.max_rounds) break;

    std::vector<CVector> starts = recent;
    for (std::size_t i = 0; i < e.size(); ++i) starts.push_back(e.state(i).amplitudes());
    for (int k = 0; k < config.search_restarts; ++k) starts.push_back(gaussian_vector(d, rng).normalized());
    std::vector<Probe> found;
    for (const CVector& s : starts) {
      auto [v, f] = violation_ascent(map, y.matrix(), s);
      if (v > config.violation_tolerance) found.push_back({v, f});
    }
    if (found.empty()) break;
    std::stable_sort(found.begin(), found.end(), [](const Probe& a, const Probe& b) { return a.violation > b.violation; });
    recent.clear();
    for (const Probe& p : found) {
      if (recent.size() >= 4) break;
      if (add_probe(p.state)) recent.push_back(p.state);
    }
    if (recent.empty()) break;
  }

  Certificate cert = finalize(e, y, config, derive_seed(seed, 1));
  if (config.scalar_fallback) {
    Certificate scalar = scalar_certificate(e, config, derive_seed(seed, 2));
    if (scalar.trace() < cert.trace()) {
      scalar.probe_count += cert.probe_count;
      return scalar;
    }
    cert.probe_count += scalar.probe_count;
  }
  return cert;
}

Certificate dual_certificate_search(const Ensemble& e, int max_rounds, std::uint64_t seed) {
  CertificateConfig config;
  config.max_rounds = max_rounds;
  return dual_certificate_search(e, config, seed);
}

FidelityBracket accessible_fidelity(const Ensemble& e, const FidelityConfig& config, std::uint64_t seed) {
  if (config.certificate.require_spanning && !spans_space(e.states())) {
    throw InputError("accessible_fidelity: the ensemble states do not span the space");
  }
  SeesawResult primal = accessible_fidelity_seesaw(e, config.seesaw, derive_seed(seed, 1));
  std::vector<PureState> warm;
  for (std::size_t b = 0; b < primal.strategy.povm.size(); ++b) {
    if (primal.strategy.povm[b].trace() > 1e-12) warm.push_back(primal.strategy.resend_states[b]);
  }
  FidelityBracket bracket;
  bracket.lower = primal.value;
  bracket.certificate = dual_certificate_search(e, config.certificate, derive_seed(seed, 2), warm);
  bracket.upper = bracket.certificate.trace();
  bracket.strategy = std::move(primal.strategy);
  return bracket;
}

}  // namespace qlab
