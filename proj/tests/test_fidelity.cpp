#include <doctest.h>

#include "oracles.hpp"
#include "qlab/channels.hpp"
#include "qlab/fidelity.hpp"
#include "qlab/samples.hpp"

#include <numbers>

using namespace qlab;

namespace {

PureState real_state(double a, double b) {
  CVector v(2);
  v << a, b;
  return PureState(v);
}

Ensemble pair_cos45() { return Ensemble::uniform({real_state(1, 0), real_state(1, 1)}); }

Ensemble qubit_basis() { return Ensemble::uniform({PureState::basis(2, 0), PureState::basis(2, 1)}); }

Ensemble trine() {
  std::vector<PureState> s;
  for (int k = 0; k < 3; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 3.0;
    s.push_back(real_state(std::cos(t / 2), std::sin(t / 2)));
  }
  return Ensemble::uniform(s);
}

std::vector<CVector> amplitudes(const Ensemble& e) {
  std::vector<CVector> out;
  for (const PureState& s : e.states()) out.push_back(s.amplitudes());
  return out;
}

// Fast configuration for property loops; verification stays thorough.
FidelityConfig quick() {
  FidelityConfig c;
  c.seesaw.restarts = 6;
  c.certificate.random_probes = 5000;
  c.certificate.verify_restarts = 16;
  return c;
}

// Frozen at the first run of this build; the closed form and the grid
// oracle below check it independently.
constexpr double kPairFidelity = 0.93301270189221941;

}  // namespace

TEST_SUITE("fidelity") {
  TEST_CASE("intercept-resend fidelity on direct substitutions") {
    const PureState psi = random_pure_state(3, 4);
    const Ensemble single({1.0}, {psi});
    CHECK(intercept_resend_fidelity(single, {Povm::identity(3), {psi}}) == doctest::Approx(1.0).epsilon(1e-14));

    const Ensemble basis = Ensemble::uniform({PureState::basis(3, 0), PureState::basis(3, 1), PureState::basis(3, 2)});
    const EavesdropStrategy measure{Povm::from_basis(CMatrix::Identity(3, 3)), basis.states()};
    CHECK(intercept_resend_fidelity(basis, measure) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(intercept_resend_fidelity(pair_cos45(), {Povm::identity(2), {real_state(1, 0)}}) ==
          doctest::Approx(0.75).epsilon(1e-14));
    CHECK_THROWS_AS(intercept_resend_fidelity(pair_cos45(), {Povm::identity(3), {PureState::basis(3, 0)}}), InputError);
  }

  TEST_CASE("g value") {
    const PureState psi = random_pure_state(2, 8);
    CHECK(g_value(Ensemble({1.0}, {psi}), HermitianOp::projector(psi)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g_value(qubit_basis(), HermitianOp::identity(2)) == doctest::Approx(0.5).epsilon(1e-14));
    Rng rng(12);
    const Ensemble t = trine();
    for (int k = 0; k < 10; ++k) {
      const HermitianOp rho = random_density(2, rng);
      const CMatrix out = oracle::ensemble_map(t.weights(), amplitudes(t), rho.matrix());
      CHECK(std::abs(g_value(t, rho) - oracle::eigenvalues(out).maxCoeff()) <= 1e-10);
    }
  }

  TEST_CASE("g value is convex") {
    Rng rng(14);
    for (int k = 0; k < 20; ++k) {
      const Ensemble e = random_ensemble(2 + k % 2, 2, 4, rng);
      const HermitianOp a = random_psd(e.dim(), rng);
      const HermitianOp b = random_psd(e.dim(), rng);
      for (double lam : {0.25, 0.5, 0.75}) {
        CHECK(g_value(e, a * lam + b * (1.0 - lam)) <= lam * g_value(e, a) + (1.0 - lam) * g_value(e, b) + 1e-10);
      }
    }
  }

  TEST_CASE("ensemble map fast path") {
    Rng rng(16);
    const Ensemble e = random_ensemble(3, 2, 4, rng);
    const EnsembleMap m(e);
    const HermitianOp rho = random_density(3, rng);
    CHECK(oracle::max_abs(m.apply(rho.matrix()) - oracle::ensemble_map(e.weights(), amplitudes(e), rho.matrix())) <= 1e-14);
    const CVector v = random_pure_state(3, rng).amplitudes();
    CHECK(oracle::max_abs(m.apply_pure(v) - m.apply(v * v.adjoint())) <= 1e-14);
  }

  TEST_CASE("povm to ensemble") {
    const MixedEnsemble id = povm_to_ensemble(Povm::identity(3));
    REQUIRE(id.weights.size() == 1);
    CHECK(id.weights[0] == doctest::Approx(1.0));
    CHECK(oracle::max_abs(id.states[0].matrix() - CMatrix::Identity(3, 3) / 3.0) < 1e-15);

    const MixedEnsemble basis = povm_to_ensemble(Povm::from_basis(CMatrix::Identity(2, 2)));
    CHECK(basis.weights[0] == doctest::Approx(0.5));
    CHECK(oracle::max_abs(basis.states[1].matrix() - HermitianOp::projector(PureState::basis(2, 1)).matrix()) < 1e-15);

    const Povm p = random_povm(2, 4, 3);
    const MixedEnsemble r = povm_to_ensemble(p);
    CMatrix avg = CMatrix::Zero(2, 2);
    for (std::size_t k = 0; k < r.weights.size(); ++k) {
      CHECK(oracle::max_abs(2.0 * r.weights[k] * r.states[k].matrix() - p[r.source[k]].matrix()) <= 1e-12);
      avg += r.weights[k] * r.states[k].matrix();
    }
    CHECK(oracle::max_abs(avg - CMatrix::Identity(2, 2) / 2.0) <= 1e-10);

    const Povm with_zero({HermitianOp::identity(2), HermitianOp::zero(2)});
    CHECK(povm_to_ensemble(with_zero).weights.size() == 1);
  }

  TEST_CASE("seesaw on closed-form ensembles") {
    Rng rng(18);
    for (int d : {2, 3}) {
      std::vector<PureState> basis;
      for (int i = 0; i < d; ++i) basis.push_back(PureState::basis(d, i));
      const std::vector<double> w = random_simplex_point(d, rng);
      CHECK(std::abs(accessible_fidelity_seesaw(Ensemble(w, basis), d, 4, 1).value - 1.0) <= 1e-9);

      std::vector<double> point(3, 0.0);
      point[0] = 1.0;
      const Ensemble pm(point, {random_pure_state(d, rng), random_pure_state(d, rng), random_pure_state(d, rng)});
      CHECK(std::abs(accessible_fidelity_seesaw(pm, 0, 4, 1).value - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("equal-prior pair matches grid oracle and closed form") {
    const SeesawResult r = accessible_fidelity_seesaw(pair_cos45(), 4, 16, 0);
    const double grid = oracle::pair_fidelity_grid(0.5, real_state(1, 0).amplitudes(), real_state(1, 1).amplitudes());
    CHECK(std::abs(r.value - grid) <= 1e-3);
    CHECK(r.value >= grid - 1e-9);
    CHECK(std::abs(r.value - oracle::equal_prior_pair_fidelity(0.5)) <= 1e-9);
    CHECK(r.value == doctest::Approx(kPairFidelity).epsilon(1e-9));
  }

  TEST_CASE("seesaw invariants") {
    Rng rng(20);
    for (int k = 0; k < 8; ++k) {
      const Ensemble e = random_ensemble(2 + k % 2, 2, 4, rng);
      const SeesawResult r = accessible_fidelity_seesaw(e, 0, 4, k);
      for (std::size_t t = 1; t < r.trajectory.size(); ++t) CHECK(r.trajectory[t] >= r.trajectory[t - 1] - 1e-12);
      CHECK(std::abs(intercept_resend_fidelity(e, r.strategy) - r.value) <= 1e-10);
      const double heaviest = *std::max_element(e.weights().begin(), e.weights().end());
      CHECK(r.value >= heaviest - 1e-12);
      CHECK(r.value <= 1.0 + 1e-9);
      CHECK(r.value == doctest::Approx(*std::max_element(r.best_per_restart.begin(), r.best_per_restart.end())));
    }
  }

  TEST_CASE("seesaw is deterministic and improves with restarts") {
    const Ensemble t = trine();
    const SeesawResult a = accessible_fidelity_seesaw(t, 0, 4, 9);
    const SeesawResult b = accessible_fidelity_seesaw(t, 0, 4, 9);
    CHECK(a.value == b.value);
    CHECK(accessible_fidelity_seesaw(t, 0, 8, 9).value >= a.value - 1e-12);
  }

  TEST_CASE("violation ascent") {
    const Ensemble e = trine();
    const EnsembleMap m(e);
    const CMatrix x = CMatrix::Identity(2, 2) * 0.5;
    auto [viol, phi] = violation_ascent(m, x, random_pure_state(2, 3).amplitudes());
    CHECK(viol == doctest::Approx(oracle::eigenvalues(m.apply_pure(phi) - x).maxCoeff()).epsilon(1e-12));
    CHECK(viol <= nu_infinity(phi_from_ensemble(e), 8, 1).value - 0.5 + 1e-9);
  }

  TEST_CASE("certificates") {
    const PureState psi = random_pure_state(2, 21);
    CertificateConfig nonspanning;
    nonspanning.require_spanning = false;
    const Certificate single = dual_certificate_search(Ensemble({1.0}, {psi}), nonspanning, 3);
    CHECK(std::abs(single.trace() - 1.0) <= 1e-6);
    CHECK(single.margin >= 0.0);
    CHECK_THROWS_AS(dual_certificate_search(Ensemble({1.0}, {psi}), 40, 3), InputError);

    const Certificate basis = dual_certificate_search(qubit_basis(), 40, 5);
    CHECK(basis.trace() <= 1.0 + 5e-3);
    CHECK(basis.trace() >= 1.0 - 1e-9);
    CHECK(min_eigenvalue(basis.X) > 0.0);

    const Ensemble t = trine();
    const Certificate scalar = scalar_certificate(t, CertificateConfig{}, 1);
    CHECK(scalar.trace() == doctest::Approx(2.0 * nu_infinity(phi_from_ensemble(t), 32, 1).value).epsilon(1e-6));
    CHECK(scalar.margin >= 0.0);

    const Certificate ct = dual_certificate_search(t, 40, 7);
    CHECK(ct.trace() <= scalar.trace() + 1e-12);
    const Certificate check = verify_certificate(t, ct.X, 20000, 32, 99);
    CHECK(check.margin >= -1e-9);
  }

  TEST_CASE("brackets") {
    const FidelityBracket basis = accessible_fidelity(qubit_basis(), FidelityConfig{}, 1);
    CHECK(basis.lower >= 1.0 - 1e-9);
    CHECK(basis.upper <= 1.0 + 5e-3);

    const FidelityBracket pair = accessible_fidelity(pair_cos45(), FidelityConfig{}, 1);
    CHECK(pair.width() <= 1e-2);
    CHECK(pair.width() >= -1e-8);
    CHECK(pair.lower == doctest::Approx(kPairFidelity).epsilon(1e-9));

    Rng rng(24);
    for (int k = 0; k < 6; ++k) {
      const Ensemble e = random_ensemble(2 + k % 2, 3, 4, rng);
      const FidelityBracket b = accessible_fidelity(e, quick(), k);
      CHECK(b.lower >= 0.0);
      CHECK(b.lower <= b.upper + 1e-8);
      CHECK(b.lower <= 1.0 + 1e-9);
      CHECK(b.certificate.margin >= 0.0);
      CHECK(min_eigenvalue(b.certificate.X) > 0.0);
    }
  }

  TEST_CASE("fidelity is convex in the prior") {
    Rng rng(26);
    const std::vector<PureState> states{random_pure_state(2, rng), random_pure_state(2, rng), random_pure_state(2, rng)};
    for (int k = 0; k < 3; ++k) {
      const std::vector<double> p = random_simplex_point(3, rng);
      const std::vector<double> q = random_simplex_point(3, rng);
      const FidelityBracket bp = accessible_fidelity(Ensemble(p, states), quick(), 1);
      const FidelityBracket bq = accessible_fidelity(Ensemble(q, states), quick(), 2);
      for (double lam : {0.25, 0.5, 0.75}) {
        std::vector<double> mix(3);
        for (int i = 0; i < 3; ++i) mix[i] = lam * p[i] + (1.0 - lam) * q[i];
        const FidelityBracket bm = accessible_fidelity(Ensemble(mix, states), quick(), 3);
        CHECK(bm.lower <= lam * bp.upper + (1.0 - lam) * bq.upper + 1e-6);
      }
    }
  }
}
