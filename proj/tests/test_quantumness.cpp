#include <doctest.h>

#include "oracles.hpp"
#include "qlab/quantumness.hpp"

#include <numbers>
#include <numeric>

using namespace qlab;

namespace {

PureState real_state(double a, double b) {
  CVector v(2);
  v << a, b;
  return PureState(v);
}

std::vector<PureState> trine() {
  std::vector<PureState> s;
  for (int k = 0; k < 3; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 3.0;
    s.push_back(real_state(std::cos(t / 2), std::sin(t / 2)));
  }
  return s;
}

QuantumnessConfig light() {
  QuantumnessConfig c;
  c.starts = 2;
  c.max_evaluations = 40;
  return c;
}

// Frozen at the first run of this build.
constexpr double kPairQuantumness = 0.93301270189221941;

}  // namespace

TEST_SUITE("quantumness") {
  TEST_CASE("orthonormal sets are classical") {
    const std::vector<PureState> basis{PureState::basis(2, 0), PureState::basis(2, 1)};
    const QuantumnessReport r = quantumness(basis, light(), 1);
    CHECK(std::abs(r.value_upper - 1.0) <= 5e-3);
    CHECK(r.value_lower >= 1.0 - 1e-9);
  }

  TEST_CASE("single state") {
    QuantumnessConfig c = light();
    c.search.certificate.require_spanning = false;
    c.final.certificate.require_spanning = false;
    const std::vector<PureState> one{random_pure_state(2, 5)};
    const QuantumnessReport r = quantumness(one, c, 1);
    CHECK(std::abs(r.value_lower - 1.0) <= 1e-9);
    CHECK(std::abs(r.value_upper - 1.0) <= 1e-6);
    CHECK_THROWS_AS(quantumness(one, light(), 1), InputError);
  }

  TEST_CASE("pair against a prior-grid oracle") {
    const std::vector<PureState> pair{real_state(1, 0), real_state(1, 1)};
    const QuantumnessReport r = quantumness(pair, QuantumnessConfig{}, 0);

    double oracle_min = 2.0;
    for (int k = 1; k < 100; ++k) {
      oracle_min = std::min(oracle_min, oracle::pair_fidelity_grid(k / 100.0, pair[0].amplitudes(), pair[1].amplitudes()));
    }
    CHECK(std::abs(r.value_upper - oracle_min) <= 5e-3);
    CHECK(r.value_upper >= oracle_min - 1e-9);
    CHECK(r.value_lower <= r.value_upper + 1e-8);

    const FidelityBracket uniform = accessible_fidelity(Ensemble::uniform(pair), QuantumnessConfig{}.final, derive_seed(0, 7));
    CHECK(r.value_upper <= uniform.upper + 1e-8);
    CHECK(r.value_lower == doctest::Approx(kPairQuantumness).epsilon(1e-6));
    CHECK(r.worst_prior[0] == doctest::Approx(0.5).epsilon(1e-2));

    // The reported prior reproduces its bracket.
    const FidelityBracket again = accessible_fidelity(Ensemble(r.worst_prior, pair), QuantumnessConfig{}.final, derive_seed(0, 7));
    CHECK(again.upper == doctest::Approx(r.worst_bracket.upper).epsilon(1e-12));
    CHECK(quantumness(pair, QuantumnessConfig{}, 0).value_upper == r.value_upper);
  }

  TEST_CASE("restricting the simplex never lowers the bound") {
    const std::vector<PureState> t = trine();
    const QuantumnessReport full = quantumness(t, light(), 3);
    QuantumnessConfig sub = light();
    sub.fixed_zero = {false, false, true};
    sub.search.certificate.require_spanning = true;
    const QuantumnessReport restricted = quantumness(t, sub, 3);
    CHECK(restricted.value_upper >= full.value_upper - 1e-6);
    CHECK(restricted.worst_prior[2] == 0.0);
    for (const PriorProbe& p : full.trace) {
      CHECK(p.lower <= p.upper + 1e-8);
      CHECK(std::abs(std::accumulate(p.prior.begin(), p.prior.end(), 0.0) - 1.0) <= 1e-12);
    }
    CHECK(full.value_upper <= accessible_fidelity(Ensemble::uniform(t), light().final, derive_seed(3, 7)).upper + 1e-8);
    CHECK(full.value_lower >= 0.0);
  }

  TEST_CASE("maximum over priors is the point mass") {
    const std::vector<PureState> pair{real_state(1, 0), real_state(1, 1)};
    const ExtremePrior a = max_fidelity_over_priors(pair);
    CHECK(std::abs(a.value - 1.0) <= 1e-9);
    CHECK(a.prior == std::vector<double>{1.0, 0.0});
    const std::vector<PureState> basis{PureState::basis(3, 0), PureState::basis(3, 1), PureState::basis(3, 2)};
    CHECK(std::abs(max_fidelity_over_priors(basis).value - 1.0) <= 1e-9);
    CHECK(std::abs(max_fidelity_over_priors(trine()).value - 1.0) <= 1e-9);
  }
}
