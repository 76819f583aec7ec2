#include "qlab/channels.hpp"

#include "qlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qlab {

namespace {

void require_psd(const HermitianOp& a, const char* what, std::size_t k) {
  const double lmin = min_eigenvalue(a);
  if (lmin < -tol::kPsd * std::max(1.0, operator_norm(a))) {
    std::ostringstream os;
    os << "CpMap::holevo: " << what << "_" << k << " is not positive semidefinite (min eigenvalue " << lmin << ")";
    throw InputError(os.str());
  }
}

double trace_product(const CMatrix& a, const CMatrix& b) {
  // Tr(a b) for Hermitian a, b.
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace

CpMap CpMap::kraus(int in_dim, int out_dim, std::vector<CMatrix> operators) {
  if (in_dim < 1 || out_dim < 1) throw InputError("CpMap::kraus: dimensions must be positive");
  if (operators.empty()) throw InputError("CpMap::kraus: needs at least one Kraus operator");
  for (const CMatrix& a : operators) {
    if (a.rows() != out_dim || a.cols() != in_dim) {
      std::ostringstream os;
      os << "CpMap::kraus: operator is " << a.rows() << "x" << a.cols() << ", expected " << out_dim << "x" << in_dim;
      throw InputError(os.str());
    }
    if (!a.allFinite()) throw InputError("CpMap::kraus: non-finite Kraus operator entry");
  }
  return CpMap(in_dim, out_dim, KrausForm{std::move(operators)});
}

CpMap CpMap::holevo(int in_dim, int out_dim, std::vector<HolevoTerm> terms) {
  if (in_dim < 1 || out_dim < 1) throw InputError("CpMap::holevo: dimensions must be positive");
  if (terms.empty()) throw InputError("CpMap::holevo: needs at least one term");
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].R.dim() != out_dim || terms[k].X.dim() != in_dim) {
      throw InputError("CpMap::holevo: term dimensions do not match the map");
    }
    require_psd(terms[k].R, "R", k);
    require_psd(terms[k].X, "X", k);
  }
  return CpMap(in_dim, out_dim, HolevoForm{std::move(terms)});
}

CpMap CpMap::identity(int dim) { return kraus(dim, dim, {CMatrix::Identity(dim, dim)}); }

const HolevoForm& CpMap::holevo_form() const {
  if (!is_holevo()) throw InputError("CpMap: map is not in Holevo form");
  return std::get<HolevoForm>(rep_);
}

const KrausForm& CpMap::kraus_form() const {
  if (is_holevo()) throw InputError("CpMap: map is not in Kraus form");
  return std::get<KrausForm>(rep_);
}

HermitianOp CpMap::apply(const HermitianOp& rho) const {
  if (rho.dim() != in_dim_) {
    std::ostringstream os;
    os << "CpMap::apply: input has dimension " << rho.dim() << ", map expects " << in_dim_;
    throw InputError(os.str());
  }
  CMatrix out = CMatrix::Zero(out_dim_, out_dim_);
  if (const auto* h = std::get_if<HolevoForm>(&rep_)) {
    for (const HolevoTerm& t : h->terms) out += t.R.matrix() * trace_product(t.X.matrix(), rho.matrix());
  } else {
    for (const CMatrix& a : std::get<KrausForm>(rep_).operators) out += a * rho.matrix() * a.adjoint();
  }
  return HermitianOp::hermitian_part(out);
}

CMatrix CpMap::apply_pure(const CVector& v) const {
  CMatrix out = CMatrix::Zero(out_dim_, out_dim_);
  if (const auto* h = std::get_if<HolevoForm>(&rep_)) {
    for (const HolevoTerm& t : h->terms) out += t.R.matrix() * t.X.expectation(v);
  } else {
    for (const CMatrix& a : std::get<KrausForm>(rep_).operators) {
      const CVector w = a * v;
      out += w * w.adjoint();
    }
  }
  return out;
}

CMatrix CpMap::apply_adjoint_pure(const CVector& u) const {
  CMatrix out = CMatrix::Zero(in_dim_, in_dim_);
  if (const auto* h = std::get_if<HolevoForm>(&rep_)) {
    for (const HolevoTerm& t : h->terms) out += t.X.matrix() * t.R.expectation(u);
  } else {
    for (const CMatrix& a : std::get<KrausForm>(rep_).operators) {
      const CVector w = a.adjoint() * u;
      out += w * w.adjoint();
    }
  }
  return out;
}

CpMap CpMap::to_kraus() const {
  if (!is_holevo()) return *this;
  std::vector<CMatrix> ops;
  for (const HolevoTerm& t : std::get<HolevoForm>(rep_).terms) {
    const Eigensystem er = eigh(t.R);
    const Eigensystem ex = eigh(t.X);
    for (Eigen::Index a = 0; a < er.values.size(); ++a) {
      if (!(er.values(a) > 0.0)) continue;
      for (Eigen::Index c = 0; c < ex.values.size(); ++c) {
        if (!(ex.values(c) > 0.0)) continue;
        ops.push_back(std::sqrt(er.values(a) * ex.values(c)) * er.vectors.col(a) * ex.vectors.col(c).adjoint());
      }
    }
  }
  if (ops.empty()) ops.push_back(CMatrix::Zero(out_dim_, in_dim_));
  return kraus(in_dim_, out_dim_, std::move(ops));
}

CpMap phi_from_ensemble(const Ensemble& e) {
  std::vector<HolevoTerm> terms;
  terms.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const HermitianOp pi = HermitianOp::projector(e.state(i));
    terms.push_back({pi * e.weight(i), pi});
  }
  return CpMap::holevo(e.dim(), e.dim(), std::move(terms));
}

CpMap tensor_maps(const CpMap& m1, const CpMap& m2) {
  const int in = m1.in_dim() * m2.in_dim();
  const int out = m1.out_dim() * m2.out_dim();
  if (m1.is_holevo() && m2.is_holevo()) {
    std::vector<HolevoTerm> terms;
    for (const HolevoTerm& a : m1.holevo_form().terms) {
      for (const HolevoTerm& b : m2.holevo_form().terms) terms.push_back({tensor(a.R, b.R), tensor(a.X, b.X)});
    }
    return CpMap::holevo(in, out, std::move(terms));
  }
  const CpMap k1 = m1.to_kraus();
  const CpMap k2 = m2.to_kraus();
  std::vector<CMatrix> ops;
  for (const CMatrix& a : k1.kraus_form().operators) {
    for (const CMatrix& b : k2.kraus_form().operators) ops.push_back(kron(a, b));
  }
  return CpMap::kraus(in, out, std::move(ops));
}

CpMap precompose(const CpMap& m, const CMatrix& b) {
  if (b.rows() != m.in_dim() || b.cols() != m.in_dim()) throw InputError("precompose: dimension mismatch");
  if (m.is_holevo()) {
    std::vector<HolevoTerm> terms;
    for (const HolevoTerm& t : m.holevo_form().terms) {
      const Eigensystem es = eigh(CMatrix(b.adjoint() * t.X.matrix() * b));
      const CMatrix x = es.vectors * es.values.cwiseMax(0.0).asDiagonal() * es.vectors.adjoint();
      terms.push_back({t.R, HermitianOp::hermitian_part(x)});
    }
    return CpMap::holevo(m.in_dim(), m.out_dim(), std::move(terms));
  }
  std::vector<CMatrix> ops;
  for (const CMatrix& a : m.kraus_form().operators) ops.push_back(a * b);
  return CpMap::kraus(m.in_dim(), m.out_dim(), std::move(ops));
}

double output_norm(const CpMap& m, const CVector& psi) { return max_eigenvalue(m.apply_pure(psi)); }

std::pair<double, CVector> nu_inf_ascent(const CpMap& m, const CVector& start, int max_iterations,
                                         double relative_tolerance) {
  CVector psi = start.normalized();
  auto [value, u] = dominating_eigenvector(m.apply_pure(psi));
  for (int it = 0; it < max_iterations; ++it) {
    const CMatrix h = m.apply_adjoint_pure(u);
    const double threshold = value + relative_tolerance * std::max(std::abs(value), 1e-300);

    // Alternating step: the maximizer of <psi|m*(uu*)|psi> never decreases
    // <u|m(psi psi*)|u>, hence never decreases the output norm.
    CVector cand = dominating_eigenvector(h).second;
    auto [cval, cu] = dominating_eigenvector(m.apply_pure(cand));
    if (cval > threshold) {
      psi = cand;
      value = cval;
      u = cu;
      continue;
    }

    // Riemannian gradient step with halving.
    const Complex rayleigh = psi.dot(h * psi);
    const CVector grad = h * psi - rayleigh * psi;
    if (grad.norm() < 1e-15) break;
    double step = 1.0 / std::max(max_eigenvalue(h), 1e-300);
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      cand = (psi + step * grad).normalized();
      auto [gval, gu] = dominating_eigenvector(m.apply_pure(cand));
      if (gval > threshold) {
        psi = cand;
        value = gval;
        u = gu;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {value, psi};
}

NuInfReport nu_infinity(const CpMap& m, const NuInfConfig& config, std::uint64_t seed) {
  if (config.restarts < 1) throw InputError("nu_infinity: restarts must be >= 1");
  const int d = m.in_dim();
  NuInfReport report;
  report.restarts_used = config.restarts;
  double best = -1.0;
  CVector best_state;
  auto record = [&](double v, const CVector& s) {
    report.best_per_restart.push_back(v);
    if (v > best) {
      best = v;
      best_state = s;
    }
  };

  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const CVector start = gaussian_vector(d, rng);
    auto [v, s] = nu_inf_ascent(m, start, config.max_iterations, config.relative_tolerance);
    record(v, s);
  }
  for (const PureState& start : config.extra_starts) {
    if (start.dim() != d) throw InputError("nu_infinity: extra start has the wrong dimension");
    auto [v, s] = nu_inf_ascent(m, start.amplitudes(), config.max_iterations, config.relative_tolerance);
    record(v, s);
  }
  if (d == 2 && config.bloch_grid) {
    double grid_best = -1.0;
    CVector grid_state(2);
    CVector v(2);
    for (int j = 0; j < 180; ++j) {
      const double theta = (j + 0.5) * std::numbers::pi / 180.0;
      for (int k = 0; k < 360; ++k) {
        const double phi = k * std::numbers::pi / 180.0;
        v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
        const double val = output_norm(m, v);
        if (val > grid_best) {
          grid_best = val;
          grid_state = v;
        }
      }
    }
    auto [pv, ps] = nu_inf_ascent(m, grid_state, config.max_iterations, config.relative_tolerance);
    if (pv >= grid_best) {
      record(pv, ps);
    } else {
      record(grid_best, grid_state);
    }
  }
  report.value = std::max(best, 0.0);
  report.argmax_state = PureState(best_state);
  return report;
}

NuInfReport nu_infinity(const CpMap& m, int restarts, std::uint64_t seed) {
  NuInfConfig config;
  config.restarts = restarts;
  return nu_infinity(m, config, seed);
}

EbMultiplicativityReport check_eb_multiplicativity(const CpMap& psi, const CpMap& omega, const EbCheckConfig& config,
                                                   std::uint64_t seed) {
  if (!psi.is_holevo()) throw InputError("check_eb_multiplicativity: first map must be in Holevo form");
  EbMultiplicativityReport report;
  NuInfConfig factor;
  factor.restarts = config.factor_restarts;
  report.nu1 = nu_infinity(psi, factor, derive_seed(seed, 1));
  report.nu2 = nu_infinity(omega, factor, derive_seed(seed, 2));

  NuInfConfig product;
  product.restarts = config.product_restarts;
  product.extra_starts.push_back(tensor(report.nu1.argmax_state, report.nu2.argmax_state));
  report.nu12 = nu_infinity(tensor_maps(psi, omega), product, derive_seed(seed, 3));

  const double prod = report.nu1.value * report.nu2.value;
  report.gap = report.nu12.value - prod;
  report.lower_bound_ok = report.nu12.value >= prod - config.tolerance;
  return report;
}

EbMultiplicativityReport check_eb_multiplicativity(const CpMap& psi, const CpMap& omega, int restarts,
                                                   std::uint64_t seed) {
  EbCheckConfig config;
  config.factor_restarts = restarts;
  config.product_restarts = 2 * restarts;
  return check_eb_multiplicativity(psi, omega, config, seed);
}

AppendixReport appendix_chain_check(const CpMap& psi, const CpMap& omega, const HermitianOp& tau12) {
  const HolevoForm& form = psi.holevo_form();
  const int d1 = psi.in_dim();
  const int d2 = omega.in_dim();
  const int o1 = psi.out_dim();
  const int o2 = omega.out_dim();
  if (tau12.dim() != d1 * d2) throw InputError("appendix_chain_check: tau12 has the wrong dimension");
  if (min_eigenvalue(tau12) < -tol::kPsd) throw InputError("appendix_chain_check: tau12 is not PSD");
  if (std::abs(tau12.trace() - 1.0) > 1e-9) throw InputError("appendix_chain_check: tau12 must have unit trace");

  AppendixReport r;
  const CMatrix& tau = tau12.matrix();
  const CMatrix id2 = CMatrix::Identity(d2, d2);

  // Both sides computed independently of the decomposition under test.
  const CMatrix full = tensor_maps(psi, omega).apply(tau12).matrix();
  const CMatrix psi_id = tensor_maps(psi, CpMap::identity(d2)).apply(tau12).matrix();
  const HermitianOp tau1 = HermitianOp::hermitian_part(partial_trace_second(tau, d1, d2));
  const CMatrix psi_tau1 = psi.apply(tau1).matrix();

  CMatrix recon = CMatrix::Zero(o1 * o2, o1 * o2);
  CMatrix recon_id = CMatrix::Zero(o1 * d2, o1 * d2);
  CMatrix marginal = CMatrix::Zero(o1, o1);
  double max_g = 0.0;
  for (std::size_t k = 0; k < form.terms.size(); ++k) {
    const HolevoTerm& t = form.terms[k];
    const CMatrix yk = partial_trace_first(kron(t.X.matrix(), id2) * tau, d1, d2);
    const double xk = yk.trace().real();
    if (xk <= kHolevoTermCutoff) continue;
    const HermitianOp gp = HermitianOp::hermitian_part(yk / xk);
    const HermitianOp g = omega.apply(gp);
    r.kept.push_back(k);
    r.x.push_back(xk);
    r.g_prime.push_back(gp);
    r.g.push_back(g);
    recon += xk * kron(t.R.matrix(), g.matrix());
    recon_id += xk * kron(t.R.matrix(), gp.matrix());
    marginal += xk * t.R.matrix();
    max_g = std::max(max_g, operator_norm(g));
  }

  r.reconstruction_error = (recon - full).cwiseAbs().maxCoeff();
  r.identity_reconstruction_error = (recon_id - psi_id).cwiseAbs().maxCoeff();
  r.marginal_error = (marginal - psi_tau1).cwiseAbs().maxCoeff();
  r.lhs = operator_norm(HermitianOp::hermitian_part(full));
  r.rhs = max_g * operator_norm(HermitianOp::hermitian_part(psi_tau1));
  r.operator_slack = min_eigenvalue(CMatrix(max_g * kron(psi_tau1, CMatrix::Identity(o2, o2)) - full));

  constexpr double kIdentityTol = 1e-9;
  constexpr double kSlackTol = -1e-10;
  r.holds = r.reconstruction_error <= kIdentityTol && r.identity_reconstruction_error <= kIdentityTol &&
            r.marginal_error <= kIdentityTol && r.rhs - r.lhs >= kSlackTol && r.operator_slack >= kSlackTol;
  return r;
}

}  // namespace qlab
