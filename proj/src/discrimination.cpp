#include "qlab/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qlab {

namespace {

double objective(std::span<const HermitianOp> ops, std::span<const HermitianOp> povm) {
  double v = 0.0;
  for (std::size_t b = 0; b < ops.size(); ++b) {
    v += ops[b].matrix().cwiseProduct(povm[b].matrix().transpose()).sum().real();
  }
  return v;
}

double max_norm(std::span<const HermitianOp> ops) {
  double s = 0.0;
  for (const HermitianOp& a : ops) s = std::max(s, operator_norm(a));
  return s;
}

// Padding used when there is nothing to discriminate.
Povm first_outcome_povm(int d, std::size_t outcomes) {
  std::vector<HermitianOp> els(outcomes, HermitianOp::zero(d));
  els.front() = HermitianOp::identity(d);
  return Povm(std::move(els));
}

// Conjugates PSD candidates by S^{-1/2}, S = sum_b E_b, giving an exact POVM.
// Returns nullopt when S is too far from the identity to be a repair.
std::optional<std::vector<HermitianOp>> renormalize(const std::vector<CMatrix>& raw, int d) {
  CMatrix s = CMatrix::Zero(d, d);
  for (const CMatrix& e : raw) s += e;
  const HermitianOp sh = HermitianOp::hermitian_part(s);
  if (min_eigenvalue(sh) < 0.5) return std::nullopt;
  const CMatrix w = inv_sqrt(sh).matrix();
  std::vector<HermitianOp> out;
  out.reserve(raw.size());
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CMatrix& e : raw) {
    out.push_back(HermitianOp::hermitian_part(w * e * w));
    sum += out.back().matrix();
  }
  // Clip roundoff negativity, then absorb the tiny completeness residual into
  // the largest element.
  for (HermitianOp& e : out) {
    if (min_eigenvalue(e) < 0.0) {
      Eigensystem es = eigh(e);
      e = HermitianOp::hermitian_part(es.vectors * es.values.cwiseMax(0.0).asDiagonal() * es.vectors.adjoint());
    }
  }
  sum.setZero();
  std::size_t largest = 0;
  for (std::size_t b = 0; b < out.size(); ++b) {
    sum += out[b].matrix();
    if (out[b].trace() > out[largest].trace()) largest = b;
  }
  CMatrix fixed = out[largest].matrix() + (CMatrix::Identity(d, d) - sum);
  out[largest] = HermitianOp::hermitian_part(fixed);
  if (min_eigenvalue(out[largest]) < -tol::kPsd) return std::nullopt;
  return out;
}

// Smallest Y >= herm(sum_b A_b E_b) + shift I feasible for every constraint.
CMatrix repaired_dual(std::span<const CMatrix> ops, std::span<const HermitianOp> povm, int d) {
  CMatrix y = CMatrix::Zero(d, d);
  for (std::size_t b = 0; b < ops.size(); ++b) y += ops[b] * povm[b].matrix();
  y = 0.5 * (y + y.adjoint()).eval();
  double shift = 0.0;
  for (const CMatrix& a : ops) shift = std::max(shift, -min_eigenvalue(CMatrix(y - a)));
  y.diagonal().array() += shift;
  return y;
}

struct BarrierState {
  std::vector<CMatrix> zinv;
  double logdet_sum = 0.0;
};

// Cholesky of every slack Y - A_b; nullopt when one is not positive definite.
std::optional<BarrierState> slacks(const CMatrix& y, std::span<const CMatrix> ops) {
  BarrierState st;
  st.zinv.reserve(ops.size());
  const Eigen::Index d = y.rows();
  for (const CMatrix& a : ops) {
    Eigen::LLT<CMatrix> llt(y - a);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < d; ++i) {
      const double l = diag(i).real();
      if (!(l > 0.0) || !std::isfinite(l)) return std::nullopt;
      st.logdet_sum += 2.0 * std::log(l);
    }
    CMatrix zi = llt.solve(CMatrix::Identity(d, d));
    st.zinv.push_back(0.5 * (zi + zi.adjoint()));
  }
  return st;
}

}  // namespace

const char* to_string(DiscriminationMethod m) {
  switch (m) {
    case DiscriminationMethod::kSingle: return "single";
    case DiscriminationMethod::kHelstrom: return "helstrom";
    case DiscriminationMethod::kCommuting: return "commuting";
    case DiscriminationMethod::kBarrier: return "barrier";
    case DiscriminationMethod::kTrivial: return "trivial";
  }
  return "unknown";
}

DiscriminationResult helstrom(const HermitianOp& a1, const HermitianOp& a2) {
  if (a1.dim() != a2.dim()) throw InputError("helstrom: dimension mismatch");
  const int d = a1.dim();
  const Eigensystem es = eigh(a1 - a2);
  CMatrix e1 = CMatrix::Zero(d, d);
  CMatrix e2 = CMatrix::Zero(d, d);
  CMatrix positive = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const CVector v = es.vectors.col(k);
    const CMatrix p = v * v.adjoint();
    if (es.values(k) >= 0.0) {
      e1 += p;
      positive += es.values(k) * p;
    } else {
      e2 += p;
    }
  }
  std::vector<HermitianOp> els{HermitianOp::hermitian_part(e1), HermitianOp::hermitian_part(e2)};
  const HermitianOp ops[2] = {a1, a2};
  const double value = objective(ops, els);
  HermitianOp y = HermitianOp::hermitian_part(a2.matrix() + positive);
  const double gap = y.trace() - value;
  return DiscriminationResult{Povm(std::move(els)), value, std::move(y), gap, 0, DiscriminationMethod::kHelstrom};
}

std::optional<DiscriminationResult> discrimination_commuting(std::span<const HermitianOp> ops) {
  if (ops.empty()) throw InputError("discrimination_commuting: no operators");
  const int d = ops.front().dim();
  const double scale = std::max(max_norm(ops), 1e-300);
  for (std::size_t b = 0; b < ops.size(); ++b) {
    for (std::size_t c = b + 1; c < ops.size(); ++c) {
      const CMatrix comm = ops[b].matrix() * ops[c].matrix() - ops[c].matrix() * ops[b].matrix();
      if (comm.cwiseAbs().maxCoeff() > 1e-12 * scale * scale) return std::nullopt;
    }
  }
  // A generic combination of a commuting family has the joint eigenbasis.
  CMatrix combo = CMatrix::Zero(d, d);
  for (std::size_t b = 0; b < ops.size(); ++b) {
    combo += (1.0 + 0.6180339887498949 * static_cast<double>(b) + 0.001 * static_cast<double>(b * b)) * ops[b].matrix();
  }
  const Eigensystem es = eigh(combo);
  const CMatrix& u = es.vectors;
  std::vector<CMatrix> diag;
  diag.reserve(ops.size());
  for (const HermitianOp& a : ops) {
    CMatrix t = u.adjoint() * a.matrix() * u;
    CMatrix off = t;
    off.diagonal().setZero();
    if (off.size() > 0 && off.cwiseAbs().maxCoeff() > 1e-10 * scale) return std::nullopt;
    diag.push_back(std::move(t));
  }
  std::vector<CMatrix> els(ops.size(), CMatrix::Zero(d, d));
  RVector ymax(d);
  for (int i = 0; i < d; ++i) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < ops.size(); ++b) {
      if (diag[b](i, i).real() > diag[best](i, i).real()) best = b;
    }
    ymax(i) = diag[best](i, i).real();
    const CVector v = u.col(i);
    els[best] += v * v.adjoint();
  }
  std::vector<HermitianOp> povm;
  povm.reserve(els.size());
  for (const CMatrix& e : els) povm.push_back(HermitianOp::hermitian_part(e));
  const double value = objective(ops, povm);
  HermitianOp y = HermitianOp::hermitian_part(u * ymax.asDiagonal() * u.adjoint());
  const double gap = y.trace() - value;
  return DiscriminationResult{Povm(std::move(povm)), value, std::move(y), gap, 0, DiscriminationMethod::kCommuting};
}

DiscriminationResult discrimination_barrier(std::span<const HermitianOp> ops, const BarrierConfig& config) {
  if (ops.empty()) throw InputError("discrimination_barrier: no operators");
  const int d = ops.front().dim();
  const std::size_t nb = ops.size();
  const double scale = max_norm(ops);
  if (!(scale > 0.0)) {
    return DiscriminationResult{first_outcome_povm(d, nb), 0.0, HermitianOp::zero(d), 0.0, 0,
                                DiscriminationMethod::kTrivial};
  }

  std::vector<CMatrix> a;
  a.reserve(nb);
  for (const HermitianOp& op : ops) a.push_back(op.matrix() / scale);
  std::vector<HermitianOp> a_ops;
  a_ops.reserve(nb);
  for (const CMatrix& m : a) a_ops.push_back(HermitianOp::hermitian_part(m));

  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix y = 2.0 * id;
  double mu = 1.0 / static_cast<double>(nb);
  const Eigen::Index n2 = static_cast<Eigen::Index>(d) * d;

  double best_primal = -std::numeric_limits<double>::infinity();
  std::vector<HermitianOp> best_povm;
  double best_dual = y.trace().real();
  CMatrix best_y = y;
  int iterations = 0;

  auto consider_primal = [&](std::vector<HermitianOp> povm) {
    const double v = objective(a_ops, povm);
    if (v > best_primal) {
      best_primal = v;
      const CMatrix yc = repaired_dual(a, povm, d);
      const double dual = yc.trace().real();
      if (dual < best_dual) {
        best_dual = dual;
        best_y = yc;
      }
      best_povm = std::move(povm);
    }
  };

  auto barrier_value = [&](const CMatrix& yy, const BarrierState& st) {
    return yy.trace().real() - mu * st.logdet_sum;
  };

  std::optional<BarrierState> state = slacks(y, a);
  while (iterations < config.max_iterations && state) {
    // Centering by damped Newton steps.
    for (int inner = 0; inner < 80 && iterations < config.max_iterations; ++inner) {
      CMatrix grad = id;
      CMatrix k = CMatrix::Zero(n2, n2);
      for (const CMatrix& zi : state->zinv) {
        grad -= mu * zi;
        k += kron(CMatrix(zi.transpose()), zi);
      }
      k *= mu;
      CVector rhs(n2);
      for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) rhs(r + c * d) = -grad(r, c);
      }
      CVector x;
      Eigen::LLT<CMatrix> llt(k);
      if (llt.info() == Eigen::Success) {
        x = llt.solve(rhs);
      } else {
        x = k.ldlt().solve(rhs);
      }
      CMatrix delta(d, d);
      for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) delta(r, c) = x(r + c * d);
      }
      delta = 0.5 * (delta + delta.adjoint()).eval();
      const double decrement = -grad.cwiseProduct(delta.transpose()).sum().real();
      if (!(decrement > 0.0) || decrement / mu < 1e-12) break;

      const double f0 = barrier_value(y, *state);
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        CMatrix yn = y + t * delta;
        auto sn = slacks(yn, a);
        if (sn && barrier_value(yn, *sn) <= f0 - 0.25 * t * decrement) {
          y = std::move(yn);
          state = std::move(sn);
          accepted = true;
          break;
        }
      }
      ++iterations;
      if (!accepted) break;
    }

    // Y is strictly feasible: a valid dual bound.
    if (y.trace().real() < best_dual) {
      best_dual = y.trace().real();
      best_y = y;
    }

    std::vector<CMatrix> raw;
    raw.reserve(nb);
    for (const CMatrix& zi : state->zinv) raw.push_back(mu * zi);
    if (auto povm = renormalize(raw, d)) consider_primal(std::move(*povm));

    // Purification: drop eigencomponents that vanish along the central path.
    std::vector<Eigensystem> eig;
    eig.reserve(nb);
    for (const CMatrix& e : raw) eig.push_back(eigh(e));
    for (double cut : {1e-2, 1e-4, 1e-6}) {
      if (cut < 10.0 * mu) continue;
      std::vector<CMatrix> pure;
      pure.reserve(nb);
      for (const Eigensystem& es : eig) {
        RVector vals = es.values;
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
          if (vals(i) < cut) vals(i) = 0.0;
        }
        pure.push_back(es.vectors * vals.asDiagonal() * es.vectors.adjoint());
      }
      if (auto povm = renormalize(pure, d)) consider_primal(std::move(*povm));
    }

    if (best_dual - best_primal <= config.gap_tolerance) break;
    if (mu < 1e-15) break;
    mu *= 0.1;
    state = slacks(y, a);
  }

  if (best_povm.empty()) {
    std::vector<CMatrix> raw;
    for (std::size_t b = 0; b < nb; ++b) raw.push_back(id / static_cast<double>(nb));
    consider_primal(*renormalize(raw, d));
  }

  std::vector<HermitianOp> povm;
  povm.reserve(nb);
  for (HermitianOp& e : best_povm) povm.push_back(std::move(e));
  const double value = objective(ops, povm);
  HermitianOp dual = HermitianOp::hermitian_part(best_y * scale);
  const double gap = dual.trace() - value;
  return DiscriminationResult{Povm(std::move(povm)), value, std::move(dual), gap, iterations,
                              DiscriminationMethod::kBarrier};
}

DiscriminationResult discrimination_step(std::span<const HermitianOp> ops, const BarrierConfig& config) {
  if (ops.empty()) throw InputError("discrimination_step: needs at least one operator");
  const int d = ops.front().dim();
  for (const HermitianOp& a : ops) {
    if (a.dim() != d) throw InputError("discrimination_step: operators have different dimensions");
  }
  if (!(max_norm(ops) > 0.0)) throw InputError("discrimination_step: every operator is zero");
  if (ops.size() == 1) {
    return DiscriminationResult{Povm::identity(d), ops[0].trace(), ops[0], 0.0, 0, DiscriminationMethod::kSingle};
  }
  if (ops.size() == 2) return helstrom(ops[0], ops[1]);
  if (auto r = discrimination_commuting(ops)) return std::move(*r);
  return discrimination_barrier(ops, config);
}

}  // namespace qlab
