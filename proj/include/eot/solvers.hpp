#pragma once

#include "eot/kernels.hpp"
#include "eot/measures.hpp"
#include "eot/numerics.hpp"
#include "eot/semidual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eot {

enum class PhiKind { identity, exp, exp_kernel, chi_square };

template <typename Scalar>
struct PhiOperator {
  PhiKind kind = PhiKind::identity;
  std::shared_ptr<const Gram<Scalar>> gram;  // exp_kernel only

  static PhiOperator identity() { return {PhiKind::identity, nullptr}; }
  static PhiOperator exp() { return {PhiKind::exp, nullptr}; }
  static PhiOperator chi_square() { return {PhiKind::chi_square, nullptr}; }
  static PhiOperator exp_kernel(Gram<Scalar> g) {
    return {PhiKind::exp_kernel, std::make_shared<const Gram<Scalar>>(std::move(g))};
  }
};

inline const char* phi_kind_name(PhiKind kind) {
  switch (kind) {
    case PhiKind::identity: return "identity";
    case PhiKind::exp: return "exp";
    case PhiKind::exp_kernel: return "exp_kernel";
    case PhiKind::chi_square: return "chi_square";
  }
  return "?";
}

/// log Phi(xi); b is nu's weight vector (used by chi_square).
template <typename Scalar>
Vector<Scalar> log_phi(const PhiOperator<Scalar>& op, const Vector<Scalar>& xi, const Vector<Scalar>& b) {
  switch (op.kind) {
    case PhiKind::identity:
      if ((xi.array() <= Scalar(0)).any()) throw std::domain_error("identity match needs positive masses");
      return xi.array().log().matrix();
    case PhiKind::exp:
      return xi;
    case PhiKind::exp_kernel:
      if (!op.gram) throw std::invalid_argument("kernel match needs a Gram");
      return mean_embedding(*op.gram, xi);
    case PhiKind::chi_square:
      return (xi.array() / b.array() - Scalar(1)).matrix();
  }
  throw std::logic_error("unknown match operator");
}

/// log Phi(p) - log Phi(b), using log p directly for the identity case.
template <typename Scalar>
Vector<Scalar> match_residual(const PhiOperator<Scalar>& op, const SemidualState<Scalar>& s,
                              const Instance<Scalar>& inst) {
  if (op.kind == PhiKind::identity) return s.log_p - inst.nu().log_weights();
  return log_phi(op, s.p, inst.b()) - log_phi(op, inst.b(), inst.b());
}

inline void require_match_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("match step size must lie in (0, 1]");
}

/// phi - eta (log Phi(p) - log Phi(b))
template <typename Scalar>
Vector<Scalar> phi_match_step(const Vector<Scalar>& phi, const Instance<Scalar>& inst,
                              const PhiOperator<Scalar>& op, Scalar eta) {
  require_match_eta(static_cast<double>(eta));
  return phi - eta * match_residual(op, evaluate(phi, inst), inst);
}

template <typename Scalar>
Scalar auto_eta_ksga(Scalar c_k) {
  return std::min(Scalar(1) / (Scalar(2) * c_k), Scalar(1));
}

template <typename Scalar>
Scalar auto_eta_ksga(const Gram<Scalar>& g) {
  return auto_eta_ksga(g.c_k);
}

template <typename Scalar>
Index default_anchor(const Instance<Scalar>& inst) {
  Index k = 0;
  inst.b().maxCoeff(&k);
  return k;
}

template <typename Scalar>
Vector<Scalar> sign_sga_from_residual(const Vector<Scalar>& phi, const Vector<Scalar>& delta, Scalar eta,
                                      Index anchor) {
  const Scalar l1 = delta.cwiseAbs().sum();
  Vector<Scalar> half(phi.size());
  for (Index j = 0; j < phi.size(); ++j) {
    const Scalar s = delta(j) > Scalar(0) ? Scalar(1) : (delta(j) < Scalar(0) ? Scalar(-1) : Scalar(0));
    half(j) = phi(j) + eta * l1 * s;
  }
  half.array() -= half(anchor) - phi(anchor);
  return half;
}

/// Steepest ascent in l-infinity geometry, re-anchored so phi[anchor] is unchanged.
template <typename Scalar>
Vector<Scalar> sign_sga_step(const Vector<Scalar>& phi, const Instance<Scalar>& inst, Scalar eta, Index anchor) {
  if (!(eta > Scalar(0) && eta < Scalar(2))) throw std::invalid_argument("sign step size must lie in (0, 2)");
  if (anchor < 0 || anchor >= inst.m()) throw std::invalid_argument("anchor index out of range");
  return sign_sga_from_residual(phi, first_variation(phi, inst), eta, anchor);
}

/// log lambda(B) = 2B + log sum_ij a_i b_j exp(c_ij / eps); requires c >= 0.
template <typename Scalar>
Scalar log_lambda_bound(const Instance<Scalar>& inst, Scalar B) {
  if ((inst.cost().array() < Scalar(0)).any()) {
    throw std::invalid_argument("smoothness bound requires a nonnegative cost");
  }
  if (!(B >= Scalar(0))) throw std::invalid_argument("bound radius must be nonnegative");
  Matrix<Scalar> e = inst.scaled_cost();
  e.colwise() += inst.mu().log_weights();
  e.rowwise() += inst.nu().log_weights().transpose();
  return Scalar(2) * B + log_sum_exp(e);
}

/// 3/2 max |c|, a radius known to contain an optimal potential.
template <typename Scalar>
Scalar default_bound(const Instance<Scalar>& inst) {
  return Scalar(1.5) * inst.cost().cwiseAbs().maxCoeff();
}

template <typename Scalar>
Vector<Scalar> proj_sga_from_residual(const Vector<Scalar>& phi, const Vector<Scalar>& delta,
                                      const Instance<Scalar>& inst, Scalar B, Scalar eta) {
  const Vector<Scalar> candidate = phi + eta * (delta.array() / inst.b().array()).matrix();
  return candidate.cwiseMax(-B).cwiseMin(B);
}

/// Gradient step in L2(nu) geometry followed by projection onto the sup-norm ball of radius B.
template <typename Scalar>
Vector<Scalar> proj_sga_step(const Vector<Scalar>& phi, const Instance<Scalar>& inst, Scalar B, Scalar eta) {
  if (!(eta > Scalar(0))) throw std::invalid_argument("step size must be positive");
  return proj_sga_from_residual(phi, first_variation(phi, inst), inst, B, eta);
}

template <typename Scalar>
Scalar t_next(Scalar t) {
  if (!(t >= Scalar(1))) throw std::invalid_argument("momentum sequence needs t >= 1");
  return (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
}

enum class Method { phi_match, sign_sga, proj_sga, proj_sga_pp };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::phi_match: return "phi_match";
    case Method::sign_sga: return "sign_sga";
    case Method::proj_sga: return "proj_sga";
    case Method::proj_sga_pp: return "proj_sga_pp";
  }
  return "?";
}

template <typename Scalar>
struct SolverConfig {
  Method method = Method::phi_match;
  PhiOperator<Scalar> op = PhiOperator<Scalar>::identity();
  std::optional<Scalar> eta;  // empty: method default
  Index max_iter = 1000;
  Scalar tol_l1 = Scalar(1e-10);
  std::optional<Index> anchor;  // sign_sga; default argmax b
  std::optional<Scalar> bound;  // proj methods; default default_bound
  Index record_every = 1;
  std::shared_ptr<const Gram<Scalar>> diagnostic_gram;  // falls back to the match operator's Gram
};

template <typename Scalar>
struct TraceRecord {
  Index iter = 0;
  Scalar value = 0;
  Scalar l1_residual = 0;
  std::optional<Scalar> mmd_sq;
  Scalar kl_y = 0;
  double elapsed_s = 0;
};

template <typename Scalar>
using Trace = std::vector<TraceRecord<Scalar>>;

template <typename Scalar>
struct RunResult {
  Vector<Scalar> phi;
  Trace<Scalar> trace;
  Scalar eta = 0;
  std::optional<Scalar> bound;
  std::optional<Index> anchor;
  Index iterations = 0;
  bool converged = false;
};

class AscentViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
Scalar resolve_eta(const Instance<Scalar>& inst, const SolverConfig<Scalar>& cfg, std::optional<Scalar> bound) {
  if (cfg.eta) {
    const Scalar eta = *cfg.eta;
    if (cfg.method == Method::phi_match) require_match_eta(static_cast<double>(eta));
    if (cfg.method == Method::sign_sga && !(eta > Scalar(0) && eta < Scalar(2))) {
      throw std::invalid_argument("sign step size must lie in (0, 2)");
    }
    if (!(eta > Scalar(0))) throw std::invalid_argument("step size must be positive");
    return eta;
  }
  switch (cfg.method) {
    case Method::phi_match:
      switch (cfg.op.kind) {
        case PhiKind::identity: return Scalar(1);
        case PhiKind::exp: return auto_eta_ksga(Scalar(1));
        case PhiKind::exp_kernel: return auto_eta_ksga(*cfg.op.gram);
        case PhiKind::chi_square: return Scalar(1);
      }
      break;
    case Method::sign_sga: return Scalar(1);
    case Method::proj_sga: return std::exp(-log_lambda_bound(inst, *bound));
    case Method::proj_sga_pp: return std::exp(-log_lambda_bound(inst, Scalar(3) * *bound));
  }
  throw std::logic_error("unknown method");
}

template <typename Scalar>
bool has_ascent_guarantee(const SolverConfig<Scalar>& cfg) {
  switch (cfg.method) {
    case Method::phi_match: return cfg.op.kind == PhiKind::identity || cfg.op.kind == PhiKind::exp;
    case Method::sign_sga:
    case Method::proj_sga: return true;
    case Method::proj_sga_pp: return false;
  }
  return false;
}

template <typename Scalar>
RunResult<Scalar> run(const Instance<Scalar>& inst, const SolverConfig<Scalar>& cfg, const Vector<Scalar>& phi0) {
  if (phi0.size() != inst.m()) throw std::invalid_argument("initial potential has wrong length");
  if (!phi0.allFinite()) throw std::invalid_argument("initial potential must be finite");
  if (cfg.max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
  if (cfg.record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  if (!(cfg.tol_l1 >= Scalar(0))) throw std::invalid_argument("tolerance must be nonnegative");
  if (cfg.op.kind == PhiKind::exp_kernel && (!cfg.op.gram || cfg.op.gram->K.rows() != inst.m())) {
    throw std::invalid_argument("kernel match needs a Gram over nu's support");
  }

  RunResult<Scalar> out;
  const bool projected = cfg.method == Method::proj_sga || cfg.method == Method::proj_sga_pp;
  if (projected) {
    out.bound = cfg.bound ? *cfg.bound : default_bound(inst);
    if (phi0.cwiseAbs().maxCoeff() > *out.bound) {
      throw std::invalid_argument("initial potential lies outside the sup-norm ball");
    }
  }
  if (cfg.method == Method::sign_sga) {
    out.anchor = cfg.anchor ? *cfg.anchor : default_anchor(inst);
    if (*out.anchor < 0 || *out.anchor >= inst.m()) throw std::invalid_argument("anchor index out of range");
  }
  out.eta = resolve_eta(inst, cfg, out.bound);

  std::shared_ptr<const Gram<Scalar>> diag = cfg.diagnostic_gram ? cfg.diagnostic_gram : cfg.op.gram;
  if (diag && diag->K.rows() != inst.m()) throw std::invalid_argument("diagnostic Gram has wrong size");
  const bool guard = has_ascent_guarantee(cfg);
  const auto start = std::chrono::steady_clock::now();

  Vector<Scalar> phi = phi0;       // current reported iterate (phi-bar for the accelerated method)
  Vector<Scalar> lookahead = phi0;  // extrapolated point of the accelerated method
  Scalar t = Scalar(1);
  SemidualState<Scalar> state = evaluate(phi, inst);

  auto make_record = [&](Index n) {
    TraceRecord<Scalar> r;
    r.iter = n;
    r.value = state.value;
    r.l1_residual = (inst.b() - state.p).cwiseAbs().sum();
    if (diag) r.mmd_sq = mmd_sq(*diag, state.p, inst.b());
    CompensatedSum<Scalar> kl;
    for (Index j = 0; j < inst.m(); ++j) kl.add(state.p(j) * (state.log_p(j) - inst.nu().log_weights()(j)));
    r.kl_y = kl.value();
    r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };

  Index n = 0;
  for (;; ++n) {
    TraceRecord<Scalar> rec = make_record(n);
    out.converged = rec.l1_residual <= cfg.tol_l1;
    const bool last = out.converged || n >= cfg.max_iter;
    if (n % cfg.record_every == 0 || last) out.trace.push_back(rec);
    if (last) break;

    const Vector<Scalar> delta = inst.b() - state.p;
    switch (cfg.method) {
      case Method::phi_match:
        phi -= out.eta * match_residual(cfg.op, state, inst);
        break;
      case Method::sign_sga:
        phi = sign_sga_from_residual(phi, delta, out.eta, *out.anchor);
        break;
      case Method::proj_sga:
        phi = proj_sga_from_residual(phi, delta, inst, *out.bound, out.eta);
        break;
      case Method::proj_sga_pp: {
        const Vector<Scalar> next = proj_sga_step(lookahead, inst, *out.bound, out.eta);
        const Scalar t_new = t_next(t);
        lookahead = next + ((t - Scalar(1)) / t_new) * (next - phi);
        phi = next;
        t = t_new;
        break;
      }
    }
    const Scalar before = state.value;
    state = evaluate(phi, inst);
    if (guard && state.value < before - Scalar(1e-6)) {
      throw AscentViolation(std::string(method_name(cfg.method)) + " decreased the objective at iteration " +
                            std::to_string(n + 1) + " (" + std::to_string(static_cast<double>(before)) +
                            " -> " + std::to_string(static_cast<double>(state.value)) + ")");
    }
  }
  out.iterations = n;
  out.phi = phi;
  return out;
}

template <typename Scalar>
struct OracleResult {
  Vector<Scalar> phi;  // phi[0] == 0
  Scalar residual;
  Index iterations;
  Scalar duality_gap;  // |J(phi) - primal objective of coupling(phi)|
};

/// Alternating plus/minus transforms until sum |b - p| <= tol.
template <typename Scalar>
OracleResult<Scalar> oracle_solve(const Instance<Scalar>& inst, Scalar tol = Scalar(1e-12),
                                  Index max_iter = 1000000) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("oracle tolerance must be positive");
  Vector<Scalar> phi = Vector<Scalar>::Zero(inst.m());
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  Index it = 0;
  for (;; ++it) {
    const Vector<Scalar> plus = plus_transform(phi, inst);
    const Vector<Scalar> p = log_marginal_y_from_plus(phi, plus, inst).array().exp().matrix();
    residual = (inst.b() - p).cwiseAbs().sum();
    if (residual <= tol) break;
    if (it >= max_iter) {
      throw NotConverged("oracle did not converge in " + std::to_string(max_iter) +
                               " iterations; residual " + std::to_string(static_cast<double>(residual)));
    }
    phi = minus_transform(plus, inst);
  }
  phi.array() -= phi(0);
  OracleResult<Scalar> out{phi, residual, it, Scalar(0)};
  out.duality_gap = std::abs(semidual_value(phi, inst) - entropic_primal_objective(coupling(phi, inst), inst));
  return out;
}

}  // namespace eot
