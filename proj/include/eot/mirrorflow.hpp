#pragma once

#include "eot/diagnostics.hpp"
#include "eot/measures.hpp"
#include "eot/numerics.hpp"
#include "eot/primal.hpp"
#include "eot/semidual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace eot {

template <typename Scalar>
struct FlowState {
  Scalar t = 0;
  Matrix<Scalar> pi_hat;  // averaged coupling
  Vector<Scalar> g;       // dual accumulator on nu's support
  Vector<Scalar> f0;      // frozen X-side of the dual pair
  // r t^(r-1)-weighted integral of the mirror image since the start; t0^r pi_hat(t0) + weighted = t^r pi_hat
  Matrix<Scalar> weighted;
  Scalar t_start = 0;
  Matrix<Scalar> pi_hat_start;
};

template <typename Scalar>
FlowState<Scalar> flow_init(const Vector<Scalar>& phi0, const Instance<Scalar>& inst, Scalar t0) {
  if (!(t0 > Scalar(0))) throw std::invalid_argument("flow must start at a positive time");
  if (phi0.size() != inst.m()) throw std::invalid_argument("initial potential has wrong length");
  FlowState<Scalar> s;
  s.t = t0;
  s.g = phi0;
  s.f0 = Vector<Scalar>::Zero(inst.n());
  s.pi_hat = coupling(phi0, inst).masses();
  s.weighted = Matrix<Scalar>::Zero(inst.n(), inst.m());
  s.t_start = t0;
  s.pi_hat_start = s.pi_hat;
  return s;
}

/// Coupling image of the dual pair f0 (+) g.
template <typename Scalar>
Matrix<Scalar> flow_image(const FlowState<Scalar>& s, const Instance<Scalar>& inst) {
  return mirror_bwd(separable(s.f0, s.g), inst).masses();
}

namespace detail {

template <typename Scalar>
struct FlowDerivative {
  Matrix<Scalar> pi_hat;
  Vector<Scalar> g;
  Matrix<Scalar> weighted;
};

template <typename Scalar>
FlowDerivative<Scalar> flow_rhs(const FlowState<Scalar>& s, const Instance<Scalar>& inst, Scalar r) {
  const Matrix<Scalar> image = flow_image(s, inst);
  FlowDerivative<Scalar> d;
  d.pi_hat = (r / s.t) * (image - s.pi_hat);
  d.g = -(s.t / r) * (Vector<Scalar>(s.pi_hat.colwise().sum().transpose()) - inst.b());
  d.weighted = r * std::pow(s.t, r - Scalar(1)) * image;
  return d;
}

template <typename Scalar>
FlowState<Scalar> advanced(const FlowState<Scalar>& s, const FlowDerivative<Scalar>& d, Scalar h) {
  FlowState<Scalar> out = s;
  out.t = s.t + h;
  out.pi_hat += h * d.pi_hat;
  out.g += h * d.g;
  out.weighted += h * d.weighted;
  return out;
}

}  // namespace detail

/// One classical Runge-Kutta step of
///   pi_hat' = (r/t)(image(f0 (+) g) - pi_hat),  g' = -(t/r)(pi_hat_Y - b).
template <typename Scalar>
FlowState<Scalar> flow_step(const FlowState<Scalar>& s, const Instance<Scalar>& inst, Scalar r, Scalar dt) {
  if (!(r >= Scalar(2))) throw std::invalid_argument("flow needs r >= 2");
  if (!(dt > Scalar(0))) throw std::invalid_argument("flow step must be positive");
  const auto k1 = detail::flow_rhs(s, inst, r);
  const auto k2 = detail::flow_rhs(detail::advanced(s, k1, dt / Scalar(2)), inst, r);
  const auto k3 = detail::flow_rhs(detail::advanced(s, k2, dt / Scalar(2)), inst, r);
  const auto k4 = detail::flow_rhs(detail::advanced(s, k3, dt), inst, r);
  FlowState<Scalar> out = s;
  out.t = s.t + dt;
  out.pi_hat += (dt / Scalar(6)) * (k1.pi_hat + Scalar(2) * k2.pi_hat + Scalar(2) * k3.pi_hat + k4.pi_hat);
  out.g += (dt / Scalar(6)) * (k1.g + Scalar(2) * k2.g + Scalar(2) * k3.g + k4.g);
  out.weighted += (dt / Scalar(6)) * (k1.weighted + Scalar(2) * k2.weighted + Scalar(2) * k3.weighted + k4.weighted);
  return out;
}

/// 1/2 |pi_hat_Y - b|^2
template <typename Scalar>
Scalar flow_mmd(const FlowState<Scalar>& s, const Instance<Scalar>& inst) {
  const Vector<Scalar> d = Vector<Scalar>(s.pi_hat.colwise().sum().transpose()) - inst.b();
  return Scalar(0.5) * dot_compensated(d, d);
}

/// (t^2 / r) mmd + r KL(pi* || pi(g)); the second term is the Bregman divergence of the
/// conjugate mirror map between the current and optimal dual pairs.
template <typename Scalar>
Scalar lyapunov(const FlowState<Scalar>& s, const Instance<Scalar>& inst, Scalar r, const Vector<Scalar>& phi_star) {
  const Scalar kl_term = kl(coupling(phi_star, inst), Coupling<Scalar>::from_log(log_coupling(s.g, inst)));
  return s.t * s.t / r * flow_mmd(s, inst) + r * kl_term;
}

/// Relative max-norm gap between pi_hat and the weighted running average it should equal.
template <typename Scalar>
Scalar weighted_average_error(const FlowState<Scalar>& s, Scalar r) {
  const Matrix<Scalar> avg = (std::pow(s.t_start, r) * s.pi_hat_start + s.weighted) / std::pow(s.t, r);
  return (avg - s.pi_hat).cwiseAbs().maxCoeff() / s.pi_hat.cwiseAbs().maxCoeff();
}

template <typename Scalar>
struct FlowRecord {
  Scalar t;
  Scalar lk;
  Scalar v;
};

template <typename Scalar>
struct FlowRun {
  std::vector<FlowRecord<Scalar>> trace;
  Scalar kl_start = 0;          // KL(pi* || pi(phi0))
  Scalar kl_start_reverse = 0;  // KL(pi(phi0) || pi*)
  Scalar worst_rate_slack = std::numeric_limits<Scalar>::infinity();
  Scalar worst_rate_slack_reverse = std::numeric_limits<Scalar>::infinity();
  Scalar worst_v_increase = -std::numeric_limits<Scalar>::infinity();
  Scalar worst_average_error = 0;
  Scalar worst_mass_drift = 0;
  Scalar worst_image_marginal_error = 0;  // X-marginal of the mirror image against a
  bool blew_up = false;
  Scalar last_good_t = 0;
};

/// Integrates from t0 to t_end, checking every step:
///   mmd(t) <= (r/t)^2 KL(pi* || pi^0) + (t0/t)^2 mmd(t0), V non-increasing.
/// The second term accounts for starting at t0 > 0.
template <typename Scalar>
FlowRun<Scalar> flow_run(const Instance<Scalar>& inst, const Vector<Scalar>& phi0, const Vector<Scalar>& phi_star,
                         Scalar r, Scalar t0, Scalar t_end, Scalar dt, Index record_every = 1) {
  if (!(t0 < t_end)) throw std::invalid_argument("flow needs t0 < t_end");
  if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  FlowState<Scalar> s = flow_init(phi0, inst, t0);
  FlowRun<Scalar> out;
  const Coupling<Scalar> star = coupling(phi_star, inst);
  const Coupling<Scalar> start = coupling(phi0, inst);
  out.kl_start = kl(star, start);
  out.kl_start_reverse = kl(start, star);
  const Scalar lk0 = flow_mmd(s, inst);
  const Index steps = static_cast<Index>(std::llround(static_cast<double>((t_end - t0) / dt)));

  Scalar v_prev = lyapunov(s, inst, r, phi_star);
  out.trace.push_back({s.t, lk0, v_prev});
  out.last_good_t = s.t;
  for (Index k = 1; k <= steps; ++k) {
    FlowState<Scalar> next = flow_step(s, inst, r, dt);
    next.t = t0 + Scalar(k) * dt;
    if (!next.pi_hat.allFinite() || !next.g.allFinite()) {
      out.blew_up = true;
      break;
    }
    s = std::move(next);
    out.last_good_t = s.t;
    const Scalar lk = flow_mmd(s, inst);
    const Scalar v = lyapunov(s, inst, r, phi_star);
    const Scalar start_term = (t0 / s.t) * (t0 / s.t) * lk0;
    const Scalar rate = (r / s.t) * (r / s.t);
    out.worst_rate_slack = std::min(out.worst_rate_slack, rate * out.kl_start + start_term - lk);
    out.worst_rate_slack_reverse = std::min(out.worst_rate_slack_reverse, rate * out.kl_start_reverse + start_term - lk);
    out.worst_v_increase = std::max(out.worst_v_increase, v - v_prev);
    out.worst_average_error = std::max(out.worst_average_error, weighted_average_error(s, r));
    out.worst_mass_drift = std::max(out.worst_mass_drift, std::abs(s.pi_hat.sum() - Scalar(1)));
    const Vector<Scalar> image_x = flow_image(s, inst).rowwise().sum();
    out.worst_image_marginal_error = std::max(out.worst_image_marginal_error, (image_x - inst.a()).cwiseAbs().maxCoeff());
    v_prev = v;
    if (k % record_every == 0 || k == steps) out.trace.push_back({s.t, lk, v});
  }
  return out;
}

}  // namespace eot
