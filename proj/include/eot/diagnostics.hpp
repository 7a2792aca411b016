#pragma once

#include "eot/kernels.hpp"
#include "eot/measures.hpp"
#include "eot/numerics.hpp"
#include "eot/semidual.hpp"
#include "eot/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eot {

inline constexpr double kBoundTolerance = 1e-10;

/// sum p log(p / q) with 0 log 0 = 0; +inf when p charges a zero of q.
template <typename Scalar>
Scalar kl(const Vector<Scalar>& p, const Vector<Scalar>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL needs vectors of equal length");
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < p.size(); ++j) {
    if (p(j) == Scalar(0)) continue;
    if (q(j) == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    acc.add(p(j) * std::log(p(j) / q(j)));
  }
  return std::max(acc.value(), Scalar(0));
}

template <typename Scalar>
Scalar kl(const Coupling<Scalar>& p, const Coupling<Scalar>& q) {
  const Matrix<Scalar>& lp = p.log_masses();
  const Matrix<Scalar>& lq = q.log_masses();
  if (lp.rows() != lq.rows() || lp.cols() != lq.cols()) throw std::invalid_argument("KL needs couplings of equal shape");
  constexpr Scalar ninf = -std::numeric_limits<Scalar>::infinity();
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < lp.cols(); ++j) {
    for (Index i = 0; i < lp.rows(); ++i) {
      if (lp(i, j) == ninf) continue;
      if (lq(i, j) == ninf) return std::numeric_limits<Scalar>::infinity();
      acc.add(std::exp(lp(i, j)) * (lp(i, j) - lq(i, j)));
    }
  }
  return std::max(acc.value(), Scalar(0));
}

enum class BoundStatus { pass, fail, inconclusive };

inline const char* status_name(BoundStatus s) {
  switch (s) {
    case BoundStatus::pass: return "pass";
    case BoundStatus::fail: return "fail";
    case BoundStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

template <typename Scalar>
struct BoundReport {
  std::string name;
  std::vector<Index> iterations;
  std::vector<Scalar> bound;
  std::vector<Scalar> observed;
  Scalar worst_slack = std::numeric_limits<Scalar>::infinity();  // min(bound - observed)
  BoundStatus status = BoundStatus::pass;
  std::string note;

  void add(Index iter, Scalar bound_value, Scalar observed_value) {
    iterations.push_back(iter);
    bound.push_back(bound_value);
    observed.push_back(observed_value);
    worst_slack = std::min(worst_slack, bound_value - observed_value);
    if (!(observed_value <= bound_value + Scalar(kBoundTolerance))) status = BoundStatus::fail;
  }

  bool passed() const { return status == BoundStatus::pass; }
};

template <typename Scalar>
BoundReport<Scalar> inconclusive_report(std::string name, std::string note) {
  BoundReport<Scalar> r;
  r.name = std::move(name);
  r.status = BoundStatus::inconclusive;
  r.note = std::move(note);
  return r;
}

/// mmd^2(p^N, b) <= max(2 c_k, 1) / N * KL(pi* || pi^0)
template <typename Scalar>
BoundReport<Scalar> check_kernel_rate(const Trace<Scalar>& trace, const Instance<Scalar>& inst, const Gram<Scalar>& g,
                                const Vector<Scalar>& phi0, const Vector<Scalar>& phi_star) {
  BoundReport<Scalar> r;
  r.name = "kernel_rate";
  const Scalar kl0 = kl(coupling(phi_star, inst), coupling(phi0, inst));
  const Scalar factor = std::max(Scalar(2) * g.c_k, Scalar(1));
  for (const auto& rec : trace) {
    if (rec.iter < 1) continue;
    if (!rec.mmd_sq) throw std::invalid_argument("trace has no mmd_sq column");
    r.add(rec.iter, factor / Scalar(rec.iter) * kl0, *rec.mmd_sq);
  }
  return r;
}

template <typename Scalar>
BoundReport<Scalar> check_kernel_rate(const Trace<Scalar>& trace, const Instance<Scalar>& inst, const Gram<Scalar>& g,
                                const Vector<Scalar>& phi0) {
  return check_kernel_rate(trace, inst, g, phi0, oracle_solve(inst).phi);
}

/// Shift of phi_star closest to phi0 in L2(nu) that fits in [-B, B]; empty when no shift fits.
template <typename Scalar>
std::optional<Vector<Scalar>> bounded_maximizer(const Vector<Scalar>& phi_star, const Vector<Scalar>& phi0,
                                                const Instance<Scalar>& inst, Scalar B) {
  const Scalar lo = -B - phi_star.minCoeff();
  const Scalar hi = B - phi_star.maxCoeff();
  if (lo > hi) return std::nullopt;
  const Scalar best = dot_compensated(Vector<Scalar>(inst.b()), Vector<Scalar>(phi0 - phi_star));
  const Scalar shift = std::clamp(best, lo, hi);
  return Vector<Scalar>((phi_star.array() + shift).matrix());
}

template <typename Scalar>
Scalar l2_nu_sq(const Vector<Scalar>& v, const Instance<Scalar>& inst) {
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < v.size(); ++j) acc.add(inst.b()(j) * v(j) * v(j));
  return acc.value();
}

namespace detail {

template <typename Scalar, typename BoundFn>
BoundReport<Scalar> check_gap(const char* name, const Trace<Scalar>& trace, const Instance<Scalar>& inst, Scalar B,
                              const Vector<Scalar>& phi0, const Vector<Scalar>& phi_star, BoundFn bound_at) {
  const auto tilde = bounded_maximizer(phi_star, phi0, inst, B);
  if (!tilde) {
    return inconclusive_report<Scalar>(name, "radius smaller than half the oscillation of the optimal potential");
  }
  const Scalar dist_sq = l2_nu_sq(Vector<Scalar>(phi0 - *tilde), inst);
  const Scalar best = semidual_value(*tilde, inst);
  BoundReport<Scalar> r;
  r.name = name;
  for (const auto& rec : trace) {
    if (rec.iter < 1) continue;
    r.add(rec.iter, bound_at(rec.iter, dist_sq), best - rec.value);
  }
  return r;
}

}  // namespace detail

/// J(phi~*) - J(phi^N) <= lambda(B) |phi^0 - phi~*|^2_{L2(nu)} / (2N)
template <typename Scalar>
BoundReport<Scalar> check_projected_gap(const Trace<Scalar>& trace, const Instance<Scalar>& inst, Scalar B,
                                const Vector<Scalar>& phi0, const Vector<Scalar>& phi_star) {
  const Scalar log_lambda = log_lambda_bound(inst, B);
  return detail::check_gap("projected_gap", trace, inst, B, phi0, phi_star, [&](Index n, Scalar dist_sq) {
    return std::exp(log_lambda) * dist_sq / (Scalar(2) * Scalar(n));
  });
}

template <typename Scalar>
BoundReport<Scalar> check_projected_gap(const Trace<Scalar>& trace, const Instance<Scalar>& inst, Scalar B,
                                const Vector<Scalar>& phi0) {
  return check_projected_gap(trace, inst, B, phi0, oracle_solve(inst).phi);
}

/// J(phi~*) - J(phibar^N) <= 2 lambda(3B) |phibar^0 - phi~*|^2_{L2(nu)} / (N+1)^2
template <typename Scalar>
BoundReport<Scalar> check_accelerated_gap(const Trace<Scalar>& trace, const Instance<Scalar>& inst, Scalar B,
                                const Vector<Scalar>& phibar0, const Vector<Scalar>& phi_star) {
  const Scalar log_lambda = log_lambda_bound(inst, Scalar(3) * B);
  return detail::check_gap("accelerated_gap", trace, inst, B, phibar0, phi_star, [&](Index n, Scalar dist_sq) {
    const Scalar np1 = Scalar(n + 1);
    return Scalar(2) * std::exp(log_lambda) * dist_sq / (np1 * np1);
  });
}

template <typename Scalar>
BoundReport<Scalar> check_accelerated_gap(const Trace<Scalar>& trace, const Instance<Scalar>& inst, Scalar B,
                                const Vector<Scalar>& phibar0) {
  return check_accelerated_gap(trace, inst, B, phibar0, oracle_solve(inst).phi);
}

/// Per-step ascent of sign-SGA: (eta - eta^2/2) |dJ(phi^n)|_1^2 <= J(phi^{n+1}) - J(phi^n).
/// Only consecutive records count, so the trace should be recorded every iteration.
template <typename Scalar>
BoundReport<Scalar> check_sign_ascent(const Trace<Scalar>& trace, Scalar eta) {
  BoundReport<Scalar> r;
  r.name = "sign_ascent";
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].iter != trace[k - 1].iter + 1) continue;
    const Scalar l1 = trace[k - 1].l1_residual;
    r.add(trace[k].iter, trace[k].value - trace[k - 1].value, (eta - eta * eta / Scalar(2)) * l1 * l1);
  }
  return r;
}

enum class TraceColumn { value, l1_residual, mmd_sq, kl_y };

template <typename Scalar>
Scalar column_value(const TraceRecord<Scalar>& rec, TraceColumn column) {
  switch (column) {
    case TraceColumn::value: return rec.value;
    case TraceColumn::l1_residual: return rec.l1_residual;
    case TraceColumn::mmd_sq:
      if (!rec.mmd_sq) throw std::invalid_argument("trace has no mmd_sq column");
      return *rec.mmd_sq;
    case TraceColumn::kl_y: return rec.kl_y;
  }
  throw std::logic_error("unknown column");
}

/// Successive recorded values never rise by more than slack (decreasing = true) or fall (false).
template <typename Scalar>
BoundReport<Scalar> check_monotone(const Trace<Scalar>& trace, TraceColumn column, bool decreasing, Scalar slack,
                                   std::string name) {
  BoundReport<Scalar> r;
  r.name = std::move(name);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const Scalar prev = column_value(trace[k - 1], column);
    const Scalar cur = column_value(trace[k], column);
    // shift by slack so the report's own tolerance does not loosen the check
    if (decreasing) {
      r.add(trace[k].iter, prev + slack - Scalar(kBoundTolerance), cur);
    } else {
      r.add(trace[k].iter, cur + slack - Scalar(kBoundTolerance), prev);
    }
  }
  return r;
}

/// Least-squares slope of log(value) against log(iter) over lo <= iter <= hi.
template <typename Scalar>
Scalar rate_fit(const std::vector<Index>& iters, const std::vector<Scalar>& values, Index lo, Index hi) {
  if (iters.size() != values.size()) throw std::invalid_argument("rate fit needs paired samples");
  std::vector<Scalar> xs, ys;
  for (std::size_t k = 0; k < iters.size(); ++k) {
    if (iters[k] < lo || iters[k] > hi) continue;
    if (!(values[k] > Scalar(0)) || iters[k] < 1) {
      throw std::domain_error("rate fit needs positive values at positive iterations");
    }
    xs.push_back(std::log(Scalar(iters[k])));
    ys.push_back(std::log(values[k]));
  }
  if (xs.size() < 2) throw std::invalid_argument("rate fit needs at least two points in the window");
  const Scalar nx = Scalar(xs.size());
  Scalar mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= nx;
  my /= nx;
  Scalar sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxy / sxx;
}

template <typename Scalar>
Scalar rate_fit(const Trace<Scalar>& trace, TraceColumn column, Index lo, Index hi) {
  std::vector<Index> iters;
  std::vector<Scalar> values;
  for (const auto& rec : trace) {
    iters.push_back(rec.iter);
    values.push_back(column_value(rec, column));
  }
  return rate_fit(iters, values, lo, hi);
}

}  // namespace eot
