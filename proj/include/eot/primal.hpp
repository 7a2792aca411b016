#pragma once

#include "eot/measures.hpp"
#include "eot/numerics.hpp"
#include "eot/semidual.hpp"
#include "eot/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eot {

/// h_ij = f_i + g_j
template <typename Scalar>
Matrix<Scalar> separable(const Vector<Scalar>& f, const Vector<Scalar>& g) {
  Matrix<Scalar> h(f.size(), g.size());
  h.colwise() = f;
  h.rowwise() += g.transpose();
  return h;
}

/// max |M_ij - M_i0 - M_0j + M_00|; zero iff M = f (+) g.
template <typename Scalar>
Scalar separability_residual(const Matrix<Scalar>& M) {
  Scalar worst = 0;
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      worst = std::max(worst, std::abs(M(i, j) - M(i, 0) - M(0, j) + M(0, 0)));
    }
  }
  return worst;
}

/// How far pi is from the factorized family exp(g_j - f_i - c_ij / eps) a_i b_j.
template <typename Scalar>
Scalar factorization_residual(const Coupling<Scalar>& pi, const Instance<Scalar>& inst) {
  Matrix<Scalar> M = pi.log_masses() + inst.scaled_cost();
  M.colwise() -= inst.mu().log_weights();
  M.rowwise() -= inst.nu().log_weights().transpose();
  return separability_residual(M);
}

template <typename Scalar>
Matrix<Scalar> normalize_rows_to(Matrix<Scalar> l, const Vector<Scalar>& log_a) {
  const Vector<Scalar> rows = row_log_sum_exp(l);
  l.colwise() += log_a - rows;
  return l;
}

// log Phi(p) - log Phi(b) for the Y-marginal p of pi.
template <typename Scalar>
Vector<Scalar> coupling_match_residual(const Coupling<Scalar>& pi, const Instance<Scalar>& inst,
                                       const PhiOperator<Scalar>& op) {
  if (op.kind == PhiKind::identity) return pi.log_y_marginal() - inst.nu().log_weights();
  return log_phi(op, pi.y_marginal(), inst.b()) - log_phi(op, inst.b(), inst.b());
}

/// Rescale columns by Phi(b) / Phi(p), then renormalize the total mass.
template <typename Scalar>
Coupling<Scalar> project_y(const Coupling<Scalar>& pi, const Instance<Scalar>& inst, const PhiOperator<Scalar>& op) {
  Matrix<Scalar> l = pi.log_masses();
  l.rowwise() -= coupling_match_residual(pi, inst, op).transpose();
  l.array() -= log_sum_exp(l);
  return Coupling<Scalar>::from_log(std::move(l));
}

/// Row conditionals interpolated as pi_half^eta pi^(1-eta), rows rescaled to a.
template <typename Scalar>
Coupling<Scalar> project_x(const Coupling<Scalar>& pi_half, const Coupling<Scalar>& pi, const Instance<Scalar>& inst,
                           Scalar eta) {
  if (!(eta >= Scalar(0) && eta <= Scalar(1))) throw std::invalid_argument("interpolation weight must lie in [0, 1]");
  if (!pi_half.log_masses().allFinite() || !pi.log_masses().allFinite()) {
    throw std::domain_error("X-projection needs strictly positive couplings");
  }
  Matrix<Scalar> l = eta * pi_half.log_masses() + (Scalar(1) - eta) * pi.log_masses();
  return Coupling<Scalar>::from_log(normalize_rows_to(std::move(l), inst.mu().log_weights()));
}

/// Rows all equal to log Phi(p) - log Phi(b).
template <typename Scalar>
Matrix<Scalar> v_phi(const Coupling<Scalar>& pi, const Instance<Scalar>& inst, const PhiOperator<Scalar>& op) {
  const Vector<Scalar> row = coupling_match_residual(pi, inst, op);
  Matrix<Scalar> V(pi.rows(), pi.cols());
  V.rowwise() = row.transpose();
  return V;
}

/// Minimizer of <V, pi' - pi> + KL(pi' || pi) / eta over couplings with X-marginal a:
/// pi' proportional to pi exp(-eta V) within each row.
template <typename Scalar>
Coupling<Scalar> root_step(const Coupling<Scalar>& pi, const Instance<Scalar>& inst, const PhiOperator<Scalar>& op,
                           Scalar eta) {
  if (!(eta >= Scalar(0) && eta <= Scalar(1))) throw std::invalid_argument("step size must lie in [0, 1]");
  Matrix<Scalar> l = pi.log_masses() - eta * v_phi(pi, inst, op);
  return Coupling<Scalar>::from_log(normalize_rows_to(std::move(l), inst.mu().log_weights()));
}

/// log(pi / pi_ref)
template <typename Scalar>
Matrix<Scalar> mirror_fwd(const Coupling<Scalar>& pi, const Instance<Scalar>& inst) {
  return pi.log_masses() - log_reference(inst);
}

/// Gibbs reweighting pi_ref e^h with rows rescaled to a.
template <typename Scalar>
Coupling<Scalar> mirror_bwd(const Matrix<Scalar>& h, const Instance<Scalar>& inst) {
  if (h.rows() != inst.n() || h.cols() != inst.m()) throw std::invalid_argument("dual matrix has wrong shape");
  if (!h.allFinite()) throw std::invalid_argument("dual matrix must be finite");
  return Coupling<Scalar>::from_log(normalize_rows_to(Matrix<Scalar>(log_reference(inst) + h), inst.mu().log_weights()));
}

}  // namespace eot
