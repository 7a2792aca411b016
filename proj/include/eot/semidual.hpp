#pragma once

#include "eot/measures.hpp"
#include "eot/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eot {

// Joint masses over mu x nu, stored as logs.
template <typename Scalar>
class Coupling {
 public:
  static Coupling from_log(Matrix<Scalar> log_masses) {
    Coupling out;
    out.log_ = std::move(log_masses);
    out.validate();
    return out;
  }

  static Coupling from_masses(const Matrix<Scalar>& masses) {
    if ((masses.array() < Scalar(0)).any()) throw std::invalid_argument("coupling masses must be nonnegative");
    Matrix<Scalar> logs(masses.rows(), masses.cols());
    for (Index j = 0; j < masses.cols(); ++j) {
      for (Index i = 0; i < masses.rows(); ++i) {
        logs(i, j) = masses(i, j) > Scalar(0) ? std::log(masses(i, j))
                                               : -std::numeric_limits<Scalar>::infinity();
      }
    }
    return from_log(std::move(logs));
  }

  Index rows() const { return log_.rows(); }
  Index cols() const { return log_.cols(); }
  const Matrix<Scalar>& log_masses() const { return log_; }
  Matrix<Scalar> masses() const { return log_.array().exp().matrix(); }
  Vector<Scalar> log_x_marginal() const { return row_log_sum_exp(log_); }
  Vector<Scalar> log_y_marginal() const { return col_log_sum_exp(log_); }
  Vector<Scalar> x_marginal() const { return log_x_marginal().array().exp().matrix(); }
  Vector<Scalar> y_marginal() const { return log_y_marginal().array().exp().matrix(); }
  Scalar total_mass() const { return std::exp(log_sum_exp(log_)); }

 private:
  void validate() const {
    if (log_.size() == 0) throw std::invalid_argument("empty coupling");
    for (Index j = 0; j < log_.cols(); ++j) {
      for (Index i = 0; i < log_.rows(); ++i) {
        const Scalar v = log_(i, j);
        if (std::isnan(v) || v == std::numeric_limits<Scalar>::infinity()) {
          throw std::invalid_argument("coupling has invalid mass at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
        }
      }
    }
    const Scalar total = total_mass();
    if (std::abs(total - Scalar(1)) > Scalar(1e-12)) {
      throw std::invalid_argument("coupling total mass " + std::to_string(static_cast<double>(total)) +
                                  " differs from 1");
    }
  }

  Matrix<Scalar> log_;
};

/// (phi^+)_i = log sum_j b_j exp(phi_j - c_ij / eps)
template <typename Scalar>
Vector<Scalar> plus_transform(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  const Vector<Scalar> w = inst.nu().log_weights() + phi;
  const Matrix<Scalar>& sc = inst.scaled_cost();
  Vector<Scalar> out(inst.n());
  for (Index i = 0; i < inst.n(); ++i) out(i) = log_sum_exp(w.transpose() - sc.row(i));
  return out;
}

/// (psi^-)_j = -log sum_i a_i exp(-psi_i - c_ij / eps); inverts plus_transform at the optimum.
template <typename Scalar>
Vector<Scalar> minus_transform(const Vector<Scalar>& psi, const Instance<Scalar>& inst) {
  const Vector<Scalar> w = inst.mu().log_weights() - psi;
  const Matrix<Scalar>& sc = inst.scaled_cost();
  Vector<Scalar> out(inst.m());
  for (Index j = 0; j < inst.m(); ++j) out(j) = -log_sum_exp(w - sc.col(j));
  return out;
}

template <typename Scalar>
Scalar semidual_from_plus(const Vector<Scalar>& phi, const Vector<Scalar>& plus, const Instance<Scalar>& inst) {
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < inst.m(); ++j) acc.add(inst.b()(j) * phi(j));
  for (Index i = 0; i < inst.n(); ++i) acc.add(-inst.a()(i) * plus(i));
  return acc.value();
}

/// J(phi) = <b, phi> - <a, phi^+>
template <typename Scalar>
Scalar semidual_value(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  return semidual_from_plus(phi, plus_transform(phi, inst), inst);
}

/// D(psi, phi) = <b, phi> - <a, psi> - log sum_ij a_i b_j exp(phi_j - psi_i - c_ij / eps)
template <typename Scalar>
Scalar dual_value(const Vector<Scalar>& psi, const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  Matrix<Scalar> e = -inst.scaled_cost();
  e.colwise() += inst.mu().log_weights() - psi;
  e.rowwise() += (inst.nu().log_weights() + phi).transpose();
  return semidual_from_plus(phi, psi, inst) - log_sum_exp(e);
}

template <typename Scalar>
Vector<Scalar> log_marginal_y_from_plus(const Vector<Scalar>& phi, const Vector<Scalar>& plus,
                                        const Instance<Scalar>& inst) {
  const Vector<Scalar> w = inst.mu().log_weights() - plus;
  const Matrix<Scalar>& sc = inst.scaled_cost();
  Vector<Scalar> out(inst.m());
  for (Index j = 0; j < inst.m(); ++j) {
    out(j) = inst.nu().log_weights()(j) + phi(j) + log_sum_exp(w - sc.col(j));
  }
  return out;
}

/// Y-marginal of coupling(phi).
template <typename Scalar>
Vector<Scalar> marginal_y(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  return log_marginal_y_from_plus(phi, plus_transform(phi, inst), inst).array().exp().matrix();
}

/// b - marginal_y(phi), as signed masses.
template <typename Scalar>
Vector<Scalar> first_variation(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  return inst.b() - marginal_y(phi, inst);
}

// Everything one iteration needs from a single pass over the cost.
template <typename Scalar>
struct SemidualState {
  Vector<Scalar> plus;
  Vector<Scalar> log_p;
  Vector<Scalar> p;
  Scalar value;
};

template <typename Scalar>
SemidualState<Scalar> evaluate(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  SemidualState<Scalar> s;
  s.plus = plus_transform(phi, inst);
  s.log_p = log_marginal_y_from_plus(phi, s.plus, inst);
  s.p = s.log_p.array().exp().matrix();
  s.value = semidual_from_plus(phi, s.plus, inst);
  return s;
}

template <typename Scalar>
Matrix<Scalar> log_coupling(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  const Vector<Scalar> plus = plus_transform(phi, inst);
  Matrix<Scalar> l = -inst.scaled_cost();
  l.colwise() += inst.mu().log_weights() - plus;
  l.rowwise() += (inst.nu().log_weights() + phi).transpose();
  return l;
}

/// pi_ij = a_i b_j exp(phi_j - phi^+_i - c_ij / eps)
template <typename Scalar>
Coupling<Scalar> coupling(const Vector<Scalar>& phi, const Instance<Scalar>& inst) {
  return Coupling<Scalar>::from_log(log_coupling(phi, inst));
}

/// log of the normalized reference a_i b_j exp(-c_ij / eps) / Z_ref.
template <typename Scalar>
Matrix<Scalar> log_reference(const Instance<Scalar>& inst) {
  Matrix<Scalar> l = -inst.scaled_cost();
  l.colwise() += inst.mu().log_weights();
  l.rowwise() += inst.nu().log_weights().transpose();
  l.array() -= log_sum_exp(l);
  return l;
}

/// KL(pi || pi_ref); +inf if pi charges a cell the reference does not.
template <typename Scalar>
Scalar primal_value(const Coupling<Scalar>& pi, const Instance<Scalar>& inst) {
  const Matrix<Scalar> ref = log_reference(inst);
  const Matrix<Scalar>& lp = pi.log_masses();
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < lp.cols(); ++j) {
    for (Index i = 0; i < lp.rows(); ++i) {
      if (lp(i, j) == -std::numeric_limits<Scalar>::infinity()) continue;
      if (ref(i, j) == -std::numeric_limits<Scalar>::infinity()) {
        return std::numeric_limits<Scalar>::infinity();
      }
      acc.add(std::exp(lp(i, j)) * (lp(i, j) - ref(i, j)));
    }
  }
  return acc.value();
}

/// <c/eps, pi> + KL(pi || a x b), the unnormalized primal objective whose optimum equals max J.
template <typename Scalar>
Scalar entropic_primal_objective(const Coupling<Scalar>& pi, const Instance<Scalar>& inst) {
  const Matrix<Scalar>& lp = pi.log_masses();
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < lp.cols(); ++j) {
    for (Index i = 0; i < lp.rows(); ++i) {
      if (lp(i, j) == -std::numeric_limits<Scalar>::infinity()) continue;
      const Scalar mass = std::exp(lp(i, j));
      acc.add(mass * (inst.scaled_cost()(i, j) + lp(i, j) - inst.mu().log_weights()(i) -
                      inst.nu().log_weights()(j)));
    }
  }
  return acc.value();
}

}  // namespace eot
