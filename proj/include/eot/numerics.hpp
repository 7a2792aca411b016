#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace eot {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Neumaier summation; accumulation order is the order of add() calls.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Scalar value() const { return sum_ + carry_; }

 private:
  Scalar sum_ = Scalar(0);
  Scalar carry_ = Scalar(0);
};

template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) acc.add(v(i, j));
  }
  return acc.value();
}

template <typename Derived>
typename Derived::Scalar dot_compensated(const Eigen::MatrixBase<Derived>& u,
                                         const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < u.size(); ++i) acc.add(u(i) * v(i));
  return acc.value();
}

// log(sum exp(v)) with max-shift; -inf entries contribute nothing.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  CompensatedSum<Scalar> acc;
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) acc.add(std::exp(v(i, j) - m));
  }
  return m + std::log(acc.value());
}

template <typename Derived>
Vector<typename Derived::Scalar> row_log_sum_exp(const Eigen::DenseBase<Derived>& m) {
  Vector<typename Derived::Scalar> out(m.rows());
  for (Index i = 0; i < m.rows(); ++i) out(i) = log_sum_exp(m.row(i));
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> col_log_sum_exp(const Eigen::DenseBase<Derived>& m) {
  Vector<typename Derived::Scalar> out(m.cols());
  for (Index j = 0; j < m.cols(); ++j) out(j) = log_sum_exp(m.col(j));
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> safe_log(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out(i) = v(i) > Scalar(0) ? std::log(v(i)) : -std::numeric_limits<Scalar>::infinity();
  }
  return out;
}

}  // namespace eot
