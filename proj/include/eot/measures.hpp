#pragma once

#include "eot/numerics.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace eot {

// Weight sums within this distance of 1 are renormalized; anything further is an input error.
inline constexpr double kRenormalizeTolerance = 1e-9;

template <typename Scalar>
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// points: one atom per row.
  DiscreteMeasure(Matrix<Scalar> points, Vector<Scalar> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (weights_.size() < 1) throw std::invalid_argument("measure needs at least one atom");
    if (points_.rows() != weights_.size()) {
      throw std::invalid_argument("measure has " + std::to_string(points_.rows()) + " points but " +
                                  std::to_string(weights_.size()) + " weights");
    }
    if (!points_.allFinite()) throw std::invalid_argument("measure points must be finite");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(weights_(i)) || weights_(i) <= Scalar(0)) {
        throw std::invalid_argument("atom " + std::to_string(i) + " has non-positive or non-finite weight");
      }
    }
    const Scalar total = compensated_sum(weights_);
    if (std::abs(total - Scalar(1)) > Scalar(kRenormalizeTolerance)) {
      throw std::invalid_argument("weights sum to " + std::to_string(static_cast<double>(total)) +
                                  ", not 1");
    }
    weights_ /= total;
    log_weights_ = weights_.array().log().matrix();
  }

  Index size() const { return weights_.size(); }
  Index dim() const { return points_.cols(); }
  const Matrix<Scalar>& points() const { return points_; }
  const Vector<Scalar>& weights() const { return weights_; }
  const Vector<Scalar>& log_weights() const { return log_weights_; }

 private:
  Matrix<Scalar> points_;
  Vector<Scalar> weights_;
  Vector<Scalar> log_weights_;
};

/// n equispaced 1-D points on [lo, hi] (just lo when n = 1), weights proportional to density.
template <typename Scalar, typename Density>
DiscreteMeasure<Scalar> make_grid_measure(Scalar lo, Scalar hi, Index n, Density&& density) {
  if (!(lo < hi)) throw std::invalid_argument("grid needs lo < hi");
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  Matrix<Scalar> pts(n, 1);
  Vector<Scalar> w(n);
  for (Index k = 0; k < n; ++k) {
    pts(k, 0) = n == 1 ? lo : lo + (hi - lo) * Scalar(k) / Scalar(n - 1);
    w(k) = density(pts(k, 0));
    if (!(w(k) >= Scalar(0)) || !std::isfinite(w(k))) {
      throw std::invalid_argument("density must be finite and nonnegative");
    }
  }
  const Scalar total = compensated_sum(w);
  if (total <= Scalar(0)) throw std::invalid_argument("density vanishes on every grid point");
  return DiscreteMeasure<Scalar>(std::move(pts), w / total);
}

enum class CostKind { half_sqeuclidean, euclidean };

inline const char* cost_kind_name(CostKind kind) {
  return kind == CostKind::half_sqeuclidean ? "half_sqeuclidean" : "euclidean";
}

template <typename Scalar>
Matrix<Scalar> cost_matrix(const DiscreteMeasure<Scalar>& mu, const DiscreteMeasure<Scalar>& nu,
                           CostKind kind) {
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("point dimensions differ: " + std::to_string(mu.dim()) + " vs " +
                                std::to_string(nu.dim()));
  }
  Matrix<Scalar> c(mu.size(), nu.size());
  for (Index j = 0; j < nu.size(); ++j) {
    for (Index i = 0; i < mu.size(); ++i) {
      Scalar sq = 0;
      for (Index k = 0; k < mu.dim(); ++k) {
        const Scalar d = mu.points()(i, k) - nu.points()(j, k);
        sq += d * d;
      }
      c(i, j) = kind == CostKind::half_sqeuclidean ? Scalar(0.5) * sq : std::sqrt(sq);
    }
  }
  return c;
}

template <typename Scalar>
class Instance {
 public:
  Instance(DiscreteMeasure<Scalar> mu, DiscreteMeasure<Scalar> nu, CostKind kind, Scalar epsilon)
      : Instance(mu, nu, cost_matrix(mu, nu, kind), epsilon) {
    kind_ = kind;
  }

  Instance(DiscreteMeasure<Scalar> mu, DiscreteMeasure<Scalar> nu, Matrix<Scalar> cost, Scalar epsilon)
      : mu_(std::move(mu)), nu_(std::move(nu)), cost_(std::move(cost)), epsilon_(epsilon) {
    if (cost_.rows() != mu_.size() || cost_.cols() != nu_.size()) {
      throw std::invalid_argument("cost is " + std::to_string(cost_.rows()) + "x" +
                                  std::to_string(cost_.cols()) + ", expected " +
                                  std::to_string(mu_.size()) + "x" + std::to_string(nu_.size()));
    }
    if (!cost_.allFinite()) throw std::invalid_argument("cost has non-finite entries");
    if (!(epsilon_ > Scalar(0)) || !std::isfinite(epsilon_)) {
      throw std::invalid_argument("epsilon must be positive and finite");
    }
    scaled_cost_ = cost_ / epsilon_;
  }

  const DiscreteMeasure<Scalar>& mu() const { return mu_; }
  const DiscreteMeasure<Scalar>& nu() const { return nu_; }
  const Matrix<Scalar>& cost() const { return cost_; }
  /// c / epsilon
  const Matrix<Scalar>& scaled_cost() const { return scaled_cost_; }
  Scalar epsilon() const { return epsilon_; }
  Index n() const { return mu_.size(); }
  Index m() const { return nu_.size(); }
  const Vector<Scalar>& a() const { return mu_.weights(); }
  const Vector<Scalar>& b() const { return nu_.weights(); }
  /// Set when the cost was built from a named kind rather than passed explicitly.
  std::optional<CostKind> cost_kind() const { return kind_; }

 private:
  DiscreteMeasure<Scalar> mu_;
  DiscreteMeasure<Scalar> nu_;
  Matrix<Scalar> cost_;
  Matrix<Scalar> scaled_cost_;
  Scalar epsilon_;
  std::optional<CostKind> kind_;
};

}  // namespace eot
