#pragma once

#include "eot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace eot {

struct IdentityKernel {};

struct GaussianKernel {
  double sigma;
};

/// exp(-|y - y'|_1 / (2 scale))
struct LaplaceKernel {
  double scale;
};

using KernelSpec = std::variant<IdentityKernel, GaussianKernel, LaplaceKernel>;

inline std::string kernel_name(const KernelSpec& spec) {
  struct {
    std::string operator()(const IdentityKernel&) const { return "identity"; }
    std::string operator()(const GaussianKernel& k) const { return "gaussian:" + std::to_string(k.sigma); }
    std::string operator()(const LaplaceKernel& k) const { return "laplace:" + std::to_string(k.scale); }
  } visitor;
  return std::visit(visitor, spec);
}

template <typename Scalar>
struct Gram {
  Matrix<Scalar> K;
  Scalar c_k;  // max diagonal entry
};

template <typename Scalar>
Gram<Scalar> gram(const KernelSpec& spec, const Matrix<Scalar>& points) {
  if (!points.allFinite()) throw std::invalid_argument("kernel points must be finite");
  const Index m = points.rows();
  Gram<Scalar> g;
  if (std::holds_alternative<IdentityKernel>(spec)) {
    g.K = Matrix<Scalar>::Identity(m, m);
    g.c_k = Scalar(1);
    return g;
  }
  const bool gaussian = std::holds_alternative<GaussianKernel>(spec);
  const Scalar width = gaussian ? Scalar(std::get<GaussianKernel>(spec).sigma)
                                : Scalar(std::get<LaplaceKernel>(spec).scale);
  if (!(width > Scalar(0)) || !std::isfinite(width)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  g.K.resize(m, m);
  for (Index j = 0; j < m; ++j) {
    g.K(j, j) = Scalar(1);
    for (Index i = 0; i < j; ++i) {
      const auto diff = points.row(i) - points.row(j);
      const Scalar v = gaussian ? std::exp(-diff.squaredNorm() / (Scalar(2) * width * width))
                                : std::exp(-diff.cwiseAbs().sum() / (Scalar(2) * width));
      g.K(i, j) = v;
      g.K(j, i) = v;
    }
  }
  g.c_k = g.K.diagonal().maxCoeff();
  return g;
}

/// K xi
template <typename Scalar>
Vector<Scalar> mean_embedding(const Gram<Scalar>& g, const Vector<Scalar>& xi) {
  if (xi.size() != g.K.rows()) throw std::invalid_argument("mass vector length does not match Gram");
  return g.K * xi;
}

/// 1/2 (xi - rho)^T K (xi - rho)
template <typename Scalar>
Scalar mmd_sq(const Gram<Scalar>& g, const Vector<Scalar>& xi, const Vector<Scalar>& rho) {
  if (xi.size() != g.K.rows() || rho.size() != g.K.rows()) {
    throw std::invalid_argument("mass vector length does not match Gram");
  }
  const Vector<Scalar> d = xi - rho;
  const Vector<Scalar> kd = g.K * d;
  const Scalar v = Scalar(0.5) * dot_compensated(d, kd);
  if (v < Scalar(-1e-12)) throw std::domain_error("negative squared MMD; Gram is not positive semidefinite");
  return std::max(v, Scalar(0));
}

/// Default Gaussian bandwidth.
template <typename Scalar>
Scalar median_pairwise_distance(const Matrix<Scalar>& points) {
  std::vector<Scalar> d;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = i + 1; j < points.rows(); ++j) d.push_back((points.row(i) - points.row(j)).norm());
  }
  if (d.empty()) return Scalar(1);
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > Scalar(0) ? *mid : Scalar(1);
}

}  // namespace eot
