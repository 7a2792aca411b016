#pragma once

#include "eot/measures.hpp"
#include "eot/numerics.hpp"
#include "eot/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace eot {

// Reference process dX = sqrt(2 D) dB on [0, T]; its transition over [0, T] is
// proportional to exp(-|x - y|^2 / (4 D T)), so quadratic cost 1/2 |x - y|^2 pairs
// with epsilon = 2 D T. The default D = 1/2 gives epsilon = T.
template <typename Scalar>
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(Scalar lo, Scalar hi, Index nx, Scalar horizon, Index nt, Scalar diffusivity = Scalar(0.5))
      : lo_(lo), hi_(hi), nx_(nx), horizon_(horizon), nt_(nt), diffusivity_(diffusivity) {
    if (!(lo < hi)) throw std::invalid_argument("grid needs lo < hi");
    if (nx < 3) throw std::invalid_argument("grid needs at least 3 spatial nodes");
    if (nt < 2) throw std::invalid_argument("grid needs at least 2 time nodes");
    if (!(horizon > Scalar(0))) throw std::invalid_argument("horizon must be positive");
    if (!(diffusivity > Scalar(0))) throw std::invalid_argument("diffusivity must be positive");
  }

  Scalar lo() const { return lo_; }
  Scalar hi() const { return hi_; }
  Index nx() const { return nx_; }
  Index nt() const { return nt_; }
  Scalar horizon() const { return horizon_; }
  Scalar diffusivity() const { return diffusivity_; }
  Scalar dx() const { return (hi_ - lo_) / Scalar(nx_ - 1); }
  Scalar dt() const { return horizon_ / Scalar(nt_ - 1); }
  Scalar x(Index k) const { return lo_ + dx() * Scalar(k); }
  Scalar t(Index k) const { return k == nt_ - 1 ? horizon_ : dt() * Scalar(k); }
  /// Standard deviation of the reference transition over duration tau.
  Scalar spread(Scalar tau) const { return std::sqrt(Scalar(2) * diffusivity_ * tau); }
  /// Entropic parameter matching quadratic cost on this grid.
  Scalar matching_epsilon() const { return Scalar(2) * diffusivity_ * horizon_; }

  Vector<Scalar> points() const {
    Vector<Scalar> p(nx_);
    for (Index k = 0; k < nx_; ++k) p(k) = x(k);
    return p;
  }

 private:
  Scalar lo_, hi_;
  Index nx_;
  Scalar horizon_;
  Index nt_;
  Scalar diffusivity_;
};

/// log E[exp(values(X_{s+tau})) | X_s = x_k] for the reference process restricted to the grid:
/// Gaussian weights exp(-(x_k - x_l)^2 / (2 spread^2)) normalized over l.
template <typename Scalar>
Vector<Scalar> propagate_log(const SpaceTimeGrid<Scalar>& grid, const Vector<Scalar>& log_values, Scalar tau) {
  if (log_values.size() != grid.nx()) throw std::invalid_argument("values do not match the spatial grid");
  if (!(tau >= Scalar(0))) throw std::invalid_argument("propagation time must be nonnegative");
  if (tau == Scalar(0)) return log_values;
  const Scalar two_var = Scalar(2) * grid.spread(tau) * grid.spread(tau);
  const Index n = grid.nx();
  Vector<Scalar> out(n);
  Vector<Scalar> kernel(n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      const Scalar d = Scalar(k - l) * grid.dx();
      kernel(l) = -d * d / two_var;
    }
    out(k) = log_sum_exp(kernel + log_values) - log_sum_exp(kernel);
  }
  return out;
}

/// log g_t from the terminal log g_T.
template <typename Scalar>
Vector<Scalar> heat_propagate_log(const SpaceTimeGrid<Scalar>& grid, const Vector<Scalar>& log_terminal, Scalar t) {
  if (!(t >= Scalar(0))) throw std::invalid_argument("time must be nonnegative");
  if (t > grid.horizon()) throw std::invalid_argument("time exceeds the horizon");
  return propagate_log(grid, log_terminal, grid.horizon() - t);
}

template <typename Scalar>
Vector<Scalar> heat_propagate(const SpaceTimeGrid<Scalar>& grid, const Vector<Scalar>& log_terminal, Scalar t) {
  return heat_propagate_log(grid, log_terminal, t).array().exp().matrix();
}

template <typename Scalar>
struct DriftField {
  SpaceTimeGrid<Scalar> grid;
  Matrix<Scalar> values;  // time nodes x space nodes

  /// Linear interpolation in space at time node k; clamped at the grid ends.
  Scalar at(Index k, Scalar x) const {
    const Scalar s = std::clamp((x - grid.lo()) / grid.dx(), Scalar(0), Scalar(grid.nx() - 1));
    const Index left = std::min<Index>(static_cast<Index>(s), grid.nx() - 2);
    const Scalar w = s - Scalar(left);
    return (Scalar(1) - w) * values(k, left) + w * values(k, left + 1);
  }
};

/// 2 D d/dx log g by central differences, one-sided at the ends. Rows of log_g are time nodes.
template <typename Scalar>
DriftField<Scalar> drift_field_log(const SpaceTimeGrid<Scalar>& grid, const Matrix<Scalar>& log_g) {
  if (log_g.rows() != grid.nt() || log_g.cols() != grid.nx()) {
    throw std::invalid_argument("log g does not match the space-time grid");
  }
  if (!log_g.allFinite()) throw std::domain_error("g must be strictly positive and finite");
  const Scalar scale = Scalar(2) * grid.diffusivity();
  const Scalar h = grid.dx();
  const Index n = grid.nx();
  Matrix<Scalar> v(grid.nt(), n);
  for (Index k = 0; k < grid.nt(); ++k) {
    v(k, 0) = scale * (log_g(k, 1) - log_g(k, 0)) / h;
    v(k, n - 1) = scale * (log_g(k, n - 1) - log_g(k, n - 2)) / h;
    for (Index l = 1; l + 1 < n; ++l) v(k, l) = scale * (log_g(k, l + 1) - log_g(k, l - 1)) / (Scalar(2) * h);
  }
  return DriftField<Scalar>{grid, std::move(v)};
}

template <typename Scalar>
DriftField<Scalar> drift_field(const SpaceTimeGrid<Scalar>& grid, const Matrix<Scalar>& g) {
  if (!(g.array() > Scalar(0)).all()) throw std::domain_error("g must be strictly positive");
  return drift_field_log(grid, Matrix<Scalar>(g.array().log().matrix()));
}

namespace detail {

template <typename Scalar>
bool on_grid(const DiscreteMeasure<Scalar>& m, const SpaceTimeGrid<Scalar>& grid, Index& node, Index atom) {
  const Scalar s = (m.points()(atom, 0) - grid.lo()) / grid.dx();
  node = static_cast<Index>(std::llround(static_cast<double>(s)));
  return node >= 0 && node < grid.nx() && std::abs(s - Scalar(node)) <= Scalar(1e-9);
}

template <typename Scalar>
Scalar margin_mass(const DiscreteMeasure<Scalar>& m, const SpaceTimeGrid<Scalar>& grid) {
  const Scalar margin = Scalar(6) * grid.spread(grid.horizon());
  Scalar mass = 0;
  for (Index i = 0; i < m.size(); ++i) {
    const Scalar x = m.points()(i, 0);
    if (x < grid.lo() + margin || x > grid.hi() - margin) mass += m.weights()(i);
  }
  return mass;
}

}  // namespace detail

/// Mass a measure may carry within six reference spreads of the grid ends.
inline constexpr double kMarginMassTolerance = 1e-9;

/// Checks that inst is the static problem of this grid: 1-D, mu on grid nodes, nu on every node in
/// order, quadratic cost, matching epsilon, and (unless waived) negligible mass near the ends.
template <typename Scalar>
void validate_bridge_instance(const Instance<Scalar>& inst, const SpaceTimeGrid<Scalar>& grid,
                              bool require_margin = true) {
  if (inst.mu().dim() != 1 || inst.nu().dim() != 1) throw std::invalid_argument("bridge needs 1-D measures");
  if (inst.m() != grid.nx()) throw std::invalid_argument("nu must have one atom per grid node");
  Index node = 0;
  for (Index j = 0; j < inst.m(); ++j) {
    if (!detail::on_grid(inst.nu(), grid, node, j) || node != j) {
      throw std::invalid_argument("nu atom " + std::to_string(j) + " is not grid node " + std::to_string(j));
    }
  }
  for (Index i = 0; i < inst.n(); ++i) {
    if (!detail::on_grid(inst.mu(), grid, node, i)) {
      throw std::invalid_argument("mu atom " + std::to_string(i) + " is not on the grid");
    }
  }
  for (Index j = 0; j < inst.m(); ++j) {
    for (Index i = 0; i < inst.n(); ++i) {
      const Scalar d = inst.mu().points()(i, 0) - inst.nu().points()(j, 0);
      const Scalar expected = Scalar(0.5) * d * d;
      if (std::abs(inst.cost()(i, j) - expected) > Scalar(1e-12) * (Scalar(1) + expected)) {
        throw std::invalid_argument("bridge needs the cost 1/2 |x - y|^2");
      }
    }
  }
  if (std::abs(inst.epsilon() - grid.matching_epsilon()) > Scalar(1e-12) * grid.matching_epsilon()) {
    throw std::invalid_argument("epsilon " + std::to_string(static_cast<double>(inst.epsilon())) +
                                " does not match 2 D T = " +
                                std::to_string(static_cast<double>(grid.matching_epsilon())));
  }
  if (!require_margin) return;
  if (detail::margin_mass(inst.mu(), grid) > Scalar(kMarginMassTolerance) ||
      detail::margin_mass(inst.nu(), grid) > Scalar(kMarginMassTolerance)) {
    throw std::invalid_argument("grid must extend six reference spreads beyond where mu and nu carry mass");
  }
}

/// Static problem of a grid: mu and nu on every node with the given densities, quadratic cost,
/// matching epsilon.
template <typename Scalar, typename MuDensity, typename NuDensity>
Instance<Scalar> grid_instance(const SpaceTimeGrid<Scalar>& grid, MuDensity&& mu_density, NuDensity&& nu_density) {
  auto mu = make_grid_measure<Scalar>(grid.lo(), grid.hi(), grid.nx(), mu_density);
  auto nu = make_grid_measure<Scalar>(grid.lo(), grid.hi(), grid.nx(), nu_density);
  return Instance<Scalar>(std::move(mu), std::move(nu), CostKind::half_sqeuclidean, grid.matching_epsilon());
}

/// Terminal log g_T: phi plus the log-density of nu with respect to Lebesgue measure on the grid.
template <typename Scalar>
Vector<Scalar> terminal_log_density(const Vector<Scalar>& phi, const Instance<Scalar>& inst,
                                    const SpaceTimeGrid<Scalar>& grid) {
  if (phi.size() != grid.nx()) throw std::invalid_argument("potential does not match the grid");
  return ((phi + inst.nu().log_weights()).array() - std::log(grid.dx())).matrix();
}

/// log g_t at every time node.
template <typename Scalar>
Matrix<Scalar> log_g_table(const Vector<Scalar>& log_terminal, const SpaceTimeGrid<Scalar>& grid) {
  Matrix<Scalar> log_g(grid.nt(), grid.nx());
  for (Index k = 0; k < grid.nt(); ++k) log_g.row(k) = heat_propagate_log(grid, log_terminal, grid.t(k)).transpose();
  return log_g;
}

template <typename Scalar>
DriftField<Scalar> bridge_from_potential(const Vector<Scalar>& phi, const Instance<Scalar>& inst,
                                         const SpaceTimeGrid<Scalar>& grid, bool require_margin = true) {
  validate_bridge_instance(inst, grid, require_margin);
  return drift_field_log(grid, log_g_table(terminal_log_density(phi, inst, grid), grid));
}

template <typename Scalar>
struct Simulation {
  Vector<Scalar> terminal;
  Index clamped = 0;  // particles that left the grid by more than one spacing
  bool excessive_clamping() const { return Scalar(clamped) > Scalar(0.01) * Scalar(terminal.size()); }
};

/// Euler-Maruyama for dX = v dt + sqrt(2 D) dB from atoms of mu; particle p uses stream (seed, p).
template <typename Scalar>
Simulation<Scalar> simulate_em(const DriftField<Scalar>& drift, const DiscreteMeasure<Scalar>& mu, Index n_particles,
                               std::uint64_t seed) {
  if (mu.dim() != 1) throw std::invalid_argument("simulation needs a 1-D initial measure");
  if (n_particles < 1) throw std::invalid_argument("need at least one particle");
  const auto& grid = drift.grid;
  const Scalar dt = grid.dt();
  const Scalar noise = std::sqrt(Scalar(2) * grid.diffusivity() * dt);
  const Scalar lo = grid.lo() - grid.dx();
  const Scalar hi = grid.hi() + grid.dx();
  Vector<Scalar> cdf(mu.size());
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < mu.size(); ++i) {
    acc.add(mu.weights()(i));
    cdf(i) = acc.value();
  }

  Simulation<Scalar> out;
  out.terminal.resize(n_particles);
  for (Index p = 0; p < n_particles; ++p) {
    std::mt19937_64 rng = stream_for(seed, static_cast<std::uint64_t>(p));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Scalar u = Scalar(unif(rng)) * cdf(mu.size() - 1);
    const Index atom = std::min<Index>(
        static_cast<Index>(std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u) - cdf.data()), mu.size() - 1);
    Scalar x = mu.points()(atom, 0);
    bool clamped = false;
    for (Index k = 0; k + 1 < grid.nt(); ++k) {
      x += drift.at(k, x) * dt + noise * Scalar(normal(rng));
      if (x < lo || x > hi) {
        x = std::clamp(x, lo, hi);
        clamped = true;
      }
    }
    out.terminal(p) = x;
    if (clamped) ++out.clamped;
  }
  return out;
}

/// Fraction of samples nearest to each grid node.
template <typename Scalar>
Vector<Scalar> histogram_on_grid(const Vector<Scalar>& samples, const SpaceTimeGrid<Scalar>& grid) {
  Vector<Scalar> h = Vector<Scalar>::Zero(grid.nx());
  for (Index p = 0; p < samples.size(); ++p) {
    const Scalar s = (samples(p) - grid.lo()) / grid.dx();
    const Index k = std::clamp<Index>(static_cast<Index>(std::llround(static_cast<double>(s))), 0, grid.nx() - 1);
    h(k) += Scalar(1);
  }
  return h / Scalar(samples.size());
}

template <typename Scalar>
Scalar total_variation(const Vector<Scalar>& p, const Vector<Scalar>& q) {
  return Scalar(0.5) * (p - q).cwiseAbs().sum();
}

}  // namespace eot
