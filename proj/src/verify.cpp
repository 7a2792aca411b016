#include "eot/verify.hpp"

#include "eot/bridge.hpp"
#include "eot/diagnostics.hpp"
#include "eot/io.hpp"
#include "eot/kernels.hpp"
#include "eot/mirrorflow.hpp"
#include "eot/primal.hpp"
#include "eot/random.hpp"
#include "eot/semidual.hpp"
#include "eot/solvers.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace eot::verify {

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;
using Inst = Instance<double>;

// Running record of observed <= bound checks.
struct Tally {
  double worst = std::numeric_limits<double>::infinity();
  long checks = 0;
  void check(double observed, double bound) {
    ++checks;
    const double slack = bound - observed;
    worst = std::isnan(slack) ? -std::numeric_limits<double>::infinity() : std::min(worst, slack);
  }
  PropertyResult result(std::string name, std::string detail = "") const {
    PropertyResult r;
    r.name = std::move(name);
    r.worst_slack = worst;
    r.pass = worst >= 0;
    r.detail = std::to_string(checks) + " checks" + (detail.empty() ? "" : "; " + detail);
    return r;
  }
};

double bregman(const Vec& phi, const Vec& bar, const Inst& inst) {
  return semidual_value(bar, inst) - semidual_value(phi, inst) - first_variation(phi, inst).dot(bar - phi);
}

PhiOperator<double> make_op(PhiKind kind, const Inst& inst) {
  switch (kind) {
    case PhiKind::identity: return PhiOperator<double>::identity();
    case PhiKind::exp: return PhiOperator<double>::exp();
    case PhiKind::chi_square: return PhiOperator<double>::chi_square();
    case PhiKind::exp_kernel:
      return PhiOperator<double>::exp_kernel(
          gram<double>(GaussianKernel{median_pairwise_distance(inst.nu().points())}, inst.nu().points()));
  }
  throw std::logic_error("unknown operator");
}

constexpr PhiKind kAllKinds[] = {PhiKind::identity, PhiKind::exp, PhiKind::exp_kernel, PhiKind::chi_square};

double max_log_gap(const Coupling<double>& p, const Coupling<double>& q) {
  return (p.log_masses() - q.log_masses()).cwiseAbs().maxCoeff();
}

PropertyResult concavity(std::uint64_t seed) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    auto rng = stream_for(seed, 1000 + k);
    const Inst inst = random_instance<double>(rng, 4, 5, 0.1 + 0.9 * (k % 10) / 9.0);
    t.check(bregman(random_potential<double>(rng, 5, 3.0), random_potential<double>(rng, 5, 3.0), inst), 1e-10);
  }
  return t.result("concavity");
}

PropertyResult linf_smoothness(std::uint64_t seed) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    auto rng = stream_for(seed, 2000 + k);
    const Inst inst = random_instance<double>(rng, 4, 5, 0.1 + 0.9 * (k % 10) / 9.0);
    const Vec phi = random_potential<double>(rng, 5, 3.0);
    const Vec bar = random_potential<double>(rng, 5, 3.0);
    const double sup = (bar - phi).cwiseAbs().maxCoeff();
    t.check(-bregman(phi, bar, inst), 0.5 * sup * sup + 1e-10);
  }
  return t.result("sup_norm_smoothness");
}

PropertyResult weighted_smoothness(std::uint64_t seed) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    auto rng = stream_for(seed, 3000 + k);
    const Inst inst = random_instance<double>(rng, 4, 5, 0.2 + 0.8 * (k % 10) / 9.0);
    const double B = 0.5 + 0.1 * (k % 7);
    const Vec phi = random_potential<double>(rng, 5, B);
    const Vec bar = random_potential<double>(rng, 5, B);
    const double lambda = std::exp(log_lambda_bound(inst, B));
    t.check(-bregman(phi, bar, inst), 0.5 * lambda * l2_nu_sq(Vec(bar - phi), inst) + 1e-10);
  }
  return t.result("weighted_smoothness");
}

// E_mu Var_{rho_t(.; x)}(delta), rho_t(y; x) ~ exp(phi + t delta - c/eps) b.
double expected_variance(const Vec& phi, const Vec& delta, double t, const Inst& inst) {
  CompensatedSum<double> acc;
  for (Index i = 0; i < inst.n(); ++i) {
    Vec l = inst.nu().log_weights() + phi + t * delta - Vec(inst.scaled_cost().row(i).transpose());
    l.array() -= log_sum_exp(l);
    const Vec rho = l.array().exp().matrix();
    const double mean = rho.dot(delta);
    acc.add(inst.a()(i) * rho.dot(Vec((delta.array() - mean).square().matrix())));
  }
  return acc.value();
}

PropertyResult variance_identity(std::uint64_t seed) {
  std::vector<double> nodes, weights;
  gauss_legendre_unit(64, nodes, weights);
  Tally t;
  for (int k = 0; k < 20; ++k) {
    auto rng = stream_for(seed, 4000 + k);
    const Inst inst = random_instance<double>(rng, 3, 4, 0.3 + 0.1 * (k % 5));
    const Vec phi = random_potential<double>(rng, 4, 2.0);
    const Vec bar = random_potential<double>(rng, 4, 2.0);
    const Vec delta = bar - phi;
    double integral = 0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      integral += weights[q] * (1.0 - nodes[q]) * expected_variance(phi, delta, nodes[q], inst);
    }
    const double b = bregman(phi, bar, inst);
    t.check(std::abs(b + integral) / std::abs(b), 1e-6);
  }
  return t.result("variance_identity", "weight (1-t)");
}

PropertyResult first_variation_fd(std::uint64_t seed) {
  Tally t;
  const double h = 1e-5;
  for (int k = 0; k < 50; ++k) {
    auto rng = stream_for(seed, 5000 + k);
    const Inst inst = random_instance<double>(rng, 5, 6, 0.5);
    const Vec phi = random_potential<double>(rng, 6, 1.0);
    Vec chi = random_potential<double>(rng, 6, 1.0);
    chi.array() -= chi.mean();
    const double fd = (semidual_value(Vec(phi + h * chi), inst) - semidual_value(Vec(phi - h * chi), inst)) / (2 * h);
    const double exact = first_variation(phi, inst).dot(chi);
    t.check(std::abs(fd - exact) / std::max(std::abs(exact), 1e-3), 1e-5);
  }
  return t.result("first_variation_fd");
}

// Shared loop for the coupling-space equivalences on 5x7 instances.
template <typename Fn>
PropertyResult equivalence(std::uint64_t seed, std::uint64_t salt, const char* name, Fn&& fn) {
  Tally t;
  for (int k = 0; k < 20; ++k) {
    auto rng = stream_for(seed, salt + k);
    const Inst inst = random_instance<double>(rng, 5, 7, 0.2 + 0.1 * (k % 8));
    const Vec phi = random_potential<double>(rng, 7, 1.0);
    for (PhiKind kind : kAllKinds) {
      const PhiOperator<double> op = make_op(kind, inst);
      for (double eta : {0.3, 1.0}) fn(t, inst, phi, op, eta);
    }
  }
  return t.result(name);
}

PropertyResult projections(std::uint64_t seed) {
  return equivalence(seed, 6000, "projection_equivalence", [](Tally& t, const Inst& inst, const Vec& phi,
                                                          const PhiOperator<double>& op, double eta) {
    const Coupling<double> pi = coupling(phi, inst);
    const Coupling<double> dual = coupling(phi_match_step(phi, inst, op, eta), inst);
    t.check(max_log_gap(project_x(project_y(pi, inst, op), pi, inst, eta), dual), 1e-10);
  });
}

PropertyResult root(std::uint64_t seed) {
  return equivalence(seed, 7000, "root_equivalence", [](Tally& t, const Inst& inst, const Vec& phi,
                                                    const PhiOperator<double>& op, double eta) {
    const Coupling<double> pi = coupling(phi, inst);
    t.check(max_log_gap(root_step(pi, inst, op, eta), project_x(project_y(pi, inst, op), pi, inst, eta)), 1e-10);
  });
}

PropertyResult mirror(std::uint64_t seed) {
  return equivalence(seed, 8000, "mirror_equivalence", [](Tally& t, const Inst& inst, const Vec& phi,
                                                      const PhiOperator<double>& op, double eta) {
    const Coupling<double> pi = coupling(phi, inst);
    const Coupling<double> md = mirror_bwd(Mat(mirror_fwd(pi, inst) - eta * v_phi(pi, inst, op)), inst);
    t.check(max_log_gap(md, coupling(phi_match_step(phi, inst, op, eta), inst)), 1e-10);
  });
}

PropertyResult factorization(std::uint64_t seed) {
  return equivalence(seed, 9000, "factorization", [](Tally& t, const Inst& inst, const Vec& phi,
                                                           const PhiOperator<double>& op, double eta) {
    const Coupling<double> pi = coupling(phi, inst);
    const Coupling<double> outs[] = {root_step(pi, inst, op, eta),
                                     project_x(project_y(pi, inst, op), pi, inst, eta),
                                     mirror_bwd(Mat(mirror_fwd(pi, inst) - eta * v_phi(pi, inst, op)), inst)};
    for (const auto& out : outs) {
      t.check(factorization_residual(out, inst), 1e-10);
      t.check((out.x_marginal() - inst.a()).cwiseAbs().maxCoeff(), 1e-12);
    }
  });
}

PropertyResult mmd_smoothness(std::uint64_t seed) {
  Tally t;
  auto rng = stream_for(seed, 10000);
  const Mat pts = random_measure<double>(rng, 8, 2).points();
  const Gram<double> g = gram<double>(GaussianKernel{0.3}, pts);
  const Vec target = dirichlet_weights<double>(rng, 8);
  for (int k = 0; k < 200; ++k) {
    const Vec xi = dirichlet_weights<double>(rng, 8);
    const Vec bar = dirichlet_weights<double>(rng, 8);
    const double gap = mmd_sq(g, bar, target) - mmd_sq(g, xi, target) - mean_embedding(g, Vec(xi - target)).dot(bar - xi);
    t.check(gap, 2 * g.c_k * kl(bar, xi) + 1e-10);
    t.check(-gap, 1e-10);
  }
  return t.result("mmd_smoothness");
}

PropertyResult kernel_rate(std::uint64_t seed) {
  Tally t;
  auto rng = stream_for(seed, 11000);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  const Vec star = oracle_solve(inst).phi;
  const Vec phi0 = Vec::Zero(16);
  const KernelSpec specs[] = {IdentityKernel{}, GaussianKernel{median_pairwise_distance(inst.nu().points())}};
  for (const auto& spec : specs) {
    SolverConfig<double> cfg;
    cfg.op = PhiOperator<double>::exp_kernel(gram<double>(spec, inst.nu().points()));
    cfg.max_iter = 300;
    cfg.tol_l1 = 0;
    const auto res = run(inst, cfg, phi0);
    const auto rep = check_kernel_rate(res.trace, inst, *cfg.op.gram, phi0, star);
    t.check(-rep.worst_slack, kBoundTolerance);
    const auto mono = check_monotone(res.trace, TraceColumn::mmd_sq, true, 1e-12, "mmd");
    t.check(-mono.worst_slack, kBoundTolerance);
  }
  return t.result("kernel_rate");
}

PropertyResult sign_ascent(std::uint64_t seed) {
  Tally t;
  auto rng = stream_for(seed, 12000);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  SolverConfig<double> cfg;
  cfg.method = Method::sign_sga;
  cfg.max_iter = 200;
  cfg.tol_l1 = 0;
  const Vec phi0 = random_potential<double>(rng, 16, 0.5);
  const auto res = run(inst, cfg, phi0);
  t.check(-check_sign_ascent(res.trace, res.eta).worst_slack, kBoundTolerance);
  t.check(std::abs(res.phi(*res.anchor) - phi0(*res.anchor)), 0.0);
  return t.result("sign_ascent");
}

PropertyResult projected(std::uint64_t seed, Method method) {
  Tally t;
  auto rng = stream_for(seed, method == Method::proj_sga ? 13000 : 14000);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  const Vec star = oracle_solve(inst).phi;
  const double B = default_bound(inst);
  SolverConfig<double> cfg;
  cfg.method = method;
  cfg.max_iter = 500;
  cfg.tol_l1 = 0;
  const Vec phi0 = Vec::Zero(16);
  const auto res = run(inst, cfg, phi0);
  const auto rep = method == Method::proj_sga ? check_projected_gap(res.trace, inst, B, phi0, star)
                                              : check_accelerated_gap(res.trace, inst, B, phi0, star);
  if (rep.status == BoundStatus::inconclusive) t.check(1, 0);
  t.check(-rep.worst_slack, kBoundTolerance);
  if (method == Method::proj_sga) {
    t.check(-check_monotone(res.trace, TraceColumn::value, false, 1e-12, "ascent").worst_slack, kBoundTolerance);
  }
  return t.result(method == Method::proj_sga ? "projected_gap" : "accelerated_gap");
}

PropertyResult t_sequence(std::uint64_t) {
  Tally t;
  double tn = 1;
  for (long n = 1; n <= 100000; ++n) {
    const double next = t_next(tn);
    const double momentum = (tn - 1) / next;
    t.check(-momentum, 0);
    t.check(momentum, 1 - 1e-15);
    t.check((n + 1) / 2.0, next);  // t_{n+1} >= (n+2)/2 > (n+1)/2
    tn = next;
  }
  return t.result("momentum_sequence");
}

PropertyResult flow(std::uint64_t seed) {
  Tally t;
  auto rng = stream_for(seed, 15000);
  const Inst inst = random_instance<double>(rng, 8, 8, 0.5);
  const Vec star = oracle_solve(inst).phi;
  for (double r : {2.0, 3.0}) {
    const auto fr = flow_run(inst, Vec(Vec::Zero(8)), star, r, 0.01, 5.0, 1e-3, 1000);
    const double v0 = fr.trace.front().v;
    t.check(fr.blew_up ? 1.0 : 0.0, 0.0);
    t.check(fr.worst_v_increase, 1e-8 * (1 + v0));
    t.check(-fr.worst_rate_slack, kBoundTolerance);
    t.check(fr.worst_average_error, 1e-6);
    t.check(fr.worst_mass_drift, 1e-10);
  }
  return t.result("mirror_flow");
}

PropertyResult bridge(std::uint64_t seed) {
  Tally t;
  const SpaceTimeGrid<double> grid(-14.0, 14.0, 64, 1.0, 201);
  const Inst inst = grid_instance(
      grid, [](double x) { return std::exp(-0.5 * (x + 1) * (x + 1) / 0.64); },
      [](double x) { return std::exp(-0.5 * (x - 1) * (x - 1)); });
  const Vec star = oracle_solve(inst).phi;
  const Index particles = 20000;
  const double tol = 3.0 / std::sqrt(double(particles)) + 2 * grid.dx();
  double worst_tv = 0;
  for (const Vec& phi : {Vec(Vec::Zero(grid.nx())), star}) {
    const auto drift = bridge_from_potential(phi, inst, grid);
    const auto sim = simulate_em(drift, inst.mu(), particles, seed);
    const double tv = total_variation(histogram_on_grid(sim.terminal, grid), marginal_y(phi, inst));
    worst_tv = std::max(worst_tv, tv);
    t.check(tv, tol);
    t.check(sim.excessive_clamping() ? 1.0 : 0.0, 0.0);
  }
  // composition of two propagations against one
  const Vec terminal = terminal_log_density(star, inst, grid);
  const Vec direct = heat_propagate_log(grid, terminal, 0.2);
  const Vec two = propagate_log(grid, heat_propagate_log(grid, terminal, 0.6), 0.4);
  double worst = 0;
  for (Index k = 16; k < 48; ++k) worst = std::max(worst, std::abs(std::expm1(two(k) - direct(k))));
  t.check(worst, 1e-8);
  return t.result("bridge_consistency", "worst tv " + io::format_double(worst_tv) + ", tolerance " + io::format_double(tol));
}

PropertyResult sinkhorn(std::uint64_t seed) {
  Tally t;
  auto rng = stream_for(seed, 16000);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  SolverConfig<double> cfg;
  cfg.max_iter = 50;
  cfg.tol_l1 = 0;
  Vec phi = Vec::Zero(16);
  const auto res = run(inst, cfg, phi);
  for (const auto& rec : res.trace) {
    const Vec p = marginal_y(phi, inst);
    t.check(std::abs(rec.l1_residual - (inst.b() - p).cwiseAbs().sum()), 1e-12);
    phi = minus_transform(plus_transform(phi, inst), inst);
  }
  return t.result("sinkhorn_conformance");
}

using Property = std::function<PropertyResult(std::uint64_t)>;

const std::vector<std::pair<std::string, Property>>& registry() {
  static const std::vector<std::pair<std::string, Property>> props = {
      {"concavity", concavity},
      {"sup_norm_smoothness", linf_smoothness},
      {"weighted_smoothness", weighted_smoothness},
      {"variance_identity", variance_identity},
      {"first_variation_fd", first_variation_fd},
      {"projection_equivalence", projections},
      {"root_equivalence", root},
      {"mirror_equivalence", mirror},
      {"factorization", factorization},
      {"mmd_smoothness", mmd_smoothness},
      {"kernel_rate", kernel_rate},
      {"sign_ascent", sign_ascent},
      {"projected_gap", [](std::uint64_t s) { return projected(s, Method::proj_sga); }},
      {"accelerated_gap", [](std::uint64_t s) { return projected(s, Method::proj_sga_pp); }},
      {"momentum_sequence", t_sequence},
      {"mirror_flow", flow},
      {"bridge_consistency", bridge},
      {"sinkhorn_conformance", sinkhorn},
  };
  return props;
}

}  // namespace

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  for (double x : boost::math::legendre_p_zeros<double>(n)) {
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 1.0 / ((1 - x * x) * dp * dp);  // half the [-1, 1] weight
    nodes.push_back(0.5 * (1 - x));
    weights.push_back(w);
    if (x != 0.0) {
      nodes.push_back(0.5 * (1 + x));
      weights.push_back(w);
    }
  }
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<PropertyResult> run_suite(std::uint64_t seed, const std::string& only) {
  std::vector<PropertyResult> out;
  for (const auto& [name, fn] : registry()) {
    if (!only.empty() && name != only) continue;
    try {
      out.push_back(fn(seed));
    } catch (const std::exception& e) {
      out.push_back({name, false, -std::numeric_limits<double>::infinity(), std::string("error: ") + e.what()});
    }
  }
  if (!only.empty() && out.empty()) throw std::invalid_argument("unknown property '" + only + "'");
  return out;
}

std::string report_json(std::uint64_t seed, const std::vector<PropertyResult>& results) {
  io::json doc;
  doc["seed"] = seed;
  doc["all_pass"] = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  io::json props = io::json::array();
  for (const auto& r : results) {
    io::json p;
    p["name"] = r.name;
    p["pass"] = r.pass;
    p["worst_slack"] = std::isfinite(r.worst_slack) ? io::json(r.worst_slack) : io::json(nullptr);
    p["detail"] = r.detail;
    props.push_back(std::move(p));
  }
  doc["properties"] = std::move(props);
  return doc.dump(2) + "\n";
}

}  // namespace eot::verify
