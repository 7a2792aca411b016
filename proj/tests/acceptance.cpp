// Acceptance suite: one line per criterion, tolerances fixed below.
// Usage: acceptance <path to eot binary>

#include "eot/bridge.hpp"
#include "eot/diagnostics.hpp"
#include "eot/io.hpp"
#include "eot/mirrorflow.hpp"
#include "eot/primal.hpp"
#include "eot/random.hpp"
#include "eot/semidual.hpp"
#include "eot/solvers.hpp"
#include "eot/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace eot;
using Vec = Vector<double>;
using Mat = Matrix<double>;
using Inst = Instance<double>;

namespace {

constexpr double kBoundTol = 1e-10;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kEquivalenceTol = 1e-10;
constexpr double kMarginalTol = 1e-12;
constexpr double kFdRelTol = 1e-5;
constexpr double kIdentityRelTol = 1e-6;
constexpr double kSinkhornTol = 1e-12;
constexpr double kFlowSlack = 1e-8;
constexpr double kSemigroupTol = 1e-8;
constexpr double kRateSlope = -1.0;
constexpr double kPhiGolden = 1.6180339887498949;

constexpr double kRuntime1 = 60, kRuntime3 = 60, kRuntime6 = 10, kRuntime7 = 20, kRuntime9 = 120, kRuntime10 = 120;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

struct Line {
  int id;
  std::string name;
  bool pass;
  bool known_unattainable;
  std::string detail;
};

std::vector<Line> lines;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void record(int id, const std::string& name, Outcome& o, double elapsed, double budget, bool known = false) {
  o.detail << " runtime " << elapsed << "s";
  if (budget > 0) o.require(elapsed <= budget, "runtime budget " + std::to_string(int(budget)) + "s");
  lines.push_back({id, name, o.pass, known, o.detail.str()});
  std::printf("%s %2d %s:%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
}

void info(const std::string& text) { std::printf("INFO    %s\n", text.c_str()); }

double bregman(const Vec& phi, const Vec& bar, const Inst& inst) {
  return semidual_value(bar, inst) - semidual_value(phi, inst) - first_variation(phi, inst).dot(bar - phi);
}

double largest_drop(const Trace<double>& trace) {
  double worst = -INFINITY;
  for (std::size_t k = 1; k < trace.size(); ++k) worst = std::max(worst, trace[k - 1].value - trace[k].value);
  return worst;
}

// ---- 1 and 2

void kernel_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome rate, mono;
  double worst_rate = INFINITY, worst_mono = -INFINITY;
  for (double eps : {0.05, 0.5}) {
    auto rng = stream_for(42, eps < 0.1 ? 101 : 102);
    const Inst inst = random_instance<double>(rng, 64, 64, eps);
    const auto oracle = oracle_solve(inst, 1e-12);
    rate.require(oracle.residual <= 1e-12, "oracle residual");
    const KernelSpec specs[] = {IdentityKernel{}, GaussianKernel{median_pairwise_distance(inst.nu().points())}};
    for (const auto& spec : specs) {
      SolverConfig<double> cfg;
      cfg.op = PhiOperator<double>::exp_kernel(gram<double>(spec, inst.nu().points()));
      cfg.max_iter = 2000;
      cfg.tol_l1 = 0;
      const auto res = run(inst, cfg, Vec(Vec::Zero(64)));
      rate.require(res.eta == std::min(1 / (2 * cfg.op.gram->c_k), 1.0), "auto step size");
      const auto rep = check_kernel_rate(res.trace, inst, *cfg.op.gram, Vec(Vec::Zero(64)), oracle.phi);
      rate.require(rep.passed(), "rate bound eps=" + io::format_double(eps) + " " + kernel_name(spec));
      worst_rate = std::min(worst_rate, rep.worst_slack);
      const auto m = check_monotone(res.trace, TraceColumn::mmd_sq, true, kMonotoneSlack, "mmd");
      mono.require(m.passed(), "mmd monotone eps=" + io::format_double(eps) + " " + kernel_name(spec));
      for (std::size_t k = 1; k < res.trace.size(); ++k) {
        worst_mono = std::max(worst_mono, *res.trace[k].mmd_sq - *res.trace[k - 1].mmd_sq);
      }
      if (spec.index() == 1) {
        info("kernel rate eps=" + io::format_double(eps) + " gaussian: mmd^2 slope over [50, 2000] = " +
             io::format_double(rate_fit(res.trace, TraceColumn::mmd_sq, 50, 2000)));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  rate.detail << " 64x64, eps {0.05, 0.5}, identity+gaussian, N<=2000; worst slack " << worst_rate;
  mono.detail << " largest per-step increase " << worst_mono << " (allowed " << kMonotoneSlack << ")";
  record(1, "kernel SGA rate bound", rate, elapsed, kRuntime1);
  record(2, "MMD monotonicity", mono, 0, 0);
}

// ---- 3 and 4

void projected() {
  auto rng = stream_for(42, 103);
  const Inst inst = random_instance<double>(rng, 32, 32, 0.5);
  const Vec star = oracle_solve(inst).phi;
  const double B = default_bound(inst);
  const Vec phi0 = Vec::Zero(32);
  {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    SolverConfig<double> cfg;
    cfg.method = Method::proj_sga;
    cfg.max_iter = 2000;
    cfg.tol_l1 = 0;
    const auto res = run(inst, cfg, phi0);
    o.require(res.eta == std::exp(-log_lambda_bound(inst, B)), "step 1/lambda(B)");
    const auto rep = check_projected_gap(res.trace, inst, B, phi0, star);
    o.require(rep.passed(), "gap bound (status " + std::string(status_name(rep.status)) + ")");
    const auto mono = check_monotone(res.trace, TraceColumn::value, false, kMonotoneSlack, "ascent");
    o.require(mono.passed(), "J non-decreasing");
    o.detail << " 32x32 eps 0.5, B=" << B << ", eta=" << res.eta << ", N<=2000; worst slack " << rep.worst_slack
             << "; largest J decrease " << largest_drop(res.trace);
    record(3, "projected SGA gap bound", o, seconds_since(t0), kRuntime3);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    SolverConfig<double> cfg;
    cfg.method = Method::proj_sga_pp;
    cfg.max_iter = 500;
    cfg.tol_l1 = 0;
    const auto res = run(inst, cfg, phi0);
    o.require(res.eta == std::exp(-log_lambda_bound(inst, 3 * B)), "step 1/lambda(3B)");
    const auto rep = check_accelerated_gap(res.trace, inst, B, phi0, star);
    o.require(rep.passed(), "accelerated gap bound (status " + std::string(status_name(rep.status)) + ")");
    std::vector<Index> iters;
    std::vector<double> gaps;
    for (std::size_t k = 0; k < rep.iterations.size(); ++k) {
      iters.push_back(rep.iterations[k]);
      gaps.push_back(rep.observed[k]);
    }
    double slope = NAN;
    try {
      slope = rate_fit(iters, gaps, 50, 500);
    } catch (const std::domain_error& e) {
      o.require(false, std::string("rate fit: ") + e.what());
    }
    o.require(slope <= kRateSlope, "gap slope <= -1");
    o.detail << " N<=500, eta=" << res.eta << "; worst slack " << rep.worst_slack << "; gap slope over [50, 500] "
             << slope;
    record(4, "accelerated projected SGA", o, seconds_since(t0), kRuntime3);
  }
}

// ---- 5

void sign_sga() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  auto rng = stream_for(42, 105);
  const Inst inst = random_instance<double>(rng, 32, 32, 0.5);
  SolverConfig<double> cfg;
  cfg.method = Method::sign_sga;
  cfg.eta = 1.0;
  cfg.max_iter = 1000;
  cfg.tol_l1 = 0;
  const Vec phi0 = random_potential<double>(rng, 32, 0.5);
  const auto res = run(inst, cfg, phi0);
  // recompute each step with the anchor tracked explicitly
  Vec phi = phi0;
  double worst = INFINITY, anchor_drift = 0;
  for (int n = 0; n < 1000; ++n) {
    const Vec next = sign_sga_step(phi, inst, 1.0, *res.anchor);
    const double l1 = first_variation(phi, inst).cwiseAbs().sum();
    worst = std::min(worst, semidual_value(next, inst) - semidual_value(phi, inst) - 0.5 * l1 * l1);
    anchor_drift = std::max(anchor_drift, std::abs(next(*res.anchor) - phi0(*res.anchor)));
    phi = next;
  }
  o.require(worst >= -kBoundTol, "per-step ascent");
  o.require(anchor_drift == 0.0, "anchor constant");
  o.require(check_sign_ascent(res.trace, 1.0).passed(), "runner trace ascent");
  o.require((res.phi - phi).cwiseAbs().maxCoeff() == 0.0, "runner matches step function");
  o.detail << " 32x32, 1000 steps, anchor " << *res.anchor << "; worst ascent slack " << worst << "; anchor drift "
           << anchor_drift;
  record(5, "sign SGA ascent and anchoring", o, seconds_since(t0), 0);
}

// ---- 6

void equivalences() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  double worst_log = 0, worst_marg = 0;
  long count = 0;
  for (int k = 0; k < 100; ++k) {
    auto rng = stream_for(42, 10000 + k);
    const Inst inst = random_instance<double>(rng, 5, 7, 0.1 + 0.9 * (k % 10) / 9.0);
    const Vec phi = random_potential<double>(rng, 7, 1.5);
    const Coupling<double> pi = coupling(phi, inst);
    const PhiOperator<double> ops[] = {
        PhiOperator<double>::identity(), PhiOperator<double>::exp(),
        PhiOperator<double>::exp_kernel(
            gram<double>(GaussianKernel{median_pairwise_distance(inst.nu().points())}, inst.nu().points())),
        PhiOperator<double>::chi_square()};
    for (const auto& op : ops) {
      for (double eta : {0.3, 1.0}) {
        const Coupling<double> outs[] = {
            coupling(phi_match_step(phi, inst, op, eta), inst), project_x(project_y(pi, inst, op), pi, inst, eta),
            root_step(pi, inst, op, eta), mirror_bwd(Mat(mirror_fwd(pi, inst) - eta * v_phi(pi, inst, op)), inst)};
        for (int a = 0; a < 4; ++a) {
          worst_marg = std::max(worst_marg, (outs[a].x_marginal() - inst.a()).cwiseAbs().maxCoeff());
          for (int b = a + 1; b < 4; ++b) {
            worst_log = std::max(worst_log, (outs[a].log_masses() - outs[b].log_masses()).cwiseAbs().maxCoeff());
          }
        }
        ++count;
      }
    }
  }
  o.require(worst_log <= kEquivalenceTol, "pairwise log agreement");
  o.require(worst_marg <= kMarginalTol, "X-marginals");
  o.detail << " " << count << " cases; worst log gap " << worst_log << ", worst marginal error " << worst_marg;
  record(6, "coupling-space equivalences", o, seconds_since(t0), kRuntime6);
}

// ---- 7

void semidual_calculus() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  double worst_fd = 0, worst_concave = -INFINITY, worst_linf = INFINITY, worst_l2 = INFINITY;
  for (int k = 0; k < 1000; ++k) {
    auto rng = stream_for(42, 20000 + k);
    const Index n = 2 + k % 6, m = 2 + (k / 6) % 6;
    const Inst inst = random_instance<double>(rng, n, m, 0.1 + 0.1 * (k % 10));
    const double B = 0.5 + 0.25 * (k % 8);
    const Vec phi = random_potential<double>(rng, m, B);
    const Vec bar = random_potential<double>(rng, m, B);
    const double br = bregman(phi, bar, inst);
    const double sup = (bar - phi).cwiseAbs().maxCoeff();
    worst_concave = std::max(worst_concave, br);
    worst_linf = std::min(worst_linf, br + 0.5 * sup * sup);
    const double lambda = std::exp(log_lambda_bound(inst, B));
    worst_l2 = std::min(worst_l2, br + 0.5 * lambda * l2_nu_sq(Vec(bar - phi), inst));
    if (k < 200) {
      Vec chi = random_potential<double>(rng, m, 1.0);
      chi.array() -= chi.mean();
      const double h = 1e-5;
      const double fd = (semidual_value(Vec(phi + h * chi), inst) - semidual_value(Vec(phi - h * chi), inst)) / (2 * h);
      const double exact = first_variation(phi, inst).dot(chi);
      worst_fd = std::max(worst_fd, std::abs(fd - exact) / std::max(std::abs(exact), 1e-3));
    }
  }
  o.require(worst_fd <= kFdRelTol, "finite differences");
  o.require(worst_concave <= kBoundTol, "concavity");
  o.require(worst_linf >= -kBoundTol, "sup-norm bound");
  o.require(worst_l2 >= -kBoundTol, "weighted L2 bound");

  std::vector<double> nodes, weights;
  verify::gauss_legendre_unit(64, nodes, weights);
  double worst_stated = 0, worst_weighted = 0;
  for (int k = 0; k < 50; ++k) {
    auto rng = stream_for(42, 30000 + k);
    const Inst inst = random_instance<double>(rng, 3, 4, 0.2 + 0.2 * (k % 5));
    const Vec phi = random_potential<double>(rng, 4, 2.0);
    const Vec bar = random_potential<double>(rng, 4, 2.0);
    const Vec d = bar - phi;
    double plain = 0, weighted = 0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      double ev = 0;
      for (Index i = 0; i < 3; ++i) {
        Vec l = inst.nu().log_weights() + phi + nodes[q] * d - Vec(inst.scaled_cost().row(i).transpose());
        const Vec rho = (l.array() - log_sum_exp(l)).exp().matrix();
        const double mean = rho.dot(d);
        ev += inst.a()(i) * rho.dot(Vec((d.array() - mean).square().matrix()));
      }
      plain += weights[q] * ev;
      weighted += weights[q] * (1 - nodes[q]) * ev;
    }
    const double br = bregman(phi, bar, inst);
    worst_stated = std::max(worst_stated, std::abs(br + 0.5 * plain) / std::abs(br));
    worst_weighted = std::max(worst_weighted, std::abs(br + weighted) / std::abs(br));
  }
  o.require(worst_stated <= kIdentityRelTol, "variance identity with constant weight 1/2");
  o.detail << " 1000 pairs; worst fd rel err " << worst_fd << ", max Bregman " << worst_concave << ", sup-norm slack "
           << worst_linf << ", L2 slack " << worst_l2 << "; constant-weight identity worst rel err " << worst_stated;
  record(7, "semi-dual calculus", o, seconds_since(t0), kRuntime7, true);
  info("criterion 7: the constant-weight form -1/2 int E Var dt does not hold; the Bregman gap equals "
       "-int (1-t) E Var dt (worst rel err " + io::format_double(worst_weighted) + " on the same 50 instances)");
}

// ---- 8

void sinkhorn() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  auto rng = stream_for(42, 108);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  SolverConfig<double> cfg;
  cfg.max_iter = 50;
  cfg.tol_l1 = 0;
  const auto res = run(inst, cfg, Vec(Vec::Zero(16)));

  // textbook log-domain Sinkhorn on scalings f, g with pi = exp(f_i + g_j - c_ij / eps)
  const Mat logk = -inst.scaled_cost();
  Vec f(16), g = inst.b().array().log().matrix();
  double worst_res = 0, worst_value = 0;
  for (int it = 0; it <= 50; ++it) {
    for (Index i = 0; i < 16; ++i) f(i) = std::log(inst.a()(i)) - log_sum_exp(Vec(logk.row(i).transpose() + g));
    Vec logp(16);
    for (Index j = 0; j < 16; ++j) logp(j) = log_sum_exp(Vec(logk.col(j) + f)) + g(j);
    const double residual = (logp.array().exp().matrix() - inst.b()).cwiseAbs().sum();
    // dual value with psi = log a - f and phi = g - log b
    const Vec phi = g - Vec(inst.b().array().log());
    const Vec psi = Vec(inst.a().array().log()) - f;
    const double value = inst.b().dot(phi) - inst.a().dot(psi);
    worst_res = std::max(worst_res, std::abs(residual - res.trace[it].l1_residual));
    worst_value = std::max(worst_value, std::abs(value - res.trace[it].value));
    for (Index j = 0; j < 16; ++j) g(j) = std::log(inst.b()(j)) - log_sum_exp(Vec(logk.col(j) + f));
  }
  o.require(res.trace.size() == 51, "51 records");
  o.require(worst_res <= kSinkhornTol, "residual trace");
  o.require(worst_value <= kSinkhornTol, "objective trace");
  o.detail << " 16x16, 50 iterations; worst residual gap " << worst_res << ", worst objective gap " << worst_value;
  record(8, "Sinkhorn conformance", o, seconds_since(t0), 0);
}

// ---- 9

void flow() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  auto rng = stream_for(42, 109);
  const Inst inst = random_instance<double>(rng, 16, 16, 0.5);
  const Vec star = oracle_solve(inst).phi;
  for (double r : {2.0, 3.0}) {
    const auto fr = flow_run(inst, Vec(Vec::Zero(16)), star, r, 0.01, 50.0, 1e-3, 1000);
    const double v0 = fr.trace.front().v;
    const std::string tag = " r=" + io::format_double(r);
    o.require(!fr.blew_up, "finite trajectory" + tag);
    o.require(fr.worst_v_increase <= kFlowSlack * (1 + v0), "V non-increasing" + tag);
    o.require(fr.worst_rate_slack_reverse >= -kBoundTol, "rate with KL(pi0 || pi*)" + tag);
    o.require(fr.worst_rate_slack >= -kBoundTol, "rate with KL(pi* || pi0)" + tag);
    o.detail << tag << ": worst dV " << fr.worst_v_increase << " (allowed " << kFlowSlack * (1 + v0)
             << "), rate slack " << fr.worst_rate_slack_reverse << " / " << fr.worst_rate_slack << ", final Lk "
             << fr.trace.back().lk << ";";
  }
  record(9, "accelerated mirror flow", o, seconds_since(t0), kRuntime9);
}

// ---- 10

void bridge() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const SpaceTimeGrid<double> grid(-14.0, 14.0, 64, 1.0, 201);
  const Inst inst = grid_instance(
      grid, [](double x) { return std::exp(-0.5 * (x + 1) * (x + 1) / 0.64); },
      [](double x) { return std::exp(-0.5 * (x - 1) * (x - 1)); });
  const Vec star = oracle_solve(inst).phi;
  const Index n = 100000;
  const double mc = 3 / std::sqrt(double(n)), disc = 2 * grid.dx();
  o.detail << " eps=T=" << inst.epsilon() << ", dx " << grid.dx() << ", tolerance " << mc << " + " << disc << ";";
  const std::pair<const char*, Vec> potentials[] = {{"zero", Vec::Zero(64)}, {"optimal", star}};
  for (const auto& [name, phi] : potentials) {
    const auto sim = simulate_em(bridge_from_potential(phi, inst, grid), inst.mu(), n, 42);
    const double tv = total_variation(histogram_on_grid(sim.terminal, grid), marginal_y(phi, inst));
    o.require(tv <= mc + disc, std::string("terminal law, ") + name);
    o.require(!sim.excessive_clamping(), std::string("clamping, ") + name);
    o.detail << " " << name << " tv " << tv << " (" << sim.clamped << " clamped);";
  }
  const Vec terminal = terminal_log_density(star, inst, grid);
  double worst = 0;
  auto pick = stream_for(42, 110);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    // each leg must resolve the grid: spread >= dx needs a leg of at least dx^2 / (2D) ~ 0.2
    const double t = 0.5 * unif(pick), s = t + 0.25 + (0.5 - t) * unif(pick);
    const Vec direct = heat_propagate_log(grid, terminal, t);
    const Vec two = propagate_log(grid, heat_propagate_log(grid, terminal, s), s - t);
    for (Index l = 16; l < 48; ++l) worst = std::max(worst, std::abs(std::expm1(two(l) - direct(l))));
  }
  o.require(worst <= kSemigroupTol, "semigroup composition");
  o.detail << " semigroup rel err " << worst;
  record(10, "bridge terminal law", o, seconds_since(t0), kRuntime10);
}

// ---- 11

void momentum() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.require(std::abs(t_next(1.0) - kPhiGolden) <= 1e-12, "t_2");
  double t = 1, worst_growth = INFINITY, max_momentum = 0, min_momentum = INFINITY;
  for (long n = 1; n < 1000000; ++n) {
    const double next = t_next(t);
    const double mom = (t - 1) / next;
    max_momentum = std::max(max_momentum, mom);
    min_momentum = std::min(min_momentum, mom);
    worst_growth = std::min(worst_growth, next - (n + 2) / 2.0);  // t_{n+1} >= (n+2)/2
    t = next;
  }
  o.require(min_momentum >= 0 && max_momentum < 1, "momentum in [0, 1)");
  o.require(worst_growth >= 0, "t_N >= (N+1)/2");
  o.detail << " N<=1e6; momentum range [" << min_momentum << ", " << max_momentum << "], worst growth slack "
           << worst_growth;
  record(11, "momentum sequence", o, seconds_since(t0), 0);
}

// ---- 12

void determinism(const std::string& cli) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / ("eot_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  const int rc1 = std::system((cli + " verify --seed 42 --report " + a).c_str());
  const int rc2 = std::system((cli + " verify --seed 42 --report " + b).c_str());
  o.require(rc1 == 0 && rc2 == 0, "verify exit status");
  const std::string ra = std::filesystem::exists(a) ? io::read_file(a) : "";
  const std::string rb = std::filesystem::exists(b) ? io::read_file(b) : "x";
  o.require(ra == rb, "byte-identical reports");
  o.detail << " two runs of verify --seed 42, " << ra.size() << " bytes each";
  std::filesystem::remove_all(dir);
  record(12, "determinism", o, seconds_since(t0), 0);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <eot binary>\n");
    return 1;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, kernel_rate}, {3, projected},  {5, sign_sga}, {6, equivalences}, {7, semidual_calculus},
      {8, sinkhorn},    {9, flow},       {10, bridge},  {11, momentum},    {12, [&] { determinism(cli); }}};
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      Outcome o;
      o.require(false, std::string("exception: ") + e.what());
      record(id, "criterion", o, 0, 0);
    }
  }
  int unexpected = 0, known = 0;
  for (const auto& l : lines) {
    if (l.pass) continue;
    if (l.known_unattainable) {
      ++known;
    } else {
      ++unexpected;
    }
  }
  std::printf("summary: %zu criteria, %d unexpected failures, %d known-unattainable failures\n", lines.size(),
              unexpected, known);
  if (known > 0) {
    std::printf("known-unattainable failures are reported but do not fail this binary; see README\n");
  }
  return unexpected == 0 ? 0 : 1;
}
