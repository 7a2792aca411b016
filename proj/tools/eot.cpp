#include "eot/bridge.hpp"
#include "eot/diagnostics.hpp"
#include "eot/io.hpp"
#include "eot/kernels.hpp"
#include "eot/mirrorflow.hpp"
#include "eot/random.hpp"
#include "eot/solvers.hpp"
#include "eot/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

using json = eot::io::json;
using Vec = eot::Vector<double>;
using Inst = eot::Instance<double>;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;
constexpr int kFailure = 3;

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

double parse_real(const std::string& text, const char* what) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InputError(std::string(what) + " '" + text + "' is not a number");
  }
  return v;
}

std::optional<double> parse_auto_real(const std::string& text, const char* what) {
  if (text == "auto") return std::nullopt;
  return parse_real(text, what);
}

// Where a command gets its instance: a file or a seeded random draw.
struct InstanceSource {
  std::string path;
  std::string random;  // "NxM"
  double epsilon = 0.5;
  std::uint64_t seed = 42;

  void attach(CLI::App* cmd) {
    cmd->add_option("--instance", path, "instance file");
    cmd->add_option("--random", random, "draw a random NxM instance instead");
    cmd->add_option("--epsilon", epsilon, "regularization of a random instance");
    cmd->add_option("--seed", seed, "seed for all randomness")->capture_default_str();
  }

  Inst load() const {
    if (path.empty() == random.empty()) throw InputError("give exactly one of --instance or --random");
    if (!path.empty()) return eot::io::load_instance(path);
    const auto x = random.find('x');
    if (x == std::string::npos) throw InputError("--random expects NxM");
    const double n = parse_real(random.substr(0, x), "--random rows");
    const double m = parse_real(random.substr(x + 1), "--random columns");
    if (n < 1 || m < 1 || n != std::floor(n) || m != std::floor(m)) throw InputError("--random sizes must be positive integers");
    auto rng = eot::stream_for(seed, 0);
    return eot::random_instance<double>(rng, static_cast<eot::Index>(n), static_cast<eot::Index>(m), epsilon);
  }
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    eot::io::write_atomic(path, content);
  }
}

json vector_json(const Vec& v) {
  json arr = json::array();
  for (eot::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

// ---- solve

struct SolveArgs {
  InstanceSource source;
  std::string method = "sinkhorn";
  std::string eta = "auto";
  std::string kernel;
  std::string bound = "auto";
  std::string anchor = "auto";
  long max_iter = 1000;
  double tol = 1e-10;
  long record_every = 1;
  std::string trace_path;
  std::string summary_path;
  bool timing = false;
  bool reports = true;
};

eot::SolverConfig<double> solver_config(const SolveArgs& args, const Inst& inst) {
  eot::SolverConfig<double> cfg;
  std::shared_ptr<const eot::Gram<double>> g;
  if (!args.kernel.empty()) {
    g = std::make_shared<const eot::Gram<double>>(
        eot::gram<double>(eot::io::parse_kernel_spec(args.kernel), inst.nu().points()));
  }
  if (args.method == "sinkhorn" || args.method == "eta_sinkhorn") {
    cfg.op = eot::PhiOperator<double>::identity();
  } else if (args.method == "sga") {
    cfg.op = eot::PhiOperator<double>::exp();
  } else if (args.method == "ksga") {
    if (!g) {
      g = std::make_shared<const eot::Gram<double>>(eot::gram<double>(
          eot::GaussianKernel{eot::median_pairwise_distance(inst.nu().points())}, inst.nu().points()));
    }
    cfg.op = eot::PhiOperator<double>::exp_kernel(*g);
  } else if (args.method == "chi2") {
    cfg.op = eot::PhiOperator<double>::chi_square();
  } else if (args.method == "sign_sga") {
    cfg.method = eot::Method::sign_sga;
  } else if (args.method == "proj_sga") {
    cfg.method = eot::Method::proj_sga;
  } else if (args.method == "proj_sga_pp") {
    cfg.method = eot::Method::proj_sga_pp;
  } else {
    throw InputError("unknown method '" + args.method + "'");
  }
  cfg.diagnostic_gram = g;
  cfg.eta = parse_auto_real(args.eta, "--eta");
  if (args.method == "sinkhorn" && cfg.eta && *cfg.eta != 1.0) {
    throw InputError("sinkhorn uses a unit step; use eta_sinkhorn for other step sizes");
  }
  cfg.bound = parse_auto_real(args.bound, "--B");
  if (cfg.bound && !(*cfg.bound > 0)) throw InputError("--B must be positive");
  if (args.anchor != "auto") {
    const double a = parse_real(args.anchor, "--anchor");
    if (a < 0 || a != std::floor(a) || a >= double(inst.m())) throw InputError("--anchor must index an atom of nu");
    cfg.anchor = static_cast<eot::Index>(a);
  }
  if (args.max_iter < 0) throw InputError("--max-iter must be nonnegative");
  if (!(args.tol >= 0)) throw InputError("--tol must be nonnegative");
  if (args.record_every < 1) throw InputError("--record-every must be at least 1");
  cfg.max_iter = args.max_iter;
  cfg.tol_l1 = args.tol;
  cfg.record_every = args.record_every;
  return cfg;
}

json bound_reports(const SolveArgs& args, const eot::SolverConfig<double>& cfg, const eot::RunResult<double>& res,
                   const Inst& inst, const Vec& phi0) {
  json out = json::array();
  if (!args.reports) return out;
  const bool every_step = cfg.record_every == 1;
  const Vec star = eot::oracle_solve(inst).phi;
  if (args.method == "ksga") {
    out.push_back(eot::io::report_to_json(eot::check_kernel_rate(res.trace, inst, *cfg.op.gram, phi0, star)));
  }
  if (res.trace.front().mmd_sq && every_step) {
    out.push_back(eot::io::report_to_json(
        eot::check_monotone(res.trace, eot::TraceColumn::mmd_sq, true, 1e-12, "mmd_monotone")));
  }
  if (cfg.method == eot::Method::sign_sga && every_step) {
    out.push_back(eot::io::report_to_json(eot::check_sign_ascent(res.trace, res.eta)));
  }
  if (cfg.method == eot::Method::proj_sga) {
    out.push_back(eot::io::report_to_json(eot::check_projected_gap(res.trace, inst, *res.bound, phi0, star)));
  }
  if (cfg.method == eot::Method::proj_sga_pp) {
    out.push_back(eot::io::report_to_json(eot::check_accelerated_gap(res.trace, inst, *res.bound, phi0, star)));
  }
  return out;
}

int cmd_solve(const SolveArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const Inst inst = args.source.load();
  const auto cfg = solver_config(args, inst);
  const Vec phi0 = Vec::Zero(inst.m());
  const auto res = eot::run(inst, cfg, phi0);

  json summary;
  summary["digest"] = eot::io::instance_digest(inst);
  summary["method"] = args.method;
  summary["eta"] = res.eta;
  if (res.bound) summary["B"] = *res.bound;
  if (res.anchor) summary["anchor"] = *res.anchor;
  if (cfg.op.gram) summary["c_k"] = cfg.op.gram->c_k;
  summary["iterations"] = res.iterations;
  summary["converged"] = res.converged;
  summary["final_J"] = res.trace.back().value;
  summary["final_l1_residual"] = res.trace.back().l1_residual;
  summary["reports"] = bound_reports(args, cfg, res, inst, phi0);
  summary["phi"] = vector_json(res.phi);
  if (args.timing) {
    summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (!args.trace_path.empty()) emit(args.trace_path, eot::io::trace_csv(res.trace, args.timing));
  emit(args.summary_path, summary.dump(2) + "\n");
  for (const auto& r : summary["reports"]) {
    if (!r["pass"].get<bool>()) return kFailure;
  }
  return res.converged ? kOk : kNotConverged;
}

// ---- oracle

struct OracleArgs {
  InstanceSource source;
  double tol = 1e-12;
  long max_iter = 1000000;
  std::string summary_path;
};

int cmd_oracle(const OracleArgs& args) {
  const Inst inst = args.source.load();
  if (!(args.tol > 0)) throw InputError("--tol must be positive");
  if (args.max_iter < 1) throw InputError("--max-iter must be positive");
  const auto res = eot::oracle_solve(inst, args.tol, args.max_iter);
  json summary;
  summary["digest"] = eot::io::instance_digest(inst);
  summary["method"] = "oracle";
  summary["iterations"] = res.iterations;
  summary["residual"] = res.residual;
  summary["duality_gap"] = res.duality_gap;
  summary["final_J"] = eot::semidual_value(res.phi, inst);
  summary["phi"] = vector_json(res.phi);
  emit(args.summary_path, summary.dump(2) + "\n");
  return res.residual <= args.tol ? kOk : kNotConverged;
}

// ---- verify

struct VerifyArgs {
  std::uint64_t seed = 42;
  std::string only;
  std::string report_path;
};

int cmd_verify(const VerifyArgs& args) {
  std::vector<eot::verify::PropertyResult> results;
  try {
    results = eot::verify::run_suite(args.seed, args.only);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  emit(args.report_path, eot::verify::report_json(args.seed, results));
  bool ok = true;
  for (const auto& r : results) {
    if (!r.pass) {
      ok = false;
      std::cerr << "FAIL " << r.name << ": worst slack " << r.worst_slack << " (" << r.detail << ")\n";
    }
  }
  return ok ? kOk : kFailure;
}

// ---- bridge

struct BridgeArgs {
  double lo = -14, hi = 14, horizon = 1, diffusivity = 0.5;
  long nx = 64, nt = 201, particles = 0;
  std::string mu = "gaussian:-1,0.8";
  std::string nu = "gaussian:1,1";
  std::string potential = "oracle";
  bool waive_margin = false;
  std::uint64_t seed = 42;
  std::string drift_path;
  std::string summary_path;
};

std::function<double(double)> parse_density(const std::string& text) {
  if (text == "uniform") return [](double) { return 1.0; };
  const std::string prefix = "gaussian:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw InputError("density '" + text + "' expects gaussian:mean,sd");
    const double mean = parse_real(rest.substr(0, comma), "gaussian mean");
    const double sd = parse_real(rest.substr(comma + 1), "gaussian sd");
    if (!(sd > 0)) throw InputError("gaussian sd must be positive");
    return [mean, sd](double x) { return std::exp(-0.5 * (x - mean) * (x - mean) / (sd * sd)); };
  }
  throw InputError("density '" + text + "' is not recognised");
}

Vec bridge_potential(const std::string& text, const Inst& inst) {
  if (text == "oracle") return eot::oracle_solve(inst).phi;
  if (text == "zero") return Vec::Zero(inst.m());
  const std::string prefix = "constant:";
  if (text.rfind(prefix, 0) == 0) return Vec::Constant(inst.m(), parse_real(text.substr(prefix.size()), "constant"));
  throw InputError("potential '" + text + "' is not recognised");
}

int cmd_bridge(const BridgeArgs& args) {
  if (args.nx < 2 || args.nt < 2) throw InputError("grid needs at least two nodes in space and time");
  if (!(args.hi > args.lo) || !(args.horizon > 0) || !(args.diffusivity > 0)) {
    throw InputError("grid needs lo < hi and positive horizon and diffusivity");
  }
  if (args.particles < 0) throw InputError("--particles must be nonnegative");
  const eot::SpaceTimeGrid<double> grid(args.lo, args.hi, args.nx, args.horizon, args.nt, args.diffusivity);
  const Inst inst = eot::grid_instance(grid, parse_density(args.mu), parse_density(args.nu));
  const Vec phi = bridge_potential(args.potential, inst);
  eot::DriftField<double> drift = [&] {
    try {
      return eot::bridge_from_potential(phi, inst, grid, !args.waive_margin);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }();

  json summary;
  summary["digest"] = eot::io::instance_digest(inst);
  summary["epsilon"] = inst.epsilon();
  summary["potential"] = args.potential;
  summary["max_abs_drift"] = drift.values.cwiseAbs().maxCoeff();
  int rc = kOk;
  if (args.particles > 0) {
    const auto sim = eot::simulate_em(drift, inst.mu(), args.particles, args.seed);
    const double tv = eot::total_variation(eot::histogram_on_grid(sim.terminal, grid), eot::marginal_y(phi, inst));
    const double tol = 3.0 / std::sqrt(double(args.particles)) + 2 * grid.dx();
    summary["particles"] = args.particles;
    summary["seed"] = args.seed;
    summary["terminal_tv"] = tv;
    summary["tv_tolerance"] = tol;
    summary["clamped"] = sim.clamped;
    if (tv > tol || sim.excessive_clamping()) rc = kFailure;
  }
  if (!args.drift_path.empty()) emit(args.drift_path, eot::io::drift_csv(drift));
  emit(args.summary_path, summary.dump(2) + "\n");
  return rc;
}

// ---- flow

struct FlowArgs {
  InstanceSource source;
  double r = 2, t0 = 0.01, t_end = 50, dt = 1e-3;
  long record_every = 100;
  std::string trace_path;
  std::string summary_path;
};

int cmd_flow(const FlowArgs& args) {
  const Inst inst = args.source.load();
  if (!(args.r >= 2)) throw InputError("--r must be at least 2");
  if (!(args.t0 > 0) || !(args.t_end > args.t0) || !(args.dt > 0)) throw InputError("need 0 < t0 < t_end and dt > 0");
  if (args.record_every < 1) throw InputError("--record-every must be at least 1");
  const Vec star = eot::oracle_solve(inst).phi;
  const auto fr = eot::flow_run(inst, Vec(Vec::Zero(inst.m())), star, args.r, args.t0, args.t_end, args.dt,
                                static_cast<eot::Index>(args.record_every));
  const double v0 = fr.trace.front().v;
  const bool v_ok = fr.worst_v_increase <= 1e-8 * (1 + v0);
  const bool rate_ok = fr.worst_rate_slack >= -eot::kBoundTolerance;

  json summary;
  summary["digest"] = eot::io::instance_digest(inst);
  summary["r"] = args.r;
  summary["kl_start"] = fr.kl_start;
  summary["kl_start_reverse"] = fr.kl_start_reverse;
  summary["worst_v_increase"] = fr.worst_v_increase;
  summary["worst_rate_slack"] = fr.worst_rate_slack;
  summary["worst_rate_slack_reverse"] = fr.worst_rate_slack_reverse;
  summary["worst_average_error"] = fr.worst_average_error;
  summary["worst_mass_drift"] = fr.worst_mass_drift;
  summary["blew_up"] = fr.blew_up;
  summary["last_good_t"] = fr.last_good_t;
  summary["v_nonincreasing"] = v_ok;
  summary["rate_bound"] = rate_ok;
  if (!args.trace_path.empty()) emit(args.trace_path, eot::io::flow_trace_csv(fr));
  emit(args.summary_path, summary.dump(2) + "\n");
  return !fr.blew_up && v_ok && rate_ok ? kOk : kFailure;
}

// ---- validate

struct ValidateArgs {
  InstanceSource source;
  std::string out_path;
};

int cmd_validate(const ValidateArgs& args) {
  const Inst inst = args.source.load();
  json summary;
  summary["digest"] = eot::io::instance_digest(inst);
  summary["n"] = inst.n();
  summary["m"] = inst.m();
  summary["dim"] = inst.mu().dim();
  summary["epsilon"] = inst.epsilon();
  summary["max_abs_cost"] = inst.cost().cwiseAbs().maxCoeff();
  if (!args.out_path.empty()) eot::io::save_instance(inst, args.out_path);
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic optimal transport solvers and diagnostics"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "run a semi-dual solver");
  solve.source.attach(s);
  s->add_option("--method", solve.method, "sinkhorn|eta_sinkhorn|sga|ksga|chi2|sign_sga|proj_sga|proj_sga_pp")
      ->capture_default_str();
  s->add_option("--eta", solve.eta, "step size or auto")->capture_default_str();
  s->add_option("--kernel", solve.kernel, "identity | gaussian:<sigma> | laplace:<scale>");
  s->add_option("--B", solve.bound, "sup-norm radius or auto")->capture_default_str();
  s->add_option("--anchor", solve.anchor, "anchor index or auto")->capture_default_str();
  s->add_option("--max-iter", solve.max_iter)->capture_default_str();
  s->add_option("--tol", solve.tol, "stop when the l1 marginal residual is below")->capture_default_str();
  s->add_option("--record-every", solve.record_every)->capture_default_str();
  s->add_option("--trace", solve.trace_path, "trace CSV path");
  s->add_option("--summary", solve.summary_path, "summary JSON path (stdout if omitted)");
  s->add_flag("--timing", solve.timing, "include wall-clock columns");
  s->add_flag("!--no-reports", solve.reports, "skip the oracle-based bound reports");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "solve to high accuracy by alternating transforms");
  oracle.source.attach(o);
  o->add_option("--tol", oracle.tol)->capture_default_str();
  o->add_option("--max-iter", oracle.max_iter)->capture_default_str();
  o->add_option("--summary", oracle.summary_path);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "run the property suite on seeded instances");
  v->add_option("--seed", verify.seed)->capture_default_str();
  v->add_option("--only", verify.only, "run a single property");
  v->add_option("--report", verify.report_path, "report JSON path (stdout if omitted)");

  BridgeArgs bridge;
  auto* b = app.add_subcommand("bridge", "drift of the dynamic bridge on a 1-D grid");
  b->add_option("--lo", bridge.lo)->capture_default_str();
  b->add_option("--hi", bridge.hi)->capture_default_str();
  b->add_option("--nx", bridge.nx)->capture_default_str();
  b->add_option("--T", bridge.horizon)->capture_default_str();
  b->add_option("--nt", bridge.nt)->capture_default_str();
  b->add_option("--diffusivity", bridge.diffusivity)->capture_default_str();
  b->add_option("--mu", bridge.mu, "uniform | gaussian:mean,sd")->capture_default_str();
  b->add_option("--nu", bridge.nu, "uniform | gaussian:mean,sd")->capture_default_str();
  b->add_option("--potential", bridge.potential, "oracle | zero | constant:V")->capture_default_str();
  b->add_flag("--waive-margin", bridge.waive_margin, "allow mass near the grid ends");
  b->add_option("--particles", bridge.particles, "simulate this many particles")->capture_default_str();
  b->add_option("--seed", bridge.seed)->capture_default_str();
  b->add_option("--drift", bridge.drift_path, "drift CSV path");
  b->add_option("--summary", bridge.summary_path);

  FlowArgs flow;
  auto* f = app.add_subcommand("flow", "integrate the accelerated mirror flow");
  flow.source.attach(f);
  f->add_option("--r", flow.r)->capture_default_str();
  f->add_option("--t0", flow.t0)->capture_default_str();
  f->add_option("--t-end", flow.t_end)->capture_default_str();
  f->add_option("--dt", flow.dt)->capture_default_str();
  f->add_option("--record-every", flow.record_every)->capture_default_str();
  f->add_option("--trace", flow.trace_path);
  f->add_option("--summary", flow.summary_path);

  ValidateArgs validate;
  auto* val = app.add_subcommand("validate", "check an instance and print its digest");
  validate.source.attach(val);
  val->add_option("--out", validate.out_path, "write the instance in canonical form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*o) return cmd_oracle(oracle);
    if (*v) return cmd_verify(verify);
    if (*b) return cmd_bridge(bridge);
    if (*f) return cmd_flow(flow);
    if (*val) return cmd_validate(validate);
  } catch (const eot::AscentViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const eot::NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kInputError;
}
