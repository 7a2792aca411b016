#include "helpers.hpp"

#include "eot/diagnostics.hpp"
#include "eot/semidual.hpp"
#include "eot/solvers.hpp"
#include "eot/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace eot;
using namespace eot::test;

namespace {

// Random instance shape, regularization and potential pair.
struct Case {
  Inst inst;
  Vec phi, bar;
};

Case draw(std::uint64_t seed, double scale) {
  auto rng = stream_for(seed, 900);
  std::uniform_int_distribution<int> size(1, 7);
  std::uniform_real_distribution<double> log_eps(std::log(0.05), std::log(2.0));
  const Index n = size(rng), m = size(rng);
  Inst inst = random_instance<double>(rng, n, m, std::exp(log_eps(rng)), 1 + Index(seed % 3));
  Vec phi = random_potential<double>(rng, m, scale);
  Vec bar = random_potential<double>(rng, m, scale);
  return {std::move(inst), std::move(phi), std::move(bar)};
}

double bregman(const Case& c) {
  return semidual_value(c.bar, c.inst) - semidual_value(c.phi, c.inst) -
         first_variation(c.phi, c.inst).dot(c.bar - c.phi);
}

// E_mu Var of (bar - phi) under rho_t(y | x) ~ b_j exp(phi_j + t (bar_j - phi_j) - c_ij / eps)
double expected_variance(const Case& c, double t) {
  const Vec d = c.bar - c.phi;
  double total = 0;
  for (Index i = 0; i < c.inst.n(); ++i) {
    Vec w(c.inst.m());
    for (Index j = 0; j < c.inst.m(); ++j) {
      w(j) = std::log(c.inst.b()(j)) + c.phi(j) + t * d(j) - c.inst.cost()(i, j) / c.inst.epsilon();
    }
    w = (w.array() - w.maxCoeff()).exp().matrix();
    w /= w.sum();
    const double mean = w.dot(d);
    total += c.inst.a()(i) * w.dot(Vec((d.array() - mean).square().matrix()));
  }
  return total;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("concavity and smoothness inequalities on random pairs") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const Case c = draw(s, 3.0);
      const double br = bregman(c);
      const double sup = (c.bar - c.phi).cwiseAbs().maxCoeff();
      CHECK(br <= 1e-10);
      CHECK(br >= -0.5 * sup * sup - 1e-10);
      const double B = std::max(c.phi.cwiseAbs().maxCoeff(), c.bar.cwiseAbs().maxCoeff());
      const double lambda = std::exp(log_lambda_bound(c.inst, B));
      CHECK(br >= -0.5 * lambda * l2_nu_sq(Vec(c.bar - c.phi), c.inst) - 1e-10);
    }
  }

  TEST_CASE("bregman gap as a weighted variance integral") {
    std::vector<double> nodes, weights;
    verify::gauss_legendre_unit(64, nodes, weights);
    double worst_half = 0;
    for (std::uint64_t s = 0; s < 30; ++s) {
      auto rng = stream_for(s, 901);
      Case c{random_instance<double>(rng, 3, 4, 0.4), random_potential<double>(rng, 4, 2.0),
             random_potential<double>(rng, 4, 2.0)};
      double weighted = 0, plain = 0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double v = expected_variance(c, nodes[q]);
        weighted += weights[q] * (1 - nodes[q]) * v;
        plain += weights[q] * v;
      }
      const double br = bregman(c);
      CHECK(std::abs(br + weighted) <= 1e-6 * std::abs(br));
      worst_half = std::max(worst_half, std::abs(br + 0.5 * plain) / std::abs(br));
    }
    // the constant-weight form -1/2 int Var dt is not an identity
    CHECK(worst_half > 1e-2);
  }

  TEST_CASE("quadrature is exact for polynomials") {
    std::vector<double> nodes, weights;
    verify::gauss_legendre_unit(64, nodes, weights);
    REQUIRE(nodes.size() == 64);
    for (int k : {0, 1, 7, 60, 127}) {
      double s = 0;
      for (std::size_t q = 0; q < nodes.size(); ++q) s += weights[q] * std::pow(nodes[q], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
    verify::gauss_legendre_unit(5, nodes, weights);
    CHECK(nodes.size() == 5);
  }

  TEST_CASE("shift covariance and zero-sum first variation") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const Case c = draw(s, 2.0);
      const double shift = c.bar(0) * 5;
      const Vec shifted = plus_transform(Vec(c.phi.array() + shift), c.inst);
      CHECK(max_abs(shifted - Vec(plus_transform(c.phi, c.inst).array() + shift)) <= 1e-12);
      CHECK(std::abs(first_variation(c.phi, c.inst).sum()) <= 1e-12);
      CHECK(max_abs(marginal_y(c.phi, c.inst) - coupling(c.phi, c.inst).y_marginal()) <= 1e-12);
    }
  }

  TEST_CASE("exp match, gradient ascent and identity-kernel match coincide") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Case c = draw(s, 1.0);
      const double eta = 0.1 + 0.9 * double(s % 10) / 9.0;
      const Vec sga = c.phi + eta * first_variation(c.phi, c.inst);
      const auto id = PhiOperator<double>::exp_kernel(gram<double>(IdentityKernel{}, c.inst.nu().points()));
      CHECK(max_abs(phi_match_step(c.phi, c.inst, PhiOperator<double>::exp(), eta) - sga) <= 1e-12);
      CHECK(max_abs(phi_match_step(c.phi, c.inst, id, eta) - sga) <= 1e-12);
    }
  }

  TEST_CASE("kl is nonnegative and vanishes only on equal inputs") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      auto rng = stream_for(s, 902);
      const Index m = 1 + Index(s % 9);
      const Vec p = dirichlet_weights<double>(rng, m), q = dirichlet_weights<double>(rng, m);
      CHECK(kl(p, q) >= 0);
      CHECK(std::abs(kl(p, p)) <= 1e-12);
    }
  }

  TEST_CASE("verify suite registry") {
    const auto& names = verify::property_names();
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    CHECK(names.size() == 18);
    CHECK_THROWS_AS(verify::run_suite(42, "no_such_property"), std::invalid_argument);
    const auto one = verify::run_suite(42, "momentum_sequence");
    REQUIRE(one.size() == 1);
    CHECK(one[0].pass);
    const auto r1 = verify::report_json(7, verify::run_suite(7, "concavity"));
    const auto r2 = verify::report_json(7, verify::run_suite(7, "concavity"));
    CHECK(r1 == r2);
  }
}
