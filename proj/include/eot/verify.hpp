#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eot::verify {

struct PropertyResult {
  std::string name;
  bool pass = true;
  double worst_slack = 0;  // min(bound - observed); negative means violated
  std::string detail;
};

const std::vector<std::string>& property_names();

/// Runs every property (or just `only`) on instances generated from seed.
std::vector<PropertyResult> run_suite(std::uint64_t seed, const std::string& only = "");

/// Deterministic JSON report.
std::string report_json(std::uint64_t seed, const std::vector<PropertyResult>& results);

/// Nodes and weights of n-point Gauss-Legendre quadrature on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace eot::verify
