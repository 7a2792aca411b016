#include "eot/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace eot::io {

namespace {

Matrix<double> parse_points(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array() || doc[key].empty()) {
    throw std::invalid_argument(std::string("field '") + key + "' must be a non-empty list of points");
  }
  const json& rows = doc[key];
  const std::size_t dim = rows[0].is_array() ? rows[0].size() : 0;
  if (dim == 0) throw std::invalid_argument(std::string("points in '") + key + "' must be non-empty lists");
  Matrix<double> pts(static_cast<Index>(rows.size()), static_cast<Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != dim) {
      throw std::invalid_argument(std::string("point ") + std::to_string(i) + " in '" + key +
                                  "' has the wrong dimension");
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!rows[i][k].is_number()) throw std::invalid_argument(std::string("non-numeric coordinate in '") + key + "'");
      pts(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k].get<double>();
    }
  }
  return pts;
}

Vector<double> parse_vector(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw std::invalid_argument(std::string("field '") + key + "' must be a list of numbers");
  }
  const json& arr = doc[key];
  Vector<double> v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw std::invalid_argument(std::string("non-numeric entry in '") + key + "'");
    v(static_cast<Index>(i)) = arr[i].get<double>();
  }
  return v;
}

json points_json(const Matrix<double>& pts) {
  json rows = json::array();
  for (Index i = 0; i < pts.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < pts.cols(); ++k) row.push_back(pts(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector<double>& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

Instance<double> parse_instance(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("instance must be an object");
  DiscreteMeasure<double> mu(parse_points(doc, "x_points"), parse_vector(doc, "x_weights"));
  DiscreteMeasure<double> nu(parse_points(doc, "y_points"), parse_vector(doc, "y_weights"));
  if (!doc.contains("epsilon") || !doc["epsilon"].is_number()) {
    throw std::invalid_argument("field 'epsilon' must be a number");
  }
  const double eps = doc["epsilon"].get<double>();
  if (!doc.contains("cost")) throw std::invalid_argument("field 'cost' is missing");
  const json& cost = doc["cost"];
  if (cost.is_string()) {
    const std::string kind = cost.get<std::string>();
    if (kind == "half_sqeuclidean") return Instance<double>(std::move(mu), std::move(nu), CostKind::half_sqeuclidean, eps);
    if (kind == "euclidean") return Instance<double>(std::move(mu), std::move(nu), CostKind::euclidean, eps);
    throw std::invalid_argument("unknown cost kind '" + kind + "'");
  }
  if (!cost.is_array()) throw std::invalid_argument("field 'cost' must be a kind name or a matrix");
  json wrapped = {{"cost", cost}};
  Matrix<double> c = parse_points(wrapped, "cost");
  return Instance<double>(std::move(mu), std::move(nu), std::move(c), eps);
}

Instance<double> load_instance(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  try {
    return parse_instance(doc);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

json instance_to_json(const Instance<double>& inst) {
  json doc;
  doc["x_points"] = points_json(inst.mu().points());
  doc["x_weights"] = vector_json(inst.a());
  doc["y_points"] = points_json(inst.nu().points());
  doc["y_weights"] = vector_json(inst.b());
  if (inst.cost_kind()) {
    doc["cost"] = cost_kind_name(*inst.cost_kind());
  } else {
    doc["cost"] = points_json(inst.cost());
  }
  doc["epsilon"] = inst.epsilon();
  return doc;
}

void save_instance(const Instance<double>& inst, const std::string& path) {
  write_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

std::string instance_digest(const Instance<double>& inst) {
  const std::string canonical = instance_to_json(inst).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

KernelSpec parse_kernel_spec(const std::string& text) {
  if (text == "identity") return IdentityKernel{};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("kernel spec '" + text + "' is not recognised");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (ec != std::errc() || ptr != arg.data() + arg.size() || !(value > 0)) {
    throw std::invalid_argument("kernel bandwidth in '" + text + "' must be a positive number");
  }
  if (kind == "gaussian") return GaussianKernel{value};
  if (kind == "laplace") return LaplaceKernel{value};
  throw std::invalid_argument("kernel spec '" + text + "' is not recognised");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trace_csv(const Trace<double>& trace, bool with_timing) {
  std::string out = "iter,J,l1_residual,mmd_sq,kl_y,elapsed_s\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iter) + ',' + format_double(r.value) + ',' + format_double(r.l1_residual) + ',';
    if (r.mmd_sq) out += format_double(*r.mmd_sq);
    out += ',' + format_double(r.kl_y) + ',';
    if (with_timing) out += format_double(r.elapsed_s);
    out += '\n';
  }
  return out;
}

std::string flow_trace_csv(const FlowRun<double>& run) {
  std::string out = "t,Lk,V\n";
  for (const auto& r : run.trace) out += format_double(r.t) + ',' + format_double(r.lk) + ',' + format_double(r.v) + '\n';
  return out;
}

std::string drift_csv(const DriftField<double>& drift) {
  const auto& g = drift.grid;
  std::string out = "# nx=" + std::to_string(g.nx()) + " nt=" + std::to_string(g.nt()) + " lo=" + format_double(g.lo()) +
                    " hi=" + format_double(g.hi()) + " T=" + format_double(g.horizon()) +
                    " diffusivity=" + format_double(g.diffusivity()) + "\n";
  out += "t";
  for (Index l = 0; l < g.nx(); ++l) out += ',' + format_double(g.x(l));
  out += '\n';
  for (Index k = 0; k < g.nt(); ++k) {
    out += format_double(g.t(k));
    for (Index l = 0; l < g.nx(); ++l) out += ',' + format_double(drift.values(k, l));
    out += '\n';
  }
  return out;
}

json report_to_json(const BoundReport<double>& report) {
  json j;
  j["name"] = report.name;
  j["status"] = status_name(report.status);
  j["pass"] = report.passed();
  j["worst_slack"] = std::isfinite(report.worst_slack) ? json(report.worst_slack) : json(nullptr);
  j["iterations"] = report.iterations;
  j["bound"] = report.bound;
  j["observed"] = report.observed;
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

}  // namespace eot::io
