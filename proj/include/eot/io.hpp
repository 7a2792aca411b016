#pragma once

#include "eot/bridge.hpp"
#include "eot/diagnostics.hpp"
#include "eot/kernels.hpp"
#include "eot/measures.hpp"
#include "eot/mirrorflow.hpp"
#include "eot/solvers.hpp"

#include <json.hpp>

#include <string>

namespace eot::io {

using json = nlohmann::json;

Instance<double> parse_instance(const json& doc);
Instance<double> load_instance(const std::string& path);
json instance_to_json(const Instance<double>& inst);
void save_instance(const Instance<double>& inst, const std::string& path);

/// Hex FNV-1a hash of the canonical serialization.
std::string instance_digest(const Instance<double>& inst);

/// `identity`, `gaussian:<sigma>`, `laplace:<scale>`
KernelSpec parse_kernel_spec(const std::string& text);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Writes to a sibling temporary file, then renames over path.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Columns iter,J,l1_residual,mmd_sq,kl_y,elapsed_s; elapsed_s stays empty unless with_timing.
std::string trace_csv(const Trace<double>& trace, bool with_timing);
std::string flow_trace_csv(const FlowRun<double>& run);
/// Metadata comment line, header of node positions, then one row per time node.
std::string drift_csv(const DriftField<double>& drift);

json report_to_json(const BoundReport<double>& report);

}  // namespace eot::io
