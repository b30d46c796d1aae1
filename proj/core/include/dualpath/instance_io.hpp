#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dualpath/problem.hpp"

namespace dualpath::io {

/// Tagged descriptor {"kind": ..., params...} for the shipped barriers.
/// Throws Error(kInvalidInstance) for barrier types without a descriptor.
nlohmann::json barrier_to_json(const Barrier& barrier);
BarrierPtr barrier_from_json(const nlohmann::json& j);

/// Problem document: {"m", "b", "blocks": [{"n", "c", "A", "barrier",
/// "E"?, "f"?, "x_start"}]}. Matrices are flat row-major arrays; nested
/// row arrays are accepted on input.
nlohmann::json problem_to_json(const SeparableProblem& problem);

/// Accepts the problem document or the RPC-native {nodes, links,
/// commodities} document, which is translated with rpc::to_problem.
SeparableProblem problem_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

SeparableProblem load_problem(const std::string& path);

}  // namespace dualpath::io
