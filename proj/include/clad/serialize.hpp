#pragma once

#include <string>

#include "json.hpp"

#include "clad/network.hpp"

namespace clad {

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

/// Self-describing container: layer kinds, hyperparameters, and parameter
/// tensors. save -> load -> forward is value-exact.
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

void save_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json_file(const std::string& path);

}  // namespace clad
