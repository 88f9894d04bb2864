#pragma once

#include <string>

#include "json.hpp"

#include "hwnet/network.hpp"

namespace hwnet {

struct NetworkConfig {
  Topology topology;
  LimitParams params;
  std::string digest;  // FNV-1a of the canonical JSON form
};

// Keys: classes, pools, edges ([[i,j],...], 1-based), lambda, mu ({"i-j": rate}),
// nu, and optional lambda_hat, mu_hat, nu_hat.
NetworkConfig parse_config(const nlohmann::json& doc);
NetworkConfig load_config(const std::string& path);
nlohmann::json to_json(const NetworkConfig& cfg);

std::string fnv1a_hex(const std::string& text);

}  // namespace hwnet
