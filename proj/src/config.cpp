#include "hwnet/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "hwnet/error.hpp"

namespace hwnet {

namespace {

using nlohmann::json;

std::string edge_key(const Edge& e) {
  return std::to_string(e.cls + 1) + "-" + std::to_string(e.pool + 1);
}

Vec read_vector(const json& doc, const char* key, int n, bool required) {
  if (!doc.contains(key)) {
    if (required) throw Error(ErrorCode::InvalidInput, std::string("missing key '") + key + "'");
    return Vec::Zero(n);
  }
  const auto& arr = doc.at(key);
  if (!arr.is_array() || static_cast<int>(arr.size()) != n)
    throw Error(ErrorCode::InvalidInput,
                std::string("'") + key + "' must be an array of length " + std::to_string(n));
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = arr[k].get<double>();
  return v;
}

Vec read_edge_map(const json& doc, const char* key, const Topology& topo, bool required) {
  Vec v = Vec::Zero(topo.edge_count());
  if (!doc.contains(key)) {
    if (required) throw Error(ErrorCode::InvalidInput, std::string("missing key '") + key + "'");
    return v;
  }
  const auto& map = doc.at(key);
  if (!map.is_object())
    throw Error(ErrorCode::InvalidInput, std::string("'") + key + "' must map \"i-j\" to numbers");
  std::vector<bool> seen(topo.edge_count(), false);
  for (auto it = map.begin(); it != map.end(); ++it) {
    int i = 0, j = 0;
    if (std::sscanf(it.key().c_str(), "%d-%d", &i, &j) != 2)
      throw Error(ErrorCode::InvalidInput, "bad edge key '" + it.key() + "'");
    auto e = topo.edge_index(i - 1, j - 1);
    if (!e) throw Error(ErrorCode::InvalidInput, "'" + it.key() + "' is not an edge");
    v[*e] = it.value().get<double>();
    seen[*e] = true;
  }
  if (required)
    for (int e = 0; e < topo.edge_count(); ++e)
      if (!seen[e])
        throw Error(ErrorCode::InvalidInput,
                    std::string("'") + key + "' lacks edge " + edge_key(topo.edge(e)));
  return v;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NetworkConfig parse_config(const json& doc) {
  try {
    const int m = doc.at("classes").get<int>();
    const int J = doc.at("pools").get<int>();
    std::vector<Edge> edges;
    for (const auto& pair : doc.at("edges")) {
      if (!pair.is_array() || pair.size() != 2)
        throw Error(ErrorCode::InvalidInput, "edges must be [class, pool] pairs");
      edges.push_back({pair[0].get<int>() - 1, pair[1].get<int>() - 1});
    }
    Topology topo = Topology::validate(m, J, std::move(edges));

    LimitParams p;
    p.lambda = read_vector(doc, "lambda", m, true);
    p.nu = read_vector(doc, "nu", J, true);
    p.mu = read_edge_map(doc, "mu", topo, true);
    p.lambda_hat = read_vector(doc, "lambda_hat", m, false);
    p.nu_hat = read_vector(doc, "nu_hat", J, false);
    p.mu_hat = read_edge_map(doc, "mu_hat", topo, false);
    validate_params(topo, p);

    NetworkConfig cfg{std::move(topo), std::move(p), {}};
    cfg.digest = fnv1a_hex(to_json(cfg).dump());
    return cfg;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + ex.what());
  }
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, path + ": " + ex.what());
  }
  return parse_config(doc);
}

json to_json(const NetworkConfig& cfg) {
  const auto& t = cfg.topology;
  const auto& p = cfg.params;
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json edges = json::array(), mu = json::object(), mu_hat = json::object();
  for (int e = 0; e < t.edge_count(); ++e) {
    edges.push_back({t.edge(e).cls + 1, t.edge(e).pool + 1});
    mu[edge_key(t.edge(e))] = p.mu[e];
    mu_hat[edge_key(t.edge(e))] = p.mu_hat[e];
  }
  return json{{"classes", t.classes()},         {"pools", t.pools()},
              {"edges", edges},                 {"lambda", vec(p.lambda)},
              {"mu", mu},                       {"nu", vec(p.nu)},
              {"lambda_hat", vec(p.lambda_hat)}, {"mu_hat", mu_hat},
              {"nu_hat", vec(p.nu_hat)}};
}

}  // namespace hwnet
