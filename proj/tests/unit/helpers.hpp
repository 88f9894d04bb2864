#pragma once

#include <algorithm>
#include <random>
#include <string>

#include "hwnet/config.hpp"
#include "hwnet/statics.hpp"

namespace testing {

inline hwnet::NetworkConfig config(const std::string& name) {
  return hwnet::load_config(std::string(HWNET_CONFIG_DIR) + "/" + name + ".json");
}

inline hwnet::StaticData statics(const std::string& name) {
  const auto cfg = config(name);
  return hwnet::compute_statics(cfg.topology, cfg.params);
}

// Random bipartite tree with parameters built from a positive fluid split, so
// that complete resource pooling holds by construction.
struct RandomTree {
  hwnet::Topology topology;
  hwnet::LimitParams params;
  hwnet::Vec xi;
};

inline RandomTree random_tree(int m, int J, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  std::vector<hwnet::Edge> edges{{0, 0}};
  std::vector<int> classes{0}, pools{0};
  std::vector<std::pair<bool, int>> pending;
  for (int i = 1; i < m; ++i) pending.push_back({true, i});
  for (int j = 1; j < J; ++j) pending.push_back({false, j});
  std::shuffle(pending.begin(), pending.end(), rng);
  for (auto [is_class, id] : pending) {
    if (is_class) {
      const int j = pools[rng() % pools.size()];
      edges.push_back({id, j});
      classes.push_back(id);
    } else {
      const int i = classes[rng() % classes.size()];
      edges.push_back({i, id});
      pools.push_back(id);
    }
  }
  RandomTree t{hwnet::Topology::validate(m, J, edges), {}, {}};
  const auto& topo = t.topology;
  const int E = topo.edge_count();
  t.xi.resize(E);
  for (int j = 0; j < J; ++j) {
    double total = 0.0;
    for (int e : topo.pool_edges(j)) total += (t.xi[e] = unif(rng));
    for (int e : topo.pool_edges(j)) t.xi[e] /= total;
  }
  auto& p = t.params;
  p.mu.resize(E);
  p.nu.resize(J);
  for (int e = 0; e < E; ++e) p.mu[e] = unif(rng);
  for (int j = 0; j < J; ++j) p.nu[j] = unif(rng);
  p.lambda = hwnet::Vec::Zero(m);
  for (int e = 0; e < E; ++e) p.lambda[topo.edge(e).cls] += p.mu[e] * t.xi[e] * p.nu[topo.edge(e).pool];
  p.lambda_hat = hwnet::Vec::Zero(m);
  p.mu_hat = hwnet::Vec::Zero(E);
  p.nu_hat = hwnet::Vec::Zero(J);
  for (int j = 0; j < J; ++j) p.nu_hat[j] = unif(rng) - 1.0;
  return t;
}

}  // namespace testing
