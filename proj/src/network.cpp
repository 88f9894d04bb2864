#include "hwnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hwnet/error.hpp"

namespace hwnet {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

Topology Topology::validate(int classes, int pools, std::vector<Edge> edges) {
  if (classes < 1 || pools < 1)
    throw Error(ErrorCode::InvalidInput, "need at least one class and one pool");
  for (const auto& e : edges) {
    if (e.cls < 0 || e.cls >= classes || e.pool < 0 || e.pool >= pools)
      throw Error(ErrorCode::InvalidInput,
                  "edge (" + std::to_string(e.cls + 1) + "," + std::to_string(e.pool + 1) +
                      ") out of range");
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.cls != b.cls ? a.cls < b.cls : a.pool < b.pool;
  });

  Topology t;
  t.m_ = classes;
  t.J_ = pools;
  t.class_edges_.assign(classes, {});
  t.pool_edges_.assign(pools, {});
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    t.class_edges_[edges[k].cls].push_back(k);
    t.pool_edges_[edges[k].pool].push_back(k);
  }
  for (int i = 0; i < classes; ++i)
    if (t.class_edges_[i].empty())
      throw Error(ErrorCode::EmptyStar, "class " + std::to_string(i + 1) + " has no pool");
  for (int j = 0; j < pools; ++j)
    if (t.pool_edges_[j].empty())
      throw Error(ErrorCode::EmptyStar, "pool " + std::to_string(j + 1) + " has no class");

  UnionFind uf(classes + pools);
  for (const auto& e : edges) {
    if (!uf.unite(e.cls, classes + e.pool))
      throw Error(ErrorCode::NotATree, "cycle through edge (" + std::to_string(e.cls + 1) +
                                           "," + std::to_string(e.pool + 1) + ")");
  }
  if (static_cast<int>(edges.size()) != classes + pools - 1)
    throw Error(ErrorCode::NotATree, "graph is disconnected");

  t.edges_ = std::move(edges);
  return t;
}

std::optional<int> Topology::edge_index(int cls, int pool) const {
  if (cls < 0 || cls >= m_) return std::nullopt;
  for (int e : class_edges_[cls])
    if (edges_[e].pool == pool) return e;
  return std::nullopt;
}

Topology validate_topology(int classes, int pools, std::vector<Edge> edges) {
  return Topology::validate(classes, pools, std::move(edges));
}

void validate_params(const Topology& topo, const LimitParams& p) {
  const int m = topo.classes(), J = topo.pools(), E = topo.edge_count();
  auto check_size = [](const Vec& v, int n, const char* name) {
    if (v.size() != n)
      throw Error(ErrorCode::InvalidInput, std::string(name) + " has wrong length");
  };
  check_size(p.lambda, m, "lambda");
  check_size(p.mu, E, "mu");
  check_size(p.nu, J, "nu");
  check_size(p.lambda_hat, m, "lambda_hat");
  check_size(p.mu_hat, E, "mu_hat");
  check_size(p.nu_hat, J, "nu_hat");
  if ((p.lambda.array() <= 0).any()) throw Error(ErrorCode::InvalidInput, "lambda must be positive");
  if ((p.mu.array() <= 0).any()) throw Error(ErrorCode::InvalidInput, "mu must be positive on edges");
  if ((p.nu.array() <= 0).any()) throw Error(ErrorCode::InvalidInput, "nu must be positive");
}

ScaledParams params_at_scale(const Topology& topo, const LimitParams& p, long n) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "scale index must be >= 1");
  validate_params(topo, p);
  const double nd = static_cast<double>(n);
  const double rn = std::sqrt(nd);
  ScaledParams s;
  s.n = n;
  s.lambda = nd * p.lambda + rn * p.lambda_hat;
  s.mu = p.mu + p.mu_hat / rn;
  s.servers.resize(topo.pools());
  for (int j = 0; j < topo.pools(); ++j)
    s.servers[j] = static_cast<long>(std::floor(nd * p.nu[j] + rn * p.nu_hat[j] + 0.5));

  if ((s.lambda.array() <= 0).any())
    throw Error(ErrorCode::NonpositiveRate, "arrival rate nonpositive at n=" + std::to_string(n));
  if ((s.mu.array() <= 0).any())
    throw Error(ErrorCode::NonpositiveRate, "service rate nonpositive at n=" + std::to_string(n));
  for (long N : s.servers)
    if (N < 1)
      throw Error(ErrorCode::NonpositiveRate, "pool without servers at n=" + std::to_string(n));
  return s;
}

NetworkClass classify_network(const Topology& topo, const LimitParams& p) {
  NetworkClass c;
  const int J = topo.pools();
  int non_leaf = 0, last = -1;
  for (int j = 0; j < J; ++j)
    if (topo.pool_degree(j) >= 2) {
      ++non_leaf;
      last = j;
    }
  if (J == 1) {
    c.dominant_pool = true;
    c.dominant = 0;
  } else if (non_leaf == 1) {
    c.dominant_pool = true;
    c.dominant = last;
  }

  c.class_dependent = true;
  c.class_rate = Vec::Zero(topo.classes());
  for (int i = 0; i < topo.classes(); ++i) {
    const auto& es = topo.class_edges(i);
    const double r = p.mu[es.front()];
    c.class_rate[i] = r;
    for (int e : es)
      if (std::abs(p.mu[e] - r) > 1e-12 * std::max(1.0, std::abs(r))) c.class_dependent = false;
  }
  if (!c.class_dependent) c.class_rate.resize(0);

  c.n_shape = topo.classes() == 2 && J == 2;
  return c;
}

const char* to_string(NetworkClass::Kind kind) {
  switch (kind) {
    case NetworkClass::Kind::DominantPool: return "DominantPool";
    case NetworkClass::Kind::ClassDependent: return "ClassDependent";
    case NetworkClass::Kind::GeneralTree: return "GeneralTree";
  }
  return "GeneralTree";
}

}  // namespace hwnet
