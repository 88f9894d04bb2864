#pragma once

#include <optional>
#include <vector>

#include "hwnet/types.hpp"

namespace hwnet {

// Classes and pools are zero-based internally; configs use 1-based labels.
struct Edge {
  int cls;
  int pool;
  friend bool operator==(const Edge&, const Edge&) = default;
};

class Topology {
 public:
  // Validates a raw bipartite graph and returns it with edges in canonical
  // (class, pool) order.
  static Topology validate(int classes, int pools, std::vector<Edge> edges);

  int classes() const { return m_; }
  int pools() const { return J_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  std::optional<int> edge_index(int cls, int pool) const;

  // Incident edge indices, ordered by the opposite endpoint.
  const std::vector<int>& class_edges(int i) const { return class_edges_[i]; }
  const std::vector<int>& pool_edges(int j) const { return pool_edges_[j]; }
  int class_degree(int i) const { return static_cast<int>(class_edges_[i].size()); }
  int pool_degree(int j) const { return static_cast<int>(pool_edges_[j].size()); }

 private:
  int m_ = 0;
  int J_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> class_edges_;
  std::vector<std::vector<int>> pool_edges_;
};

Topology validate_topology(int classes, int pools, std::vector<Edge> edges);

struct LimitParams {
  Vec lambda;  // per class
  Vec mu;      // per edge, canonical order
  Vec nu;      // per pool
  Vec lambda_hat;
  Vec mu_hat;
  Vec nu_hat;
};

// Checks dimensions and first-order positivity.
void validate_params(const Topology& topo, const LimitParams& params);

struct ScaledParams {
  long n = 1;
  Vec lambda;
  Vec mu;
  IntVec servers;
};

ScaledParams params_at_scale(const Topology& topo, const LimitParams& params, long n);

struct NetworkClass {
  bool dominant_pool = false;
  int dominant = -1;  // the non-leaf pool (pool 0 when J = 1)
  bool class_dependent = false;
  bool n_shape = false;  // two classes, two pools, one shared class
  Vec class_rate;        // per-class rate when class_dependent

  enum class Kind { DominantPool, ClassDependent, GeneralTree };
  Kind primary() const {
    if (dominant_pool) return Kind::DominantPool;
    if (class_dependent) return Kind::ClassDependent;
    return Kind::GeneralTree;
  }
};

NetworkClass classify_network(const Topology& topo, const LimitParams& params);

const char* to_string(NetworkClass::Kind kind);

}  // namespace hwnet
