#pragma once

#include <vector>

namespace hwnet {

// Successive shortest paths with Bellman-Ford queues, so negative arc costs
// are allowed as long as the starting flow leaves no negative residual cycle.
class MinCostFlow {
 public:
  static constexpr long kInfinite = 1L << 50;

  explicit MinCostFlow(int nodes = 0) { reset(nodes); }
  void reset(int nodes);

  // Adds an arc carrying `flow` units initially; returns its id.
  int add_arc(int from, int to, long cap, long cost, long flow = 0);
  long flow(int arc) const { return arcs_[2 * arc + 1].cap; }

  // Augments along cheapest paths until t is unreachable; returns the added flow.
  // Throws Inconsistent when the starting flow has a negative residual cycle.
  long augment(int s, int t);

 private:
  struct Arc {
    int to;
    long cap;
    long cost;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<long> dist_;
  std::vector<int> via_;
  std::vector<char> queued_;
  std::vector<int> queue_;
};

}  // namespace hwnet
