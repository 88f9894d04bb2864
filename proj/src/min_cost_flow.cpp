#include "hwnet/min_cost_flow.hpp"

#include <algorithm>
#include <limits>

#include "hwnet/error.hpp"

namespace hwnet {

void MinCostFlow::reset(int nodes) {
  arcs_.clear();
  adj_.assign(nodes, {});
  dist_.assign(nodes, 0);
  via_.assign(nodes, -1);
  queued_.assign(nodes, 0);
}

int MinCostFlow::add_arc(int from, int to, long cap, long cost, long flow) {
  const int id = static_cast<int>(arcs_.size() / 2);
  adj_[from].push_back(static_cast<int>(arcs_.size()));
  arcs_.push_back({to, cap - flow, cost});
  adj_[to].push_back(static_cast<int>(arcs_.size()));
  arcs_.push_back({from, flow, -cost});
  return id;
}

long MinCostFlow::augment(int s, int t) {
  constexpr long kUnreached = std::numeric_limits<long>::max();
  long total = 0;
  while (true) {
    std::fill(dist_.begin(), dist_.end(), kUnreached);
    std::fill(via_.begin(), via_.end(), -1);
    queue_.clear();
    dist_[s] = 0;
    queue_.push_back(s);
    const std::size_t budget = adj_.size() * arcs_.size() + 1;
    queued_[s] = 1;
    for (size_t head = 0; head < queue_.size(); ++head) {
      if (head > budget) throw Error(ErrorCode::Inconsistent, "negative residual cycle in the starting flow");
      const int v = queue_[head];
      queued_[v] = 0;
      for (int a : adj_[v]) {
        const Arc& arc = arcs_[a];
        if (arc.cap <= 0) continue;
        const long d = dist_[v] + arc.cost;
        if (d < dist_[arc.to]) {
          dist_[arc.to] = d;
          via_[arc.to] = a;
          if (!queued_[arc.to]) {
            queued_[arc.to] = 1;
            queue_.push_back(arc.to);
          }
        }
      }
    }
    std::fill(queued_.begin(), queued_.end(), 0);
    if (dist_[t] == kUnreached) break;

    long push = kInfinite;
    for (int v = t; v != s; v = arcs_[via_[v] ^ 1].to) push = std::min(push, arcs_[via_[v]].cap);
    for (int v = t; v != s; v = arcs_[via_[v] ^ 1].to) {
      arcs_[via_[v]].cap -= push;
      arcs_[via_[v] ^ 1].cap += push;
    }
    total += push;
  }
  return total;
}

}  // namespace hwnet
