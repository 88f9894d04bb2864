#include "hwnet/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hwnet/error.hpp"

namespace hwnet {

namespace {

bool is_canonical_n(const Topology& topo) {
  if (topo.classes() != 2 || topo.pools() != 2 || topo.edge_count() != 3) return false;
  return topo.edge(0) == Edge{0, 0} && topo.edge(1) == Edge{0, 1} && topo.edge(2) == Edge{1, 0};
}

long row_sum(const Topology& topo, const IntVec& z, int i) {
  long s = 0;
  for (int e : topo.class_edges(i)) s += z[e];
  return s;
}

long col_sum(const Topology& topo, const IntVec& z, int j) {
  long s = 0;
  for (int e : topo.pool_edges(j)) s += z[e];
  return s;
}

// Largest feasible allocation below z, trimming the last incident edges first.
void project_below(const Topology& topo, const IntVec& x, const IntVec& servers, IntVec& z) {
  for (int i = 0; i < topo.classes(); ++i) {
    long excess = row_sum(topo, z, i) - x[i];
    const auto& es = topo.class_edges(i);
    for (auto it = es.rbegin(); it != es.rend() && excess > 0; ++it) {
      const long d = std::min(excess, z[*it]);
      z[*it] -= d;
      excess -= d;
    }
  }
  for (int j = 0; j < topo.pools(); ++j) {
    long excess = col_sum(topo, z, j) - servers[j];
    const auto& es = topo.pool_edges(j);
    for (auto it = es.rbegin(); it != es.rend() && excess > 0; ++it) {
      const long d = std::min(excess, z[*it]);
      z[*it] -= d;
      excess -= d;
    }
  }
}

// Least flexible classes first, pools by index.
IntVec greedy_allocation(const Topology& topo, const IntVec& x, const IntVec& servers) {
  std::vector<int> order(topo.classes());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return topo.class_degree(a) < topo.class_degree(b); });
  IntVec z(topo.edge_count(), 0);
  IntVec left = servers;
  for (int i : order) {
    long want = x[i];
    for (int e : topo.class_edges(i)) {
      const int j = topo.edge(e).pool;
      const long take = std::min(want, left[j]);
      z[e] = take;
      want -= take;
      left[j] -= take;
    }
  }
  return z;
}

// Fills every edge whose class queues while its pool idles.
void fill_work_conserving(const Topology& topo, const IntVec& x, const IntVec& servers, IntVec& z) {
  IntVec q = queue_lengths(topo, x, z);
  IntVec y = idle_servers(topo, servers, z);
  for (int e = 0; e < topo.edge_count(); ++e) {
    const Edge& ed = topo.edge(e);
    const long add = std::min(q[ed.cls], y[ed.pool]);
    z[e] += add;
    q[ed.cls] -= add;
    y[ed.pool] -= add;
  }
}

Allocation priority_n(const IntVec& x, const IntVec& N) {
  Allocation a{IntVec(3, 0)};
  a.z[2] = std::min(x[1], N[0]);
  a.z[1] = std::min(x[0], N[1]);
  a.z[0] = std::min(x[0] - a.z[1], N[0] - a.z[2]);
  return a;
}

// Freed servers in pool j take from the longest eligible queue.
void lqfs_serve_pool(const Topology& topo, const IntVec& x, const IntVec& servers, IntVec& z, int j) {
  long idle = servers[j] - col_sum(topo, z, j);
  while (idle > 0) {
    int best = -1;
    long best_q = 0;
    for (int e : topo.pool_edges(j)) {
      const int i = topo.edge(e).cls;
      const long q = x[i] - row_sum(topo, z, i);
      if (q > best_q) {
        best_q = q;
        best = e;
      }
    }
    if (best < 0) break;
    ++z[best];
    --idle;
  }
}

Allocation constant_control(const StaticData& s, const ScaleData& d, const ControlPoint& u,
                            const IntVec& x) {
  const auto& topo = s.topology;
  const auto& N = d.params.servers;
  const double nd = static_cast<double>(d.n);
  const double rn = std::sqrt(nd);
  const Vec xh = scale_state(d, x);
  const double sx = xh.sum();
  const double pos = std::max(sx, 0.0), neg = std::max(-sx, 0.0);
  const Vec zh = s.phi.apply(xh - pos * u.uc, -neg * u.us);
  const Vec target = nd * d.centering.z_bar + rn * zh;

  IntVec z(topo.edge_count(), 0);
  for (int j = 0; j < topo.pools(); ++j) {
    const auto& es = topo.pool_edges(j);
    double total = 0.0;
    for (int e : es) total += std::max(target[e], 0.0);
    const long goal = std::clamp(static_cast<long>(std::floor(total + 0.5)), 0L, N[j]);
    long have = 0;
    std::vector<std::pair<double, int>> frac;
    for (int e : es) {
      const double v = std::max(target[e], 0.0);
      z[e] = static_cast<long>(std::floor(v));
      have += z[e];
      frac.push_back({v - std::floor(v), e});
    }
    std::stable_sort(frac.begin(), frac.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (size_t k = 0; have < goal; k = (k + 1) % frac.size(), ++have) ++z[frac[k].second];
    while (have > goal) {
      int big = es.front();
      for (int e : es)
        if (z[e] > z[big]) big = e;
      --z[big];
      --have;
    }
  }
  for (int i = 0; i < topo.classes(); ++i) {
    long excess = row_sum(topo, z, i) - x[i];
    while (excess > 0) {
      int big = topo.class_edges(i).front();
      for (int e : topo.class_edges(i))
        if (z[e] > z[big]) big = e;
      --z[big];
      --excess;
    }
  }
  fill_work_conserving(topo, x, N, z);
  return Allocation{std::move(z)};
}

}  // namespace

IntVec queue_lengths(const Topology& topo, const IntVec& x, const IntVec& z) {
  IntVec q(x.begin(), x.end());
  for (int e = 0; e < topo.edge_count(); ++e) q[topo.edge(e).cls] -= z[e];
  return q;
}

IntVec idle_servers(const Topology& topo, const IntVec& servers, const IntVec& z) {
  IntVec y(servers.begin(), servers.end());
  for (int e = 0; e < topo.edge_count(); ++e) y[topo.edge(e).pool] -= z[e];
  return y;
}

bool is_admissible(const Topology& topo, const IntVec& x, const IntVec& servers, const IntVec& z) {
  if (static_cast<int>(z.size()) != topo.edge_count()) return false;
  for (long v : z)
    if (v < 0) return false;
  const IntVec q = queue_lengths(topo, x, z);
  const IntVec y = idle_servers(topo, servers, z);
  for (long v : q)
    if (v < 0) return false;
  for (long v : y)
    if (v < 0) return false;
  for (const Edge& e : topo.edges())
    if (q[e.cls] > 0 && y[e.pool] > 0) return false;
  return true;
}

long theta_count(const Topology& topo, const IntVec& x, const IntVec& servers, const IntVec& z) {
  const IntVec q = queue_lengths(topo, x, z);
  const IntVec y = idle_servers(topo, servers, z);
  return std::min(std::accumulate(q.begin(), q.end(), 0L), std::accumulate(y.begin(), y.end(), 0L));
}

Allocation SwcSolver::solve(const IntVec& x, const IntVec& servers, const Allocation* prev) {
  const Topology& topo = *topo_;
  const int m = topo.classes(), J = topo.pools(), E = topo.edge_count();
  IntVec z, cap;
  if (prev) {
    cap = prev->z;
    z = prev->z;
    project_below(topo, x, servers, z);
  } else {
    z = greedy_allocation(topo, x, servers);
    cap = z;
  }
  const IntVec q = queue_lengths(topo, x, z);
  const IntVec y = idle_servers(topo, servers, z);
  if (std::accumulate(q.begin(), q.end(), 0L) == 0 || std::accumulate(y.begin(), y.end(), 0L) == 0)
    return Allocation{std::move(z)};

  const int src = 0, sink = m + J + 1;
  flow_.reset(m + J + 2);
  for (int i = 0; i < m; ++i) flow_.add_arc(src, 1 + i, x[i], 0, x[i] - q[i]);
  std::vector<std::pair<int, int>> arcs(E);
  for (int e = 0; e < E; ++e) {
    const int from = 1 + topo.edge(e).cls, to = 1 + m + topo.edge(e).pool;
    arcs[e].first = flow_.add_arc(from, to, cap[e], -1, z[e]);
    arcs[e].second = flow_.add_arc(from, to, MinCostFlow::kInfinite, 1, 0);
  }
  for (int j = 0; j < J; ++j) flow_.add_arc(1 + m + j, sink, servers[j], 0, servers[j] - y[j]);
  flow_.augment(src, sink);
  for (int e = 0; e < E; ++e) z[e] = flow_.flow(arcs[e].first) + flow_.flow(arcs[e].second);
  return Allocation{std::move(z)};
}

Allocation max_service_allocation(const Topology& topo, const IntVec& x, const IntVec& servers,
                                  const Allocation* prev) {
  for (long v : x)
    if (v < 0) throw Error(ErrorCode::InvalidInput, "negative head count");
  SwcSolver solver(topo);
  return solver.solve(x, servers, prev);
}

Vec scale_state(const ScaleData& d, const IntVec& x) {
  const double nd = static_cast<double>(d.n), rn = std::sqrt(nd);
  Vec v(x.size());
  for (size_t i = 0; i < x.size(); ++i) v[i] = (static_cast<double>(x[i]) - nd * d.centering.x_bar[i]) / rn;
  return v;
}

Vec scale_allocation(const ScaleData& d, const IntVec& z) {
  const double nd = static_cast<double>(d.n), rn = std::sqrt(nd);
  Vec v(z.size());
  for (size_t e = 0; e < z.size(); ++e) v[e] = (static_cast<double>(z[e]) - nd * d.centering.z_bar[e]) / rn;
  return v;
}

namespace {

IntVec to_lattice(const Vec& hat, const Vec& bar, long n, ErrorCode code, const char* what) {
  const double nd = static_cast<double>(n), rn = std::sqrt(nd);
  IntVec out(hat.size());
  for (int k = 0; k < hat.size(); ++k) {
    const double v = nd * bar[k] + rn * hat[k];
    const double r = std::floor(v + 0.5);
    if (std::abs(v - r) > 1e-6 * (1.0 + std::abs(v)) || r < 0)
      throw Error(code, std::string(what) + " is not a lattice point of the n-th system");
    out[k] = static_cast<long>(r);
  }
  return out;
}

}  // namespace

IntVec unscale_state(const ScaleData& d, const Vec& x_hat) {
  return to_lattice(x_hat, d.centering.x_bar, d.n, ErrorCode::InvalidInput, "state");
}

IntVec unscale_allocation(const ScaleData& d, const Vec& z_hat) {
  return to_lattice(z_hat, d.centering.z_bar, d.n, ErrorCode::InfeasibleAction, "allocation");
}

double theta_hat(const Topology& topo, const ScaleData& d, const Vec& x_hat, const Vec& z_hat) {
  const IntVec x = unscale_state(d, x_hat);
  const IntVec z = unscale_allocation(d, z_hat);
  if (!is_admissible(topo, x, d.params.servers, z))
    throw Error(ErrorCode::InfeasibleAction, "allocation violates balance or work conservation");
  return static_cast<double>(theta_count(topo, x, d.params.servers, z)) / std::sqrt(static_cast<double>(d.n));
}

double theta_star(const Topology& topo, const ScaleData& d, const Vec& x_hat) {
  const IntVec x = unscale_state(d, x_hat);
  const Allocation a = max_service_allocation(topo, x, d.params.servers);
  return static_cast<double>(theta_count(topo, x, d.params.servers, a.z)) /
         std::sqrt(static_cast<double>(d.n));
}

PolicySpec parse_policy(std::string_view text, const Topology& topo) {
  PolicySpec p;
  if (text == "swc") {
    p.kind = PolicyKind::Swc;
  } else if (text == "swc-fresh") {
    p.kind = PolicyKind::Swc;
    p.tie_break = TieBreak::Fresh;
  } else if (text == "priority-n") {
    p.kind = PolicyKind::StaticPriorityN;
    if (!is_canonical_n(topo))
      throw Error(ErrorCode::PolicyTopologyMismatch,
                  "priority-n needs edges (1,1),(1,2),(2,1) on two classes and two pools");
  } else if (text == "lqfs-lb") {
    p.kind = PolicyKind::Lqfslb;
  } else if (text.substr(0, 9) == "constant:") {
    p.kind = PolicyKind::ConstantControl;
    p.control = parse_control_point(text.substr(9), topo.classes(), topo.pools());
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown policy '" + std::string(text) + "'");
  }
  return p;
}

std::string describe(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::Swc: return spec.tie_break == TieBreak::Fresh ? "swc-fresh" : "swc";
    case PolicyKind::StaticPriorityN: return "priority-n";
    case PolicyKind::Lqfslb: return "lqfs-lb";
    case PolicyKind::ConstantControl: {
      std::ostringstream os;
      os << "constant:";
      for (int i = 0; i < spec.control.uc.size(); ++i) os << (i ? "," : "") << spec.control.uc[i];
      os << "/";
      for (int j = 0; j < spec.control.us.size(); ++j) os << (j ? "," : "") << spec.control.us[j];
      return os.str();
    }
  }
  return "unknown";
}

Allocation apply_policy(const PolicySpec& spec, const StaticData& s, const ScaleData& d,
                        const IntVec& x, const Allocation* prev) {
  const auto& topo = s.topology;
  const auto& N = d.params.servers;
  for (long v : x)
    if (v < 0) throw Error(ErrorCode::InvalidInput, "negative head count");
  switch (spec.kind) {
    case PolicyKind::Swc:
      return max_service_allocation(topo, x, N, spec.tie_break == TieBreak::MinDeviation ? prev : nullptr);
    case PolicyKind::StaticPriorityN:
      if (!is_canonical_n(topo))
        throw Error(ErrorCode::PolicyTopologyMismatch, "priority-n applies to the N-network only");
      return priority_n(x, N);
    case PolicyKind::Lqfslb: {
      IntVec z = prev ? prev->z : IntVec(topo.edge_count(), 0);
      project_below(topo, x, N, z);
      for (int j = 0; j < topo.pools(); ++j) lqfs_serve_pool(topo, x, N, z, j);
      return Allocation{std::move(z)};
    }
    case PolicyKind::ConstantControl:
      validate_control(spec.control, topo.classes(), topo.pools());
      return constant_control(s, d, spec.control, x);
  }
  throw Error(ErrorCode::InvalidInput, "unknown policy kind");
}

PolicyRunner::PolicyRunner(const PolicySpec& spec, const StaticData& s, const ScaleData& d)
    : spec_(spec), s_(&s), d_(&d), swc_(s.topology) {
  if (spec.kind == PolicyKind::StaticPriorityN && !is_canonical_n(s.topology))
    throw Error(ErrorCode::PolicyTopologyMismatch, "priority-n applies to the N-network only");
  if (spec.kind == PolicyKind::ConstantControl)
    validate_control(spec.control, s.topology.classes(), s.topology.pools());
}

void PolicyRunner::initial(const IntVec& x, IntVec& z) { z = apply_policy(spec_, *s_, *d_, x, nullptr).z; }

void PolicyRunner::after_event(const IntVec& x, IntVec& z, const Event& ev) {
  const auto& topo = s_->topology;
  const auto& N = d_->params.servers;
  if (ev.kind == Event::Kind::Departure) --z[ev.edge];
  switch (spec_.kind) {
    case PolicyKind::Swc:
      if (spec_.tie_break == TieBreak::Fresh) {
        z = swc_.solve(x, N, nullptr).z;
      } else {
        scratch_.z = z;
        z = swc_.solve(x, N, &scratch_).z;
      }
      return;
    case PolicyKind::StaticPriorityN:
      z = priority_n(x, N).z;
      return;
    case PolicyKind::ConstantControl:
      z = constant_control(*s_, *d_, spec_.control, x).z;
      return;
    case PolicyKind::Lqfslb:
      if (ev.kind == Event::Kind::Arrival) {
        int best = -1;
        long best_idle = 0;
        for (int e : topo.class_edges(ev.cls)) {
          const int j = topo.edge(e).pool;
          const long idle = N[j] - col_sum(topo, z, j);
          if (idle > best_idle) {
            best_idle = idle;
            best = e;
          }
        }
        if (best >= 0) ++z[best];
      } else {
        lqfs_serve_pool(topo, x, N, z, topo.edge(ev.edge).pool);
      }
      return;
  }
}

}  // namespace hwnet
