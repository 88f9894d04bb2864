#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hwnet/error.hpp"
#include "hwnet/lyapunov.hpp"
#include "hwnet/policies.hpp"

using namespace hwnet;
using doctest::Approx;

namespace {

// N-network with two servers in pool 1 and one in pool 2 at n = 1.
StaticData small_n() {
  const Topology t = Topology::validate(2, 2, {{0, 0}, {1, 0}, {0, 1}});
  LimitParams p;
  p.lambda = Vec{{3.0, 1.0}};
  p.mu = Vec{{1.0, 2.0, 1.0}};
  p.nu = Vec{{2.0, 1.0}};
  p.lambda_hat = Vec::Zero(2);
  p.mu_hat = Vec::Zero(3);
  p.nu_hat = Vec::Zero(2);
  return compute_statics(t, p);
}

// Minimum theta over every admissible allocation, by enumeration.
long brute_theta(const Topology& topo, const IntVec& x, const IntVec& N) {
  long best = -1;
  IntVec z(3);
  for (z[0] = 0; z[0] <= N[0]; ++z[0])
    for (z[1] = 0; z[1] <= N[1]; ++z[1])
      for (z[2] = 0; z[2] <= N[0]; ++z[2]) {
        if (!is_admissible(topo, x, N, z)) continue;
        const long t = theta_count(topo, x, N, z);
        if (best < 0 || t < best) best = t;
      }
  return best;
}

}  // namespace

TEST_CASE("max service allocation on the small N-network") {
  const StaticData s = small_n();
  const ScaleData d = at_scale(s, 1, false);
  REQUIRE(d.params.servers == IntVec{2, 1});
  const auto& topo = s.topology;

  const Allocation a = max_service_allocation(topo, {0, 3}, d.params.servers);
  CHECK(a.z == IntVec{0, 0, 2});
  CHECK(queue_lengths(topo, {0, 3}, a.z) == IntVec{0, 1});
  CHECK(idle_servers(topo, d.params.servers, a.z) == IntVec{0, 1});
  CHECK(theta_count(topo, {0, 3}, d.params.servers, a.z) == 1);
  CHECK(theta_star(topo, d, scale_state(d, {0, 3})) == Approx(1.0));

  const Allocation b = max_service_allocation(topo, {3, 1}, d.params.servers);
  CHECK(b.z == IntVec{1, 1, 1});
  CHECK(queue_lengths(topo, {3, 1}, b.z) == IntVec{1, 0});
  CHECK(idle_servers(topo, d.params.servers, b.z) == IntVec{0, 0});

  CHECK(max_service_allocation(topo, {0, 0}, d.params.servers).z == IntVec{0, 0, 0});
  CHECK_THROWS_AS(max_service_allocation(topo, {-1, 0}, d.params.servers), Error);
}

TEST_CASE("theta scales with one over root n") {
  const StaticData s = testing::statics("n_network");
  for (long n : {100L, 400L}) {
    const ScaleData d = at_scale(s, n, false);
    const auto& N = d.params.servers;
    // only class 2 present: it fills pool 1 and pool 2 idles
    const IntVec x{0, 3 * N[0]};
    const double expected = static_cast<double>(std::min(x[1] - N[0], N[1])) / std::sqrt(double(n));
    CHECK(theta_star(s.topology, d, scale_state(d, x)) == Approx(expected));
  }
}

TEST_CASE("swc matches exhaustive minimization") {
  const StaticData s = small_n();
  const IntVec N{2, 1};
  const auto& topo = s.topology;
  for (long a = 0; a <= 6; ++a)
    for (long b = 0; a + b <= 6; ++b) {
      const IntVec x{a, b};
      const Allocation z = max_service_allocation(topo, x, N);
      CHECK(is_admissible(topo, x, N, z.z));
      CHECK(theta_count(topo, x, N, z.z) == brute_theta(topo, x, N));
      // the warm start must reach the same value from any admissible previous allocation
      Allocation prev{IntVec{std::min(a, 2L), 0, 0}};
      const Allocation w = max_service_allocation(topo, x, N, &prev);
      CHECK(theta_count(topo, x, N, w.z) == brute_theta(topo, x, N));
    }
}

TEST_CASE("warm start keeps the previous allocation when it stays optimal") {
  const StaticData s = testing::statics("star3");
  const ScaleData d = at_scale(s, 100, false);
  const auto& topo = s.topology;
  std::mt19937_64 rng(4);
  Allocation prev = max_service_allocation(topo, centered_state(d), d.params.servers);
  IntVec x = centered_state(d);
  long moved = 0;
  for (int k = 0; k < 2000; ++k) {
    const int i = static_cast<int>(rng() % 3);
    if (rng() % 2 || x[i] == 0) ++x[i];
    else --x[i];
    const Allocation next = max_service_allocation(topo, x, d.params.servers, &prev);
    CHECK(is_admissible(topo, x, d.params.servers, next.z));
    const Allocation fresh = max_service_allocation(topo, x, d.params.servers);
    CHECK(theta_count(topo, x, d.params.servers, next.z) == theta_count(topo, x, d.params.servers, fresh.z));
    for (int e = 0; e < topo.edge_count(); ++e) moved += std::abs(next.z[e] - prev.z[e]);
    prev = next;
  }
  // one event changes the allocation by a bounded amount
  CHECK(moved <= 2000L * 2 * topo.edge_count());
}

TEST_CASE("static priority on the N-network") {
  const StaticData s = small_n();
  const ScaleData d = at_scale(s, 1, false);
  const PolicySpec p = parse_policy("priority-n", s.topology);
  CHECK(apply_policy(p, s, d, {3, 1}, nullptr).z == IntVec{1, 1, 1});
  CHECK(apply_policy(p, s, d, {0, 3}, nullptr).z == IntVec{0, 0, 2});
  CHECK(apply_policy(p, s, d, {1, 0}, nullptr).z == IntVec{0, 1, 0});
}

TEST_CASE("every policy returns admissible allocations") {
  for (const char* name : {"n_network", "star3", "general_tree", "v_model"}) {
    const StaticData s = testing::statics(name);
    const ScaleData d = at_scale(s, 100, true);
    const int m = s.topology.classes(), J = s.topology.pools();
    std::vector<std::string> policies{"swc", "swc-fresh", "lqfs-lb"};
    std::string uc = "constant:", us;
    for (int i = 0; i < m; ++i) uc += i ? ",0" : "1";
    for (int j = 0; j < J; ++j) us += j ? ",0" : "1";
    policies.push_back(uc + "/" + us);
    if (std::string(name) == "n_network") policies.push_back("priority-n");
    std::mt19937_64 rng(8);
    for (const auto& text : policies) {
      const PolicySpec p = parse_policy(text, s.topology);
      CHECK(describe(p) == text);
      Allocation prev = apply_policy(p, s, d, centered_state(d), nullptr);
      for (int k = 0; k < 300; ++k) {
        IntVec x(m);
        for (int i = 0; i < m; ++i) x[i] = static_cast<long>(rng() % static_cast<unsigned long>(2 * 100 * d.centering.x_bar[i] + 1));
        const Allocation a = apply_policy(p, s, d, x, &prev);
        CHECK(is_admissible(s.topology, x, d.params.servers, a.z));
        prev = a;
      }
    }
  }
}

TEST_CASE("constant control follows its target at large n") {
  const StaticData s = testing::statics("n_network");
  const long n = 10000;
  const ScaleData d = at_scale(s, n, true);
  const PolicySpec p = parse_policy("constant:1,0/1,0", s.topology);
  const double rn = 100.0;
  for (Vec xh : {Vec{{0.7, -1.9}}, Vec{{2.0, 1.5}}, Vec{{-0.4, 0.1}}}) {
    IntVec x(2);
    for (int i = 0; i < 2; ++i) x[i] = std::lround(n * d.centering.x_bar[i] + rn * xh[i]);
    const Vec x_hat = scale_state(d, x);
    const double sum = x_hat.sum();
    const Vec target = s.phi.apply(x_hat - std::max(sum, 0.0) * Vec::Unit(2, 0), -std::max(-sum, 0.0) * Vec::Unit(2, 0));
    const Vec z_hat = scale_allocation(d, apply_policy(p, s, d, x, nullptr).z);
    CHECK((z_hat - target).lpNorm<Eigen::Infinity>() <= 3.0 / rn);
  }
}

TEST_CASE("idleness-queueing overlap stays below the parameter bound") {
  for (const char* name : {"n_network", "star3"}) {
    const StaticData s = testing::statics(name);
    for (long n : {25L, 100L}) {
      const ScaleData d = at_scale(s, n, true);
      const double kappa = kappa_and_n0(s, n).kappa;
      std::mt19937_64 rng(static_cast<unsigned long>(n));
      for (int k = 0; k < 2000; ++k) {
        IntVec x(s.topology.classes());
        for (size_t i = 0; i < x.size(); ++i)
          x[i] = static_cast<long>(rng() % static_cast<unsigned long>(2 * n * d.centering.x_bar[i] + 1));
        const Vec xh = scale_state(d, x);
        const double bound = kappa * std::min(xh.cwiseMax(0.0).sum(), (-xh).cwiseMax(0.0).sum());
        CHECK(theta_star(s.topology, d, xh) <= bound + 1e-9);
      }
    }
  }
}

TEST_CASE("no idleness when servers are saturated") {
  const StaticData s = testing::statics("star3");
  const ScaleData d = at_scale(s, 100, false);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    IntVec x(3);
    for (auto& v : x) v = static_cast<long>(rng() % 400);
    const Allocation a = max_service_allocation(s.topology, x, d.params.servers);
    const IntVec y = idle_servers(s.topology, d.params.servers, a.z);
    const IntVec q = queue_lengths(s.topology, x, a.z);
    // each class reaches a pool of its own so saturation is always possible
    if (x[0] >= d.params.servers[0] && x[1] >= d.params.servers[1] && x[2] >= d.params.servers[2])
      CHECK(std::accumulate(y.begin(), y.end(), 0L) == 0);
    CHECK(std::min(std::accumulate(q.begin(), q.end(), 0L), std::accumulate(y.begin(), y.end(), 0L)) ==
          theta_count(s.topology, x, d.params.servers, a.z));
  }
}

TEST_CASE("theta is invariant under relabeling") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 5), J = 1 + static_cast<int>(rng() % 4);
    const auto t = testing::random_tree(m, J, rng);
    std::vector<int> pc(m), pp(J);
    std::iota(pc.begin(), pc.end(), 0);
    std::iota(pp.begin(), pp.end(), 0);
    std::shuffle(pc.begin(), pc.end(), rng);
    std::shuffle(pp.begin(), pp.end(), rng);
    std::vector<Edge> edges;
    for (const auto& e : t.topology.edges()) edges.push_back({pc[e.cls], pp[e.pool]});
    const Topology r = Topology::validate(m, J, edges);
    for (int k = 0; k < 20; ++k) {
      IntVec x(m), N(J), xr(m), Nr(J);
      for (int i = 0; i < m; ++i) xr[pc[i]] = x[i] = static_cast<long>(rng() % 30);
      for (int j = 0; j < J; ++j) Nr[pp[j]] = N[j] = 1 + static_cast<long>(rng() % 20);
      const long a = theta_count(t.topology, x, N, max_service_allocation(t.topology, x, N).z);
      const long b = theta_count(r, xr, Nr, max_service_allocation(r, xr, Nr).z);
      CHECK(a == b);
    }
  }
}

TEST_CASE("policy parsing") {
  const StaticData n = testing::statics("n_network");
  const StaticData star = testing::statics("star3");
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Inconsistent;
  };
  CHECK(parse_policy("swc-fresh", n.topology).tie_break == TieBreak::Fresh);
  CHECK(code([&] { parse_policy("priority-n", star.topology); }) == ErrorCode::PolicyTopologyMismatch);
  CHECK(code([&] { parse_policy("fifo", n.topology); }) == ErrorCode::InvalidInput);
  CHECK(code([&] { parse_policy("constant:1,0/1", n.topology); }) == ErrorCode::InvalidInput);
  CHECK(code([&] { parse_policy("constant:0.5,0.6/1,0", n.topology); }) == ErrorCode::InvalidInput);
  const PolicySpec c = parse_policy("constant:0.25,0.75/0,1", n.topology);
  CHECK(c.control.uc[1] == Approx(0.75));
  CHECK(c.control.us[1] == Approx(1.0));
}
