#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hwnet/error.hpp"
#include "hwnet/prelimit.hpp"

using namespace hwnet;
using doctest::Approx;

namespace {

// Generator from the transition rates of the head-count chain.
double rate_generator(const ScalarField& f, const StaticData& s, const ScaleData& d, const IntVec& x,
                      const IntVec& z) {
  const double rn = std::sqrt(static_cast<double>(d.n));
  const Vec xh = scale_state(d, x);
  const double f0 = f(xh);
  double out = 0.0;
  for (int i = 0; i < s.topology.classes(); ++i) out += d.params.lambda[i] * (f(xh + Vec::Unit(xh.size(), i) / rn) - f0);
  for (int e = 0; e < s.topology.edge_count(); ++e) {
    const int i = s.topology.edge(e).cls;
    out += d.params.mu[e] * static_cast<double>(z[e]) * (f(xh - Vec::Unit(xh.size(), i) / rn) - f0);
  }
  return out;
}

}  // namespace

TEST_CASE("single transitions") {
  const StaticData s = testing::statics("n_network");
  const ScaleData d = at_scale(s, 1, false);
  Rng rng(5);
  // empty system: only arrivals at total rate sum lambda
  double hold = 0.0;
  const int K = 100000;
  for (int k = 0; k < K; ++k) {
    const StepResult r = step_ctmc(s.topology, d.params, {0, 0}, {0, 0, 0}, rng);
    CHECK_FALSE(r.event.kind == Event::Kind::Departure);
    CHECK(r.holding > 0);
    hold += r.holding;
  }
  CHECK(hold / K == Approx(1.0 / d.params.lambda.sum()).epsilon(0.02));

  // x = (0,3) with two class-2 customers in service at pool 1
  const IntVec z{0, 0, 2};
  long departures = 0;
  for (int k = 0; k < K; ++k) {
    const StepResult r = step_ctmc(s.topology, d.params, {0, 3}, z, rng);
    if (r.event.kind == Event::Kind::Departure) {
      ++departures;
      CHECK(r.event.edge == 2);
      CHECK(r.event.cls == 1);
    }
  }
  const double dep_rate = 2.0 * d.params.mu[2];
  const double p = dep_rate / (dep_rate + d.params.lambda.sum());
  CHECK(std::abs(departures / double(K) - p) < 4.0 * std::sqrt(p * (1 - p) / K));
}

TEST_CASE("mean increment at a pinned state matches the rates") {
  const StaticData s = testing::statics("star3");
  const ScaleData d = at_scale(s, 10, false);
  const IntVec x = centered_state(d);
  const Allocation a = max_service_allocation(s.topology, x, d.params.servers);
  Rng rng(9);
  Vec moved = Vec::Zero(3);
  double time = 0.0;
  for (int k = 0; k < 400000; ++k) {
    const StepResult r = step_ctmc(s.topology, d.params, x, a.z, rng);
    moved[r.event.cls] += r.event.kind == Event::Kind::Arrival ? 1.0 : -1.0;
    time += r.holding;
  }
  for (int i = 0; i < 3; ++i) {
    double dep = 0.0;
    for (int e : s.topology.class_edges(i)) dep += d.params.mu[e] * static_cast<double>(a.z[e]);
    const double rate = d.params.lambda[i] - dep;
    CHECK(std::abs(moved[i] / time - rate) <= 3.0 * std::sqrt((d.params.lambda[i] + dep) / time));
  }
}

TEST_CASE("drift at a worked state of the N-network") {
  const StaticData s = testing::statics("n_network");
  const ScaleData d = at_scale(s, 100, true);
  REQUIRE(d.rho == Approx(1.0));
  // x_hat = (1,-2) with pool 2 holding all idleness
  const IntVec x{115, 35}, z{75, 40, 35};
  REQUIRE(is_admissible(s.topology, x, d.params.servers, z));
  const Vec xh = scale_state(d, x);
  CHECK(xh[0] == Approx(1.0));
  CHECK(xh[1] == Approx(-2.0));
  const DriftDecomposition r = prelimit_drift(s, d, xh, scale_allocation(d, z));
  CHECK(r.b[0] == Approx(-0.5));
  CHECK(r.b[1] == Approx(1.5));
  CHECK(r.theta == Approx(0.0));
  CHECK(r.u.us[1] == Approx(1.0));

  // at the centering point the drift is the offset
  const DriftDecomposition c = prelimit_drift(s, d, Vec::Zero(2), Vec::Zero(3));
  CHECK((c.b - d.ell_eff).norm() < 1e-12);
  CHECK_THROWS_AS(prelimit_drift(s, d, xh, scale_allocation(d, {75, 40, 30})), Error);
}

TEST_CASE("generator against the rate oracle") {
  for (const char* name : {"n_network", "star3", "general_tree"}) {
    const StaticData s = testing::statics(name);
    for (bool shifted : {false, true}) {
      const ScaleData d = at_scale(s, 100, shifted);
      const int m = s.topology.classes();
      std::mt19937_64 rng(6);
      const ScalarField f = [](const Vec& v) { return std::exp(0.3 * v.sum()) + v.squaredNorm(); };
      for (int k = 0; k < 200; ++k) {
        IntVec x(m);
        for (int i = 0; i < m; ++i) x[i] = static_cast<long>(rng() % static_cast<unsigned long>(2 * 100 * d.centering.x_bar[i]));
        const Allocation a = max_service_allocation(s.topology, x, d.params.servers);
        const Vec xh = scale_state(d, x), zh = scale_allocation(d, a.z);
        const double direct = rate_generator(f, s, d, x, a.z);
        CHECK(prelimit_generator_apply(f, s, d, xh, zh) == Approx(direct).epsilon(1e-9));
        CHECK(prelimit_generator_apply([](const Vec&) { return 3.0; }, s, d, xh, zh) == Approx(0.0));
        const Vec b = prelimit_drift(s, d, xh, zh).b;
        for (int i = 0; i < m; ++i)
          CHECK(prelimit_generator_apply([i](const Vec& v) { return v[i]; }, s, d, xh, zh) ==
                Approx(b[i]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("simulated paths satisfy balance and the overlap identity") {
  const StaticData s = testing::statics("star3");
  const ScaleData d = at_scale(s, 25, true);
  CtmcOptions opt;
  opt.horizon = 50.0;
  opt.keep_path = true;
  for (const char* policy : {"swc", "lqfs-lb", "constant:0,1,0/0,0,1"}) {
    const CtmcRun run = simulate_ctmc(s, d, parse_policy(policy, s.topology), centered_state(d), opt, 3);
    REQUIRE(run.path);
    const auto& p = *run.path;
    const double rn = 5.0;
    for (size_t k = 0; k < p.states.size(); ++k) {
      const IntVec& x = p.states[k];
      const IntVec& z = p.allocations[k];
      CHECK(is_admissible(s.topology, x, d.params.servers, z));
      if (k > 0) {
        long diff = 0;
        for (size_t i = 0; i < x.size(); ++i) diff += std::abs(x[i] - p.states[k - 1][i]);
        CHECK(diff == 1);
        CHECK(p.times[k] > p.times[k - 1]);
      }
      const Vec xh = scale_state(d, x), zh = scale_allocation(d, z);
      Vec qh = xh, yh = Vec::Zero(3);
      for (int e = 0; e < s.topology.edge_count(); ++e) {
        qh[s.topology.edge(e).cls] -= zh[e];
        yh[s.topology.edge(e).pool] -= zh[e];
      }
      const double theta = static_cast<double>(theta_count(s.topology, x, d.params.servers, z)) / rn;
      CHECK(qh.sum() == Approx(theta + std::max(xh.sum(), 0.0)));
      CHECK(yh.sum() == Approx(theta + std::max(-xh.sum(), 0.0)));
      const DriftDecomposition r = prelimit_drift(s, d, xh, zh);
      CHECK(r.theta == Approx(theta));
      CHECK((r.b - r.b_decomposed).norm() < 1e-9);
    }
  }
}

TEST_CASE("replications are reproducible") {
  const StaticData s = testing::statics("n_network");
  const ScaleData d = at_scale(s, 100, false);
  CtmcOptions opt;
  opt.horizon = 20.0;
  opt.keep_path = true;
  const PolicySpec p = parse_policy("swc", s.topology);
  const CtmcRun a = simulate_ctmc(s, d, p, centered_state(d), opt, replication_seed(4, 2));
  const CtmcRun b = simulate_ctmc(s, d, p, centered_state(d), opt, replication_seed(4, 2));
  const CtmcRun c = simulate_ctmc(s, d, p, centered_state(d), opt, replication_seed(4, 3));
  CHECK(a.path->times == b.path->times);
  CHECK(a.path->states == b.path->states);
  CHECK(a.summary.means == b.summary.means);
  CHECK(a.path->times != c.path->times);
  CHECK(replication_seed(1, 0) != replication_seed(2, 0));
  CHECK(replication_seed(1, 1) != replication_seed(2, 0));
}

TEST_CASE("empty horizon") {
  const StaticData s = testing::statics("n_network");
  const ScaleData d = at_scale(s, 100, false);
  CtmcOptions opt;
  opt.horizon = 0.0;
  const CtmcRun r = simulate_ctmc(s, d, parse_policy("swc", s.topology), centered_state(d), opt, 1);
  CHECK(r.summary.steps == 0);
  CHECK(r.summary.observed_time == 0.0);
}

TEST_CASE("negative spare capacity drifts upward") {
  const StaticData s = testing::statics("n_network_transient");
  const ScaleData d = at_scale(s, 100, false);
  REQUIRE(d.rho < 0);
  CtmcOptions opt;
  opt.horizon = 300.0;
  const CtmcRun r = simulate_ctmc(s, d, parse_policy("swc", s.topology), centered_state(d), opt, 2);
  CHECK(r.summary.final_state.sum() > 5.0);
  CHECK(r.summary.trace_total.back() > r.summary.trace_total.front());
}
