#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hwnet/diffusion.hpp"
#include "hwnet/error.hpp"

using namespace hwnet;
using doctest::Approx;

namespace {

Vec random_simplex(int d, std::mt19937_64& rng) {
  std::exponential_distribution<double> ex;
  Vec u(d);
  for (auto& v : u) v = ex(rng);
  return u / u.sum();
}

Vec random_point(int m, std::mt19937_64& rng, double scale = 3.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vec x(m);
  for (auto& v : x) v = g(rng);
  return x;
}

}  // namespace

TEST_CASE("drift at a worked state of the N-network") {
  const StaticData s = testing::statics("n_network");
  const ControlPoint u{Vec{{0.3, 0.7}}, Vec{{0.0, 1.0}}};
  const Vec b = drift(s, Vec{{1.0, -2.0}}, u, true);
  CHECK(b[0] == Approx(-0.5));
  CHECK(b[1] == Approx(1.5));
  for (const auto& v : vertex_controls(2, 2)) CHECK((drift(s, Vec::Zero(2), v, false) - s.ell).norm() < 1e-14);
}

TEST_CASE("class-dependent drift ignores the idleness split") {
  const StaticData s = testing::statics("star3");
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vec x = random_point(3, rng);
    const ControlPoint u{random_simplex(3, rng), random_simplex(3, rng)};
    const ControlPoint v{u.uc, random_simplex(3, rng)};
    const Vec b = drift(s, x, u, false);
    CHECK((b - drift(s, x, v, false)).norm() < 1e-12);
    const double pos = std::max(x.sum(), 0.0);
    for (int i = 0; i < 3; ++i) {
      const double mu_i = s.params.mu[s.topology.class_edges(i).front()];
      CHECK(b[i] == Approx(s.ell[i] - mu_i * (x[i] - u.uc[i] * pos)));
    }
  }
}

TEST_CASE("drift forms agree on random trees") {
  std::mt19937_64 rng(2);
  int closed = 0;
  for (int t = 0; t < 60; ++t) {
    auto tree = testing::random_tree(1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 4), rng);
    if (t % 3 == 0)
      for (int i = 0; i < tree.topology.classes(); ++i)
        for (int e : tree.topology.class_edges(i)) tree.params.mu[e] = 0.5 + 0.25 * i;
    // keep the parameters critically loaded after the edit
    tree.params.lambda.setZero();
    for (int e = 0; e < tree.topology.edge_count(); ++e)
      tree.params.lambda[tree.topology.edge(e).cls] +=
          tree.params.mu[e] * tree.xi[e] * tree.params.nu[tree.topology.edge(e).pool];
    const StaticData s = compute_statics(tree.topology, tree.params);
    const int m = s.topology.classes(), J = s.topology.pools();
    for (int k = 0; k < 10000 / 60; ++k) {
      const Vec x = random_point(m, rng);
      const ControlPoint u{random_simplex(m, rng), random_simplex(J, rng)};
      for (bool centered : {false, true}) {
        const Vec b = drift_phi_form(s, x, u, centered);
        CHECK((drift_matrix_form(s, x, u, centered) - b).lpNorm<Eigen::Infinity>() < 1e-10 * (1 + x.norm()));
        if (auto c = drift_closed_form(s, x, u, centered)) {
          ++closed;
          CHECK((*c - b).lpNorm<Eigen::Infinity>() < 1e-10 * (1 + x.norm()));
        }
      }
    }
  }
  CHECK(closed > 0);
}

TEST_CASE("drift is affine in the control and maximized at vertices") {
  for (const char* name : {"n_network", "star3", "general_tree"}) {
    const StaticData s = testing::statics(name);
    const int m = s.topology.classes(), J = s.topology.pools();
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      const Vec x = random_point(m, rng), g = random_point(m, rng, 1.0);
      const ControlPoint u{random_simplex(m, rng), random_simplex(J, rng)};
      const ControlPoint v{random_simplex(m, rng), random_simplex(J, rng)};
      const ControlPoint mid{(u.uc + v.uc) / 2, (u.us + v.us) / 2};
      CHECK((drift(s, x, mid, true) - (drift(s, x, u, true) + drift(s, x, v, true)) / 2).norm() < 1e-10);

      double vertex_max = -INFINITY;
      for (const auto& w : vertex_controls(m, J)) vertex_max = std::max(vertex_max, drift(s, x, w, true).dot(g));
      for (int r = 0; r < 500; ++r) {
        const ControlPoint w{random_simplex(m, rng), random_simplex(J, rng)};
        CHECK(drift(s, x, w, true).dot(g) <= vertex_max + 1e-10);
      }
    }
  }
}

TEST_CASE("generator on polynomials and the transience test function") {
  const StaticData s = testing::statics("n_network_transient");
  std::mt19937_64 rng(4);
  const Vec a = diffusion_diag(s);
  const Vec w = s.drift.b1.transpose().partialPivLu().solve(Vec::Ones(2));
  for (int k = 0; k < 100; ++k) {
    const Vec x = random_point(2, rng);
    const ControlPoint u{random_simplex(2, rng), random_simplex(2, rng)};
    const Vec b = drift(s, x, u, false);
    for (int i = 0; i < 2; ++i) {
      const TestFunction lin{[i](const Vec& v) { return v[i]; }, {}, {}};
      CHECK(generator_apply(lin, x, u, s, false) == Approx(b[i]).epsilon(1e-6));
      const TestFunction sq{[i](const Vec& v) { return v[i] * v[i]; }, {}, {}};
      CHECK(generator_apply(sq, x, u, s, false) == Approx(2 * s.params.lambda[i] + 2 * x[i] * b[i]).epsilon(1e-5));
    }
    const double beta = 0.1;
    const TestFunction h{[&](const Vec& v) { return std::tanh(beta * w.dot(v)); },
                         [&](const Vec& v) {
                           const double c = std::cosh(beta * w.dot(v));
                           return Vec(beta * w / (c * c));
                         },
                         [&](const Vec& v) {
                           const double sw = beta * w.dot(v), c = std::cosh(sw);
                           return Mat(-2 * beta * beta * std::tanh(sw) / (c * c) * w * w.transpose());
                         }};
    const double sw = beta * w.dot(x), sech2 = 1.0 / (std::cosh(sw) * std::cosh(sw));
    double quad = 0.0;
    for (int i = 0; i < 2; ++i) quad += 2 * s.params.lambda[i] * w[i] * w[i];
    const double expected = beta * sech2 * (b.dot(w) - beta * std::tanh(sw) * quad);
    CHECK(std::abs(generator_apply(h, x, u, s, false) - expected) < 1e-10);
  }
  CHECK(a[0] == Approx(3.0));
}

TEST_CASE("degenerate and Ornstein-Uhlenbeck paths") {
  const DriftField zero = [](const Vec&, Vec& b, double& w) {
    b.setZero();
    w = 1.0;
  };
  SdeOptions opt;
  opt.horizon = 10.0;
  opt.step = 0.01;
  const Vec x0{{0.5, -1.5}};
  CHECK((simulate_sde(zero, Vec::Zero(2), x0, opt, 1).summary.final_state - x0).norm() == 0.0);

  // dx = -mu x dt + sqrt(2 lambda) dW has stationary variance lambda / mu
  const double lambda = 1.0, mu = 1.0;
  const DriftField ou = [&](const Vec& x, Vec& b, double& w) {
    b = -mu * x;
    w = 1.0;
  };
  opt.horizon = 1e4;
  opt.burn_in = 10.0;
  double second = 0.0;
  const int reps = 4;
  for (int r = 0; r < reps; ++r) {
    const SdeRun run = simulate_sde(ou, Vec::Constant(1, std::sqrt(2 * lambda)), Vec::Zero(1), opt, replication_seed(7, r));
    second += run.summary.means[kPositiveSquare] + run.summary.means[kNegativeSquare];
  }
  CHECK(second / reps == Approx(lambda / mu).epsilon(0.02));

  opt.step = 0.0;
  CHECK_THROWS_AS(simulate_sde(ou, Vec::Ones(1), Vec::Zero(1), opt, 1), Error);
}

TEST_CASE("halving the step stays within the Monte Carlo error") {
  const StaticData s = testing::statics("n_network");
  const MarkovControl u = make_control("constant:1,0/1,0", s);
  auto estimate = [&](double h) {
    SdeOptions opt;
    opt.horizon = 2000.0;
    opt.step = h;
    const auto runs = simulate_sde_replications(s, u, true, Vec::Zero(2), opt, 4, 11);
    std::vector<std::vector<double>> groups;
    for (const auto& r : runs) groups.push_back(r.summary.batches[kNegativePart]);
    return batch_estimate(groups);
  };
  const Estimate a = estimate(0.02), b = estimate(0.01);
  CHECK(std::abs(a.mean - b.mean) <= std::hypot(a.half_width(), b.half_width()));
}

TEST_CASE("class-dependent idleness matches the spare capacity") {
  const StaticData s = testing::statics("star3");
  SdeOptions opt;
  opt.horizon = 3000.0;
  opt.step = 0.01;
  const auto runs = simulate_sde_replications(s, make_control("constant:0,0,1/0,1,0", s), false, Vec::Zero(3), opt, 4, 5);
  std::vector<std::vector<double>> groups;
  for (const auto& r : runs) groups.push_back(r.summary.batches[kWeightedIdle]);
  CHECK(batch_estimate(groups).mean == Approx(s.rho).epsilon(0.1));
}

TEST_CASE("control catalog") {
  const StaticData s = testing::statics("n_network");
  const MarkovControl mimic = make_control("mimic-swc", s);
  CHECK(mimic(Vec{{3.0, -1.0}}).uc[0] == 1.0);
  CHECK(mimic(Vec{{-3.0, 1.0}}).uc[1] == 1.0);
  const MarkovControl cells = make_control("random-cells:4", s);
  const ControlPoint& c = cells(Vec{{0.2, 0.3}});
  CHECK(&c == &cells(Vec{{0.7, 0.9}}));
  CHECK_THROWS_AS(make_control("bang-bang", s), Error);
  CHECK(default_step(s) == Approx(0.005));
}
