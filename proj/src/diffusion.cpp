#include "hwnet/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "hwnet/error.hpp"
#include "hwnet/parallel.hpp"

namespace hwnet {

Vec drift_offset(const StaticData& s, bool centered) {
  if (!centered) return s.ell;
  const int m = s.topology.classes();
  return -(s.rho / m) * (s.drift.b1 * Vec::Ones(m));
}

Vec drift_phi_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered) {
  const double sum = x.sum();
  const double pos = std::max(sum, 0.0), neg = std::max(-sum, 0.0);
  const Vec phi = s.phi.apply(x - pos * u.uc, -neg * u.us);
  Vec b = drift_offset(s, centered);
  for (int e = 0; e < s.topology.edge_count(); ++e) b[s.topology.edge(e).cls] -= s.params.mu[e] * phi[e];
  return b;
}

Vec drift_matrix_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered) {
  const double sum = x.sum();
  const double pos = std::max(sum, 0.0), neg = std::max(-sum, 0.0);
  return drift_offset(s, centered) - s.drift.b1 * (x - pos * u.uc) + s.drift.b2 * u.us * neg;
}

std::optional<Vec> drift_closed_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered) {
  const auto& topo = s.topology;
  const auto& nc = s.network_class;
  const double sum = x.sum();
  const double pos = std::max(sum, 0.0), neg = std::max(-sum, 0.0);
  Vec b = drift_offset(s, centered);
  if (nc.dominant_pool) {
    const int d = nc.dominant;
    for (int i = 0; i < topo.classes(); ++i) {
      const double mu_d = s.params.mu[*topo.edge_index(i, d)];
      b[i] -= mu_d * (x[i] - u.uc[i] * pos);
      for (int e : topo.class_edges(i)) {
        const int j = topo.edge(e).pool;
        if (j != d) b[i] += (s.params.mu[e] - mu_d) * u.us[j] * neg;
      }
    }
    return b;
  }
  if (nc.class_dependent) {
    for (int i = 0; i < topo.classes(); ++i) b[i] -= nc.class_rate[i] * (x[i] - u.uc[i] * pos);
    return b;
  }
  return std::nullopt;
}

Vec drift(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered) {
  const Vec b = drift_phi_form(s, x, u, centered);
  const double tol = 1e-10 * (1.0 + b.lpNorm<Eigen::Infinity>() + x.lpNorm<Eigen::Infinity>());
  if ((drift_matrix_form(s, x, u, centered) - b).lpNorm<Eigen::Infinity>() > tol)
    throw Error(ErrorCode::Inconsistent, "matrix form of the drift disagrees with the map form");
  if (auto c = drift_closed_form(s, x, u, centered); c && (*c - b).lpNorm<Eigen::Infinity>() > tol)
    throw Error(ErrorCode::Inconsistent, "closed form of the drift disagrees with the map form");
  return b;
}

Vec diffusion_diag(const StaticData& s) { return 2.0 * s.params.lambda; }

double generator_apply(const TestFunction& f, const Vec& x, const Vec& b, const Vec& a_diag) {
  const int m = static_cast<int>(x.size());
  Vec grad(m);
  Vec hdiag(m);
  if (f.gradient) {
    grad = f.gradient(x);
  } else {
    Vec p = x;
    for (int i = 0; i < m; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(x[i]));
      p[i] = x[i] + h;
      const double up = f.value(p);
      p[i] = x[i] - h;
      const double down = f.value(p);
      p[i] = x[i];
      grad[i] = (up - down) / (2 * h);
    }
  }
  if (f.hessian) {
    hdiag = f.hessian(x).diagonal();
  } else {
    Vec p = x;
    const double f0 = f.value(x);
    for (int i = 0; i < m; ++i) {
      const double h = 1e-4 * (1.0 + std::abs(x[i]));
      p[i] = x[i] + h;
      const double up = f.value(p);
      p[i] = x[i] - h;
      const double down = f.value(p);
      p[i] = x[i];
      hdiag[i] = (up - 2 * f0 + down) / (h * h);
    }
  }
  return 0.5 * a_diag.dot(hdiag) + b.dot(grad);
}

double generator_apply(const TestFunction& f, const Vec& x, const ControlPoint& u, const StaticData& s,
                       bool centered) {
  return generator_apply(f, x, drift(s, x, u, centered), diffusion_diag(s));
}

MarkovControl make_control(std::string_view spec, const StaticData& s) {
  const int m = s.topology.classes(), J = s.topology.pools();
  if (spec.substr(0, 9) == "constant:") {
    auto u = std::make_shared<ControlPoint>(parse_control_point(spec.substr(9), m, J));
    return [u](const Vec&) -> const ControlPoint& { return *u; };
  }
  auto vertices = std::make_shared<std::vector<ControlPoint>>(vertex_controls(m, J));
  if (spec == "mimic-swc") {
    // Queue at the class holding the most mass, idleness kept in the basis pool.
    const int jb = s.drift.dropped_pool;
    return [vertices, J, jb](const Vec& x) -> const ControlPoint& {
      Eigen::Index i = 0;
      x.maxCoeff(&i);
      return (*vertices)[static_cast<size_t>(i) * J + jb];
    };
  }
  if (spec.substr(0, 13) == "random-cells:") {
    const std::uint64_t seed = std::stoull(std::string(spec.substr(13)));
    return [vertices, seed](const Vec& x) -> const ControlPoint& {
      std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
      for (int i = 0; i < x.size(); ++i) {
        h ^= static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x[i]))) + 0x9e3779b97f4a7c15ULL +
             (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
      }
      return (*vertices)[h % vertices->size()];
    };
  }
  throw Error(ErrorCode::InvalidInput, "unknown control '" + std::string(spec) + "'");
}

double default_step(const StaticData& s) { return 0.01 / s.params.mu.maxCoeff(); }

SdeRun simulate_sde(const DriftField& field, const Vec& sigma, const Vec& x0, const SdeOptions& opt,
                    std::uint64_t seed) {
  const int m = static_cast<int>(x0.size());
  if (!(opt.step > 0)) throw Error(ErrorCode::InvalidInput, "step must be positive");
  if (opt.horizon < opt.step) throw Error(ErrorCode::InvalidInput, "horizon shorter than one step");

  SummaryOptions so;
  so.horizon = opt.horizon;
  so.burn_in = opt.burn_in < 0 ? 0.2 * opt.horizon : opt.burn_in;
  so.batches = opt.batches;
  so.tail_radii = opt.tail_radii;
  so.trace_interval = opt.trace_interval;
  SummaryBuilder summary(m, so);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double h = opt.step, rh = std::sqrt(h);
  const long steps = static_cast<long>(std::floor(opt.horizon / h + 1e-9));

  SdeRun run;
  if (opt.keep_path) {
    run.path.emplace();
    run.path->seed = seed;
  }
  Vec x = x0, b(m);
  double max_move = 0.0;
  bool blew_up = false;
  long k = 0;
  for (; k < steps; ++k) {
    const double t = k * h;
    double weight = 1.0;
    field(x, b, weight);
    const double sum = x.sum();
    const double neg = std::max(-sum, 0.0);
    summary.hold(x, neg, weight * neg, false, t, t + h);
    summary.trace(sum, t, t + h);
    if (run.path) {
      run.path->times.push_back(t);
      run.path->states.push_back(x);
    }
    max_move = std::max(max_move, h * b.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < m; ++i) x[i] += b[i] * h + sigma[i] * rh * normal(rng);
    if (!std::isfinite(x.sum()) || x.lpNorm<1>() > 1e6) {
      blew_up = true;
      ++k;
      break;
    }
  }
  run.summary = summary.finish(seed, k, x);
  run.summary.max_drift_step = max_move;
  run.summary.step_warning = max_move > 0.5;
  run.summary.transience_suspected = blew_up;
  return run;
}

SdeRun simulate_sde(const StaticData& s, const MarkovControl& control, bool centered, const Vec& x0,
                    const SdeOptions& opt, std::uint64_t seed) {
  const Vec w = idle_weights(s.drift);
  DriftField field = [&](const Vec& x, Vec& b, double& weight) {
    const ControlPoint& u = control(x);
    b = drift_matrix_form(s, x, u, centered);
    weight = w.dot(u.us);
  };
  const Vec sigma = diffusion_diag(s).cwiseSqrt();
  SdeOptions o = opt;
  if (!(o.step > 0)) o.step = default_step(s);
  return simulate_sde(field, sigma, x0, o, seed);
}

std::vector<SdeRun> simulate_sde_replications(const StaticData& s, const MarkovControl& control, bool centered,
                                              const Vec& x0, const SdeOptions& opt, int reps,
                                              std::uint64_t master_seed) {
  std::vector<SdeRun> runs(std::max(reps, 0));
  parallel_for(static_cast<int>(runs.size()), [&](int r) { runs[r] = simulate_sde(s, control, centered, x0, opt, replication_seed(master_seed, r)); });
  return runs;
}

}  // namespace hwnet
