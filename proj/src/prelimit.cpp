#include "hwnet/prelimit.hpp"

#include <algorithm>
#include <cmath>

#include "hwnet/error.hpp"
#include "hwnet/parallel.hpp"

namespace hwnet {

namespace {

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace

StepResult step_ctmc(const Topology& topo, const ScaledParams& sp, const IntVec& x, const IntVec& z, Rng& rng) {
  (void)x;
  const int m = topo.classes();
  double total = sp.lambda.sum();
  for (int e = 0; e < topo.edge_count(); ++e) total += sp.mu[e] * static_cast<double>(z[e]);

  StepResult r;
  r.holding = -std::log1p(-uniform01(rng)) / total;
  double pick = uniform01(rng) * total;
  for (int i = 0; i < m; ++i) {
    pick -= sp.lambda[i];
    if (pick < 0) {
      r.event = {Event::Kind::Arrival, i, -1};
      return r;
    }
  }
  int last = -1;
  for (int e = 0; e < topo.edge_count(); ++e) {
    if (z[e] <= 0) continue;
    last = e;
    pick -= sp.mu[e] * static_cast<double>(z[e]);
    if (pick < 0) break;
  }
  if (last < 0) {
    r.event = {Event::Kind::Arrival, m - 1, -1};
    return r;
  }
  r.event = {Event::Kind::Departure, topo.edge(last).cls, last};
  return r;
}

void apply_event(const Topology& topo, IntVec& x, const Event& ev) {
  (void)topo;
  if (ev.kind == Event::Kind::Arrival) ++x[ev.cls];
  else --x[ev.cls];
}

Vec idle_weights(const DriftMatrices& d) {
  const int J = static_cast<int>(d.b2.cols());
  Vec w(J);
  for (int j = 0; j < J; ++j) w[j] = 1.0 + d.solve_b1(d.b2.col(j)).sum();
  return w;
}

IntVec centered_state(const ScaleData& d) {
  IntVec x(d.centering.x_bar.size());
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = std::max(0L, static_cast<long>(std::floor(static_cast<double>(d.n) * d.centering.x_bar[i] + 0.5)));
  return x;
}

CtmcRun simulate_ctmc(const StaticData& s, const ScaleData& d, const PolicySpec& policy, const IntVec& x0,
                      const CtmcOptions& opt, std::uint64_t seed) {
  const auto& topo = s.topology;
  const int m = topo.classes(), J = topo.pools(), E = topo.edge_count();
  const auto& N = d.params.servers;
  if (static_cast<int>(x0.size()) != m) throw Error(ErrorCode::InvalidInput, "initial state has wrong length");
  for (long v : x0)
    if (v < 0) throw Error(ErrorCode::InvalidInput, "negative head count");
  if (opt.horizon < 0) throw Error(ErrorCode::InvalidInput, "negative horizon");

  SummaryOptions so;
  so.horizon = opt.horizon;
  so.burn_in = opt.burn_in < 0 ? 0.2 * opt.horizon : opt.burn_in;
  if (opt.horizon > 0 && so.burn_in >= opt.horizon)
    throw Error(ErrorCode::InvalidInput, "burn-in must be shorter than the horizon");
  so.batches = opt.batches;
  so.tail_radii = opt.tail_radii;
  so.trace_interval = opt.trace_interval;
  SummaryBuilder summary(m, so);

  const double nd = static_cast<double>(d.n), rn = std::sqrt(nd);
  const Vec w = idle_weights(d.drift);
  const double guard = 1e6 * rn;

  Rng rng(seed);
  PolicyRunner runner(policy, s, d);
  IntVec x = x0, z;
  runner.initial(x, z);

  CtmcRun run;
  if (opt.keep_path) {
    run.path.emplace();
    run.path->seed = seed;
    run.path->times.push_back(0.0);
    run.path->states.push_back(x);
    run.path->allocations.push_back(z);
  }

  Vec xh(m);
  IntVec y(J);
  double t = 0.0;
  long events = 0;
  bool transient = false;
  while (t < opt.horizon) {
    long total = 0, qsum = 0;
    for (int i = 0; i < m; ++i) {
      xh[i] = (static_cast<double>(x[i]) - nd * d.centering.x_bar[i]) / rn;
      total += x[i];
      qsum += x[i];
    }
    for (int j = 0; j < J; ++j) y[j] = N[j];
    for (int e = 0; e < E; ++e) {
      y[topo.edge(e).pool] -= z[e];
      qsum -= z[e];
    }
    long ysum = 0;
    double weighted = 0.0;
    for (int j = 0; j < J; ++j) {
      ysum += y[j];
      weighted += w[j] * static_cast<double>(y[j]);
    }

    const StepResult step = step_ctmc(topo, d.params, x, z, rng);
    const double t_next = t + step.holding;
    summary.hold(xh, static_cast<double>(ysum) / rn, weighted / rn, std::min(qsum, ysum) > 0, t,
                 std::min(t_next, opt.horizon));
    summary.trace(static_cast<double>(total), t, t_next);
    if (t_next >= opt.horizon) break;

    t = t_next;
    apply_event(topo, x, step.event);
    runner.after_event(x, z, step.event);
    ++events;
    if (opt.keep_path) {
      run.path->times.push_back(t);
      run.path->states.push_back(x);
      run.path->allocations.push_back(z);
    }
    long norm = 0;
    for (long v : x) norm += v;
    if (static_cast<double>(norm) > guard) {
      transient = true;
      break;
    }
  }
  run.summary = summary.finish(seed, events, scale_state(d, x));
  run.summary.transience_suspected = transient;
  return run;
}

std::vector<CtmcRun> simulate_ctmc_replications(const StaticData& s, const ScaleData& d,
                                                const PolicySpec& policy, const IntVec& x0,
                                                const CtmcOptions& opt, int reps, std::uint64_t master_seed) {
  std::vector<CtmcRun> runs(std::max(reps, 0));
  parallel_for(static_cast<int>(runs.size()), [&](int r) { runs[r] = simulate_ctmc(s, d, policy, x0, opt, replication_seed(master_seed, r)); });
  return runs;
}

DriftDecomposition prelimit_drift(const StaticData& s, const ScaleData& d, const Vec& x_hat, const Vec& z_hat) {
  const auto& topo = s.topology;
  const int m = topo.classes(), J = topo.pools();
  const IntVec x = unscale_state(d, x_hat);
  const IntVec z = unscale_allocation(d, z_hat);
  if (!is_admissible(topo, x, d.params.servers, z))
    throw Error(ErrorCode::InfeasibleAction, "allocation violates balance or work conservation");

  DriftDecomposition out;
  out.b = d.ell_eff;
  Vec q = x_hat, y = Vec::Zero(J);
  for (int e = 0; e < topo.edge_count(); ++e) {
    const Edge& ed = topo.edge(e);
    out.b[ed.cls] -= d.params.mu[e] * z_hat[e];
    q[ed.cls] -= z_hat[e];
    y[ed.pool] -= z_hat[e];
  }
  const double sum = x_hat.sum();
  const double pos = std::max(sum, 0.0), neg = std::max(-sum, 0.0);
  out.theta = std::min(q.sum(), y.sum());
  const double qs = out.theta + pos, ys = out.theta + neg;
  out.u.uc = qs > 1e-12 ? Vec(q / q.sum()) : Vec(Vec::Unit(m, 0));
  out.u.us = ys > 1e-12 ? Vec(y / y.sum()) : Vec(Vec::Unit(J, 0));

  const auto& B1 = d.drift.b1;
  const auto& B2 = d.drift.b2;
  out.b_decomposed = d.ell_eff - B1 * (x_hat - pos * out.u.uc) + B2 * out.u.us * neg +
                     out.theta * (B1 * out.u.uc + B2 * out.u.us);
  const double scale = 1.0 + out.b.lpNorm<Eigen::Infinity>() + x_hat.lpNorm<Eigen::Infinity>() + out.theta;
  if ((out.b - out.b_decomposed).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw Error(ErrorCode::Inconsistent, "drift decomposition disagrees with the direct drift");
  return out;
}

double prelimit_generator_apply(const ScalarField& f, const StaticData& s, const ScaleData& d,
                                const Vec& x_hat, const Vec& z_hat) {
  const int m = s.topology.classes();
  const Vec b = prelimit_drift(s, d, x_hat, z_hat).b;
  const double rn = std::sqrt(static_cast<double>(d.n));
  const double f0 = f(x_hat);
  double out = 0.0;
  Vec probe = x_hat;
  for (int i = 0; i < m; ++i) {
    probe[i] = x_hat[i] + 1.0 / rn;
    const double up = f(probe) - f0;
    probe[i] = x_hat[i] - 1.0 / rn;
    const double down = f(probe) - f0;
    probe[i] = x_hat[i];
    out += d.params.lambda[i] * (up + down) - rn * b[i] * down;
  }
  return out;
}

}  // namespace hwnet
