#include "hwnet/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hwnet/error.hpp"
#include "hwnet/parallel.hpp"
#include "hwnet/policies.hpp"
#include "hwnet/prelimit.hpp"

namespace hwnet {

std::vector<Vec> sample_points(int m, const SamplePlan& plan) {
  if (!(plan.radius > 0.0) || !(plan.inner_radius > 0.0) || plan.inner_radius > plan.radius || plan.shells < 1)
    throw Error(ErrorCode::InvalidInput, "sample plan needs 0 < inner_radius <= radius and shells >= 1");
  std::vector<Vec> dirs;
  for (int i = 0; i < m; ++i) {
    dirs.push_back(Vec::Unit(m, i));
    dirs.push_back(-Vec::Unit(m, i));
  }
  if (m >= 2 && m <= 10) {
    for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
      Vec d(m);
      for (int i = 0; i < m; ++i) d[i] = (mask >> i & 1ul) ? -1.0 : 1.0;
      dirs.push_back(d / m);
    }
  }
  std::mt19937_64 rng(plan.seed);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < plan.random_directions; ++k) {
    Vec d(m);
    for (int i = 0; i < m; ++i) d[i] = gauss(rng);
    dirs.push_back(d / d.lpNorm<1>());
  }
  std::vector<Vec> out{Vec::Zero(m)};
  const double ratio = plan.shells > 1 ? std::pow(plan.radius / plan.inner_radius, 1.0 / (plan.shells - 1)) : 1.0;
  for (int k = 0; k < plan.shells; ++k) {
    const double r = plan.shells > 1 ? plan.inner_radius * std::pow(ratio, k) : plan.radius;
    for (const Vec& d : dirs) out.push_back(r * d);
  }
  return out;
}

namespace {

struct Sample {
  Vec x;
  std::optional<ControlPoint> u;
  Vec b;
  LyapunovValue v;
  double excess = 0.0;  // L V + decay V
  double slack = 0.0;
};

double slack_for(double lv) { return 1e-8 * (1.0 + std::abs(lv)); }

// L V and L V + decay V for a diagonal diffusion coefficient.
std::pair<double, double> diffusion_excess(const LyapunovValue& v, const Vec& b, const Vec& a, double decay) {
  const double r1 = b.dot(v.g1) + 0.5 * (a.array() * (v.g1.array().square() + v.h1.array())).sum();
  const double r2 = b.dot(v.g2) + 0.5 * (a.array() * (v.g2.array().square() + v.h2.array())).sum();
  const double lv = v.v1() * r1 + v.v2() * r2;
  return {lv, lv + decay * v.value()};
}

// Shared reduction: C0, core radius, outer-half violations, witness, cones.
void reduce(DriftCertificate& c, const std::vector<Sample>& samples, const LyapunovConfig& cfg, double rho,
            double v2_rate, bool cones) {
  c.samples = static_cast<long>(samples.size());
  c.c0 = 0.0;
  c.core_radius = 0.0;
  c.max_violation = -std::numeric_limits<double>::infinity();
  c.violations = 0;
  const Sample* worst = nullptr;
  const Sample* worst_outer = nullptr;
  for (const Sample& s : samples) {
    const double r = s.x.lpNorm<1>();
    c.c0 = std::max(c.c0, s.excess);
    if (s.excess > s.slack) c.core_radius = std::max(c.core_radius, r);
    if (!worst || s.excess > worst->excess) worst = &s;
    if (r >= 0.5 * c.radius) {
      if (s.excess > c.max_violation) {
        c.max_violation = s.excess;
        worst_outer = &s;
      }
      if (s.excess > s.slack) ++c.violations;
    }
  }
  c.passed = c.violations == 0 && std::isfinite(c.c0) && worst_outer != nullptr;
  const Sample* w = c.violations > 0 ? worst_outer : worst;
  if (w) c.witness = Witness{w->x, w->u, w->excess};
  if (!cones) return;
  const int m = cfg.m;
  for (double delta : {0.9, 0.95, 0.99}) {
    ConeCheck k;
    k.delta = delta;
    k.outer_slope = std::numeric_limits<double>::infinity();
    for (const Sample& s : samples) {
      const double r = s.x.lpNorm<1>();
      const bool in_cone = s.x.sum() >= delta * r;
      const bool outer = r >= 0.5 * c.radius;
      if (in_cone) {
        ++k.inside;
        if (s.b.dot(s.v.g2) > -rho * cfg.eps * v2_rate / m + 1e-12) ++k.v2_failures;
        if (outer && s.v.log_v2 < 2.0 * s.v.log_v1) k.v2_dominates = false;
      } else if (outer) {
        const double hi = std::max(s.v.log_v1, s.v.log_v2);
        const double w1 = std::exp(s.v.log_v1 - hi), w2 = std::exp(s.v.log_v2 - hi);
        const double slope = -(w1 * s.b.dot(s.v.g1) + w2 * s.b.dot(s.v.g2)) / (cfg.eps * r * (w1 + w2));
        k.outer_slope = std::min(k.outer_slope, slope);
      }
    }
    c.cones.push_back(k);
  }
}

void require_stable_class(const StaticData& s) {
  if (s.network_class.primary() == NetworkClass::Kind::GeneralTree)
    throw Error(ErrorCode::NotApplicable, "drift certification covers dominant-pool and class-dependent networks");
}

}  // namespace

DriftCertificate certify_drift_diffusion(const StaticData& s, const LyapunovConfig& cfg, const CertifyOptions& opt) {
  require_stable_class(s);
  if (!(s.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "drift certification needs positive spare capacity");
  validate_config(cfg);
  const int m = s.topology.classes();
  DriftCertificate c;
  c.eps = cfg.eps;
  c.theta = cfg.theta;
  c.decay = s.rho * cfg.eps / (3.0 * m);
  c.radius = opt.plan.radius;
  c.n0_enforced = false;

  const auto points = sample_points(m, opt.plan);
  const auto controls = vertex_controls(m, s.topology.pools());
  const Vec a = diffusion_diag(s);
  std::vector<Sample> samples(points.size() * controls.size());
  parallel_for(static_cast<int>(points.size()), [&](int p) {
    const LyapunovValue v = lyapunov_eval(points[p], cfg);
    for (std::size_t k = 0; k < controls.size(); ++k) {
      Sample& out = samples[p * controls.size() + k];
      out.x = points[p];
      out.u = controls[k];
      out.b = drift(s, points[p], controls[k], true);
      out.v = v;
      const auto [lv, g] = diffusion_excess(v, out.b, a, c.decay);
      out.excess = g;
      out.slack = slack_for(lv);
    }
  });
  reduce(c, samples, cfg, s.rho, 1.0, opt.cone_checks);

  if (opt.sharpness_probe) {
    LyapunovConfig quarter = cfg;
    quarter.theta = cfg.theta / 4.0;
    CertifyOptions inner = opt;
    inner.cone_checks = false;
    inner.sharpness_probe = false;
    c.quarter_theta_fails = !certify_drift_diffusion(s, quarter, inner).passed;
  }
  return c;
}

DriftCertificate certify_drift_prelimit(const StaticData& s, long n, const LyapunovConfig& cfg,
                                        const CertifyOptions& opt, bool enforce_n0) {
  require_stable_class(s);
  validate_config(cfg);
  const auto& topo = s.topology;
  const int m = topo.classes();
  const ScaleData d = at_scale(s, n, true);
  if (!(d.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "prelimit certification needs positive spare capacity");
  const KappaBounds kb = kappa_and_n0(s, n);
  if (enforce_n0 && kb.n0 && n <= *kb.n0)
    throw Error(ErrorCode::NBelowN0, "n = " + std::to_string(n) + " does not exceed n0 = " + std::to_string(*kb.n0));

  DriftCertificate c;
  c.prelimit = true;
  c.n = n;
  c.eps = cfg.eps;
  c.theta = cfg.theta;
  c.decay = d.rho * cfg.eps / (4.0 * m);
  c.radius = opt.plan.radius;
  c.kappa = kb.kappa;
  c.n0 = kb.n0;
  c.n0_enforced = enforce_n0;

  // Snap the continuum sample to distinct lattice states.
  const double rn = std::sqrt(static_cast<double>(n));
  std::set<IntVec> seen;
  std::vector<IntVec> states;
  for (const Vec& p : sample_points(m, opt.plan)) {
    IntVec X(m);
    for (int i = 0; i < m; ++i)
      X[i] = std::max(0L, std::lround(static_cast<double>(n) * d.centering.x_bar[i] + rn * p[i]));
    if (seen.insert(X).second) states.push_back(X);
  }

  const ScalarField f = [&cfg](const Vec& x) { return lyapunov_eval(x, cfg).value(); };
  std::vector<Sample> samples(states.size());
  std::vector<char> lnice_bad(states.size(), 0);
  parallel_for(static_cast<int>(states.size()), [&](int k) {
    const IntVec& X = states[k];
    const Allocation z = max_service_allocation(topo, X, d.params.servers);
    const Vec xh = scale_state(d, X);
    const Vec zh = scale_allocation(d, z.z);
    const DriftDecomposition dec = prelimit_drift(s, d, xh, zh);
    Sample& out = samples[k];
    out.x = xh;
    out.u = dec.u;
    out.b = dec.b;
    out.v = lyapunov_eval(xh, cfg);
    const double lv = prelimit_generator_apply(f, s, d, xh, zh);
    out.excess = lv + c.decay * out.v.value();
    out.slack = slack_for(lv);
    const double bound = kb.kappa * std::min(xh.cwiseMax(0.0).sum(), (-xh).cwiseMax(0.0).sum());
    if (dec.theta > bound + 1e-9) lnice_bad[k] = 1;
  });
  c.lnice_violations = std::count(lnice_bad.begin(), lnice_bad.end(), 1);
  reduce(c, samples, cfg, d.rho, 0.5, opt.cone_checks);

  if (opt.sharpness_probe) {
    LyapunovConfig quarter = cfg;
    quarter.theta = cfg.theta / 4.0;
    CertifyOptions inner = opt;
    inner.cone_checks = false;
    inner.sharpness_probe = false;
    c.quarter_theta_fails = !certify_drift_prelimit(s, n, quarter, inner, false).passed;
  }
  return c;
}

namespace {

Vec b1_inverse_transpose_e(const Mat& b1) {
  return b1.transpose().fullPivLu().solve(Vec::Ones(b1.rows()));
}

// cosh(s) / cosh(s + d) without overflow.
double cosh_ratio(double s, double d) {
  const double t = s + d;
  return std::exp(std::abs(s) - std::abs(t)) * (1.0 + std::exp(-2.0 * std::abs(s))) /
         (1.0 + std::exp(-2.0 * std::abs(t)));
}

}  // namespace

double beta_upper_bound(const StaticData& s) {
  const Vec w = b1_inverse_transpose_e(s.drift.b1);
  const double num = s.drift.solve_b1(s.ell).sum();
  const double den = (diffusion_diag(s).array() * w.array().square()).sum();
  return num / den;
}

TransienceReport transience_certificate(const StaticData& s, double beta, const SamplePlan& plan,
                                        std::optional<long> n) {
  if (!(s.rho < 0.0)) throw Error(ErrorCode::NotApplicable, "transience certificate needs negative spare capacity");
  TransienceReport r;
  r.beta = beta;
  r.beta_max = beta_upper_bound(s);
  if (!(beta > 0.0 && beta < r.beta_max))
    throw Error(ErrorCode::BetaOutOfRange, "beta must lie in (0, " + std::to_string(r.beta_max) + ")");
  const auto& topo = s.topology;
  const int m = topo.classes();
  const Vec w = b1_inverse_transpose_e(s.drift.b1);
  const double c = (diffusion_diag(s).array() * w.array().square()).sum();
  const auto points = sample_points(m, plan);
  const auto controls = vertex_controls(m, topo.pools());

  r.min_margin = std::numeric_limits<double>::infinity();
  for (const Vec& x : points) {
    const double arg = beta * w.dot(x);
    for (const auto& u : controls) {
      const double margin = -beta * std::tanh(arg) * c + w.dot(drift(s, x, u, false));
      ++r.samples;
      if (margin < r.min_margin) {
        r.min_margin = margin;
        r.witness = Witness{x, u, margin};
      }
      if (!(margin > 0.0)) ++r.violations;
    }
  }
  r.passed = r.violations == 0;
  if (!n) return r;

  r.n = n;
  const ScaleData d = at_scale(s, *n, false);
  const Vec wn = b1_inverse_transpose_e(d.drift.b1);
  const double rn = std::sqrt(static_cast<double>(*n));
  std::set<IntVec> seen;
  r.prelimit_min_margin = std::numeric_limits<double>::infinity();
  for (const Vec& p : points) {
    IntVec X(m);
    for (int i = 0; i < m; ++i)
      X[i] = std::max(0L, std::lround(static_cast<double>(*n) * d.centering.x_bar[i] + rn * p[i]));
    if (!seen.insert(X).second) continue;
    const Allocation z = max_service_allocation(topo, X, d.params.servers);
    const Vec xh = scale_state(d, X);
    const Vec b = prelimit_drift(s, d, xh, scale_allocation(d, z.z)).b;
    const double arg = beta * wn.dot(xh);
    // Generator of tanh(arg) scaled by cosh^2(arg) / beta.
    double margin = 0.0;
    for (int i = 0; i < m; ++i) {
      const double step = beta * wn[i] / rn;
      const double up = std::sinh(step) * cosh_ratio(arg, step) / beta;
      const double down = std::sinh(-step) * cosh_ratio(arg, -step) / beta;
      margin += d.params.lambda[i] * up + (d.params.lambda[i] - rn * b[i]) * down;
    }
    ++r.prelimit_samples;
    r.prelimit_min_margin = std::min(r.prelimit_min_margin, margin);
    if (!(margin > 0.0)) ++r.prelimit_violations;
  }
  return r;
}

void require(const DriftCertificate& c) {
  if (!c.passed)
    throw Error(ErrorCode::CertificationFailed,
                "drift inequality violated at " + std::to_string(c.violations) + " outer samples");
}

void require(const TransienceReport& r) {
  if (!r.passed)
    throw Error(ErrorCode::CertificationFailed,
                "transience margin nonpositive at " + std::to_string(r.violations) + " samples");
}

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  nlohmann::json j{{"x", vec_json(w->x)}, {"value", w->value}};
  if (w->u) j["u"] = {{"uc", vec_json(w->u->uc)}, {"us", vec_json(w->u->us)}};
  return j;
}

}  // namespace

nlohmann::json to_json(const DriftCertificate& c) {
  nlohmann::json j;
  j["scope"] = c.prelimit ? "prelimit" : "limit";
  if (c.prelimit) j["n"] = c.n;
  j["eps"] = c.eps;
  j["theta"] = c.theta;
  j["decay"] = c.decay;
  j["c0"] = c.c0;
  j["radius"] = c.radius;
  j["core_radius"] = c.core_radius;
  j["max_outer_excess"] = c.max_violation;
  j["samples"] = c.samples;
  j["violations"] = c.violations;
  j["passed"] = c.passed;
  j["witness"] = witness_json(c.witness);
  j["cones"] = nlohmann::json::array();
  for (const auto& k : c.cones)
    j["cones"].push_back({{"delta", k.delta},
                          {"inside", k.inside},
                          {"v2_failures", k.v2_failures},
                          {"outer_slope", std::isfinite(k.outer_slope) ? nlohmann::json(k.outer_slope) : nlohmann::json()},
                          {"v2_dominates", k.v2_dominates}});
  j["quarter_theta_fails"] = c.quarter_theta_fails ? nlohmann::json(*c.quarter_theta_fails) : nlohmann::json();
  if (c.prelimit) {
    j["kappa"] = c.kappa;
    j["lnice_violations"] = c.lnice_violations;
    j["n0"] = c.n0 ? nlohmann::json(*c.n0) : nlohmann::json();
    j["n0_enforced"] = c.n0_enforced;
  }
  return j;
}

nlohmann::json to_json(const TransienceReport& r) {
  nlohmann::json j{{"beta", r.beta},           {"beta_max", r.beta_max},     {"min_margin", r.min_margin},
                   {"samples", r.samples},     {"violations", r.violations}, {"passed", r.passed},
                   {"witness", witness_json(r.witness)}};
  if (r.n) {
    j["n"] = *r.n;
    j["prelimit_min_margin"] = r.prelimit_min_margin;
    j["prelimit_samples"] = r.prelimit_samples;
    j["prelimit_violations"] = r.prelimit_violations;
  }
  return j;
}

}  // namespace hwnet
