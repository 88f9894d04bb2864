#include "hwnet/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwnet/error.hpp"

namespace hwnet {

double psi(double t, int order) {
  if (t <= -1.0) return order == 0 ? -0.5 : 0.0;
  if (t >= 0.0) {
    if (order == 0) return t;
    return order == 1 ? 1.0 : 0.0;
  }
  const double s = t + 1.0;
  switch (order) {
    case 0: return s * s * s - 0.5 * s * s * s * s - 0.5;
    case 1: return 3.0 * s * s - 2.0 * s * s * s;
    default: return 6.0 * s - 6.0 * s * s;
  }
}

double psi_eval(double t, double eps, int order) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidInput, "psi_eval: eps must be positive");
  const double scale = order == 0 ? 1.0 : (order == 1 ? eps : eps * eps);
  return scale * psi(eps * t, order);
}

void validate_config(const LyapunovConfig& cfg) {
  if (!(cfg.eps > 0.0) || !(cfg.theta > 0.0))
    throw Error(ErrorCode::InvalidInput, "Lyapunov config needs eps > 0 and theta > 0");
  if (cfg.mu_tilde.size() != cfg.m || cfg.m <= 0)
    throw Error(ErrorCode::InvalidInput, "Lyapunov config: mu_tilde has the wrong size");
  if ((cfg.mu_tilde.array() <= 0.0).any())
    throw Error(ErrorCode::NonpositiveRate, "Lyapunov config: mu_tilde must be positive");
}

double LyapunovValue::v1() const { return std::exp(log_v1); }
double LyapunovValue::v2() const { return std::exp(log_v2); }
double LyapunovValue::value() const { return v1() + v2(); }

double LyapunovValue::log_value() const {
  const double hi = std::max(log_v1, log_v2);
  const double lo = std::min(log_v1, log_v2);
  return hi + std::log1p(std::exp(lo - hi));
}

Vec LyapunovValue::gradient() const { return v1() * g1 + v2() * g2; }

Mat LyapunovValue::hessian() const {
  Mat h = v1() * (g1 * g1.transpose()) + v2() * (g2 * g2.transpose());
  h.diagonal() += v1() * h1 + v2() * h2;
  return h;
}

LyapunovValue lyapunov_eval(const Vec& x, const LyapunovConfig& cfg) {
  const int m = cfg.m;
  if (x.size() != m) throw Error(ErrorCode::InvalidInput, "lyapunov_eval: state has the wrong size");
  LyapunovValue v;
  v.g1.resize(m);
  v.g2.resize(m);
  v.h1.resize(m);
  v.h2.resize(m);
  for (int i = 0; i < m; ++i) {
    const double w = 1.0 / cfg.mu_tilde[i];
    v.log_v1 += cfg.theta * w * psi_eval(-x[i], cfg.eps, 0);
    v.g1[i] = -cfg.theta * w * psi_eval(-x[i], cfg.eps, 1);
    v.h1[i] = cfg.theta * w * psi_eval(-x[i], cfg.eps, 2);
    v.log_v2 += w * psi_eval(x[i], cfg.eps, 0);
    v.g2[i] = w * psi_eval(x[i], cfg.eps, 1);
    v.h2[i] = w * psi_eval(x[i], cfg.eps, 2);
  }
  return v;
}

TestFunction lyapunov_test_function(const LyapunovConfig& cfg) {
  TestFunction f;
  f.value = [cfg](const Vec& x) { return lyapunov_eval(x, cfg).value(); };
  f.gradient = [cfg](const Vec& x) { return lyapunov_eval(x, cfg).gradient(); };
  f.hessian = [cfg](const Vec& x) { return lyapunov_eval(x, cfg).hessian(); };
  return f;
}

namespace {

double tilt(double rho, const Vec& lambda, const Vec& mu_tilde) {
  double sum = 0.0;
  for (int i = 0; i < lambda.size(); ++i)
    sum += lambda[i] * (3.0 * mu_tilde[i] + 2.0) / (mu_tilde[i] * mu_tilde[i]);
  return rho / (3.0 * static_cast<double>(lambda.size())) / sum;
}

void require_covered(const StaticData& s) {
  if (s.network_class.primary() == NetworkClass::Kind::GeneralTree)
    throw Error(ErrorCode::NotApplicable, "network has neither a dominant pool nor class-dependent rates");
}

}  // namespace

double limit_epsilon(const StaticData& s) {
  if (!(s.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "tilt needs positive spare capacity");
  return tilt(s.rho, s.params.lambda, s.drift.b1.diagonal());
}

double prelimit_epsilon(const StaticData& s, const ScaleData& d) {
  if (!(d.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "tilt needs positive spare capacity at n");
  (void)s;
  const double nd = static_cast<double>(d.n);
  const Vec mu_tilde = d.drift.b1.diagonal();
  const double eps = tilt(d.rho, d.params.lambda / nd, mu_tilde);
  return eps * std::exp(-mu_tilde.cwiseInverse().sum() / std::sqrt(nd));
}

double theta0(const StaticData& s) {
  require_covered(s);
  const auto& topo = s.topology;
  const auto& nc = s.network_class;
  const Vec& mu = s.params.mu;
  if (nc.n_shape) {
    const int d = nc.dominant;
    for (int i = 0; i < topo.classes(); ++i) {
      if (topo.class_degree(i) != 2) continue;
      double to_dom = 0.0, to_leaf = 0.0;
      for (int e : topo.class_edges(i)) (topo.edge(e).pool == d ? to_dom : to_leaf) = mu[e];
      const double eta = to_leaf / to_dom;
      return 2.0 * std::max(eta, 1.0 / eta);
    }
  }
  if (nc.dominant_pool) {
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (int e : topo.pool_edges(nc.dominant)) {
      hi = std::max(hi, mu[e]);
      lo = std::min(lo, mu[e]);
    }
    return 2.0 * hi / lo;
  }
  return 2.0 * nc.class_rate.maxCoeff() / nc.class_rate.minCoeff();
}

LyapunovConfig limit_config(const StaticData& s, std::optional<double> theta) {
  require_covered(s);
  LyapunovConfig cfg;
  cfg.eps = limit_epsilon(s);
  cfg.theta = theta ? *theta : theta0(s);
  cfg.mu_tilde = s.drift.b1.diagonal();
  cfg.m = s.topology.classes();
  validate_config(cfg);
  return cfg;
}

LyapunovConfig prelimit_config(const StaticData& s, const ScaleData& d, std::optional<double> theta) {
  require_covered(s);
  LyapunovConfig cfg;
  cfg.eps = prelimit_epsilon(s, d);
  cfg.theta = theta ? *theta : theta0(s);
  cfg.mu_tilde = d.drift.b1.diagonal();
  cfg.m = s.topology.classes();
  validate_config(cfg);
  return cfg;
}

namespace {

double kappa_circ(const Topology& topo, const Vec& z_bar) {
  const int J = topo.pools();
  if (J > 20) throw Error(ErrorCode::TooManyPools, "pool subset enumeration is limited to 20 pools");
  double best = 0.0;
  for (unsigned long mask = 1; mask + 1 < (1ul << J); ++mask) {
    std::vector<char> cls(topo.classes(), 0);
    for (int j = 0; j < J; ++j)
      if (mask >> j & 1ul)
        for (int e : topo.pool_edges(j)) cls[topo.edge(e).cls] = 1;
    double inside = 0.0, outside = 0.0;
    for (int e = 0; e < topo.edge_count(); ++e) {
      const Edge& ed = topo.edge(e);
      if (!cls[ed.cls]) continue;
      ((mask >> ed.pool & 1ul) ? inside : outside) += z_bar[e];
    }
    best = std::max(best, inside / (inside + outside));
  }
  return best;
}

// True when n belongs to the set whose maximum defines n0.
bool below_threshold(const StaticData& s, long n) {
  ScaleData d;
  try {
    d = at_scale(s, n, true);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonpositiveRate) return true;
    throw;
  }
  if (!(d.rho > 0.0)) return true;
  const double eps = prelimit_epsilon(s, d);
  const auto& topo = s.topology;
  const Vec& z = d.centering.z_bar;
  double rhs;
  if (s.network_class.dominant_pool) {
    double lo = std::numeric_limits<double>::infinity();
    for (int e : topo.pool_edges(s.network_class.dominant)) lo = std::min(lo, z[e]);
    rhs = eps * lo;
  } else {
    rhs = eps / (2.0 * topo.classes()) * z.minCoeff();
  }
  return 1.0 / std::sqrt(static_cast<double>(n)) >= rhs;
}

}  // namespace

long compute_n0(const StaticData& s) {
  require_covered(s);
  const double eps = limit_epsilon(s);
  double zmin = std::numeric_limits<double>::infinity();
  for (int e = 0; e < s.topology.edge_count(); ++e)
    zmin = std::min(zmin, s.fluid.xi[e] * s.params.nu[s.topology.edge(e).pool]);
  const double divisor = s.network_class.dominant_pool ? 1.0 : 2.0 * s.topology.classes();
  // In the limit the inequality fails once sqrt(n) eps zmin / divisor > 1; start
  // the downward scan at twice that and push the start out while it still holds.
  long cap = static_cast<long>(std::ceil(std::pow(2.0 * divisor / (eps * zmin), 2.0)));
  while (below_threshold(s, cap)) {
    if (cap > 1'000'000'000L) throw Error(ErrorCode::Inconsistent, "n0 scan did not terminate");
    cap *= 4;
  }
  for (long n = cap; n >= 1; --n)
    if (below_threshold(s, n)) return n;
  return 0;
}

KappaBounds kappa_and_n0(const StaticData& s, long n) {
  const auto& topo = s.topology;
  const ScaleData d = at_scale(s, n, true);
  const Vec& z = d.centering.z_bar;
  KappaBounds k;
  k.kappa = topo.pools() == 1 ? 0.0 : kappa_circ(topo, z);
  double total = 0.0;
  for (long v : d.params.servers) total += static_cast<double>(v);
  k.kappa_tilde = static_cast<double>(n) * z.minCoeff() / total;
  if (s.network_class.primary() != NetworkClass::Kind::GeneralTree) k.n0 = compute_n0(s);
  return k;
}

}  // namespace hwnet
