#include "hwnet/statics.hpp"

#include <cmath>
#include <string>

#include "hwnet/error.hpp"

namespace hwnet {

namespace {

// BFS over the tree; nodes are classes 0..m-1 followed by pools.
struct Traversal {
  std::vector<int> order;        // BFS order from the root
  std::vector<int> parent_edge;  // -1 at the root
};

Traversal traverse(const Topology& topo, int root) {
  const int m = topo.classes();
  const int nodes = m + topo.pools();
  Traversal t;
  t.parent_edge.assign(nodes, -1);
  std::vector<bool> seen(nodes, false);
  t.order.reserve(nodes);
  t.order.push_back(root);
  seen[root] = true;
  for (size_t k = 0; k < t.order.size(); ++k) {
    const int v = t.order[k];
    const auto& inc = v < m ? topo.class_edges(v) : topo.pool_edges(v - m);
    for (int e : inc) {
      const Edge& ed = topo.edge(e);
      const int w = v < m ? m + ed.pool : ed.cls;
      if (seen[w]) continue;
      seen[w] = true;
      t.parent_edge[w] = e;
      t.order.push_back(w);
    }
  }
  return t;
}

}  // namespace

FluidSolution solve_fluid(const Topology& topo, const LimitParams& p) {
  validate_params(topo, p);
  const int m = topo.classes();
  const int E = topo.edge_count();
  int w = 0;
  for (int i = 1; i < m; ++i)
    if (p.lambda[i] > p.lambda[w]) w = i;

  // Class equation weights mu_ij nu_j; pool equation weights 1.
  auto weight = [&](int node, int e) { return node < m ? p.mu[e] * p.nu[topo.edge(e).pool] : 1.0; };

  Traversal t = traverse(topo, w);
  Vec xi = Vec::Zero(E);
  for (int k = static_cast<int>(t.order.size()) - 1; k >= 1; --k) {
    const int v = t.order[k];
    const int pe = t.parent_edge[v];
    const auto& inc = v < m ? topo.class_edges(v) : topo.pool_edges(v - m);
    double rhs = v < m ? p.lambda[v] : 1.0;
    for (int e : inc)
      if (e != pe) rhs -= weight(v, e) * xi[e];
    xi[pe] = rhs / weight(v, pe);
  }

  FluidSolution f;
  f.withheld_class = w;
  f.xi = xi;
  f.residual = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int e : topo.class_edges(i)) s += weight(i, e) * xi[e];
    f.residual = std::max(f.residual, std::abs(s - p.lambda[i]));
  }
  for (int j = 0; j < topo.pools(); ++j) {
    double s = 0.0;
    for (int e : topo.pool_edges(j)) s += xi[e];
    f.residual = std::max(f.residual, std::abs(s - 1.0));
  }
  const double tol = 1e-9 * (1.0 + p.lambda.lpNorm<1>());
  if (f.residual > tol)
    throw Error(ErrorCode::NotCriticallyLoaded,
                "fluid residual " + std::to_string(f.residual) + " exceeds " + std::to_string(tol));
  for (int e = 0; e < E; ++e)
    if (xi[e] <= 1e-12)
      throw Error(ErrorCode::CRPViolation,
                  "xi(" + std::to_string(topo.edge(e).cls + 1) + "," +
                      std::to_string(topo.edge(e).pool + 1) + ") = " + std::to_string(xi[e]));

  f.z_star.resize(E);
  f.x_star = Vec::Zero(m);
  for (int e = 0; e < E; ++e) {
    f.z_star[e] = xi[e] * p.nu[topo.edge(e).pool];
    f.x_star[topo.edge(e).cls] += f.z_star[e];
  }
  return f;
}

PhiMap PhiMap::build(const Topology& topo, int root_pool) {
  const int m = topo.classes();
  const int J = topo.pools();
  if (root_pool < 0 || root_pool >= J) throw Error(ErrorCode::InvalidInput, "root pool out of range");
  PhiMap phi;
  phi.m_ = m;
  phi.root_pool_ = root_pool;
  phi.coef_ = Mat::Zero(topo.edge_count(), m + J);

  Traversal t = traverse(topo, m + root_pool);
  for (int k = static_cast<int>(t.order.size()) - 1; k >= 1; --k) {
    const int v = t.order[k];
    const int pe = t.parent_edge[v];
    const auto& inc = v < m ? topo.class_edges(v) : topo.pool_edges(v - m);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m + J);
    row[v] = 1.0;
    for (int e : inc)
      if (e != pe) row -= phi.coef_.row(e);
    phi.coef_.row(pe) = row;
    if (v < m) phi.class_order_.push_back(v);
  }
  return phi;
}

Vec PhiMap::apply(const Vec& alpha, const Vec& beta) const {
  Vec ab(alpha.size() + beta.size());
  ab << alpha, beta;
  return coef_ * ab;
}

int basis_pool(const Topology& topo, const NetworkClass& cls) {
  if (cls.dominant_pool) return cls.dominant;
  int best = 0;
  for (int j = 1; j < topo.pools(); ++j)
    if (topo.pool_degree(j) > topo.pool_degree(best)) best = j;
  return best;
}

PhiMap build_phi(const Topology& topo, int root_pool) { return PhiMap::build(topo, root_pool); }

DriftMatrices derive_b(const Topology& topo, const PhiMap& phi, const Vec& mu) {
  const int m = topo.classes();
  const int J = topo.pools();
  DriftMatrices d;
  d.b1 = Mat::Zero(m, m);
  d.b2 = Mat::Zero(m, J);
  d.dropped_pool = phi.root_pool();
  d.class_order = phi.class_order();
  const Mat& c = phi.coefficients();
  for (int e = 0; e < topo.edge_count(); ++e) {
    const int i = topo.edge(e).cls;
    d.b1.row(i) += mu[e] * c.row(e).head(m);
    d.b2.row(i) += mu[e] * c.row(e).tail(J);
  }
  return d;
}

Vec DriftMatrices::solve_b1(const Vec& rhs) const {
  const int m = static_cast<int>(b1.rows());
  Vec y = Vec::Zero(m);
  for (size_t k = 0; k < class_order.size(); ++k) {
    const int i = class_order[k];
    double s = rhs[i];
    for (size_t l = 0; l < k; ++l) s -= b1(i, class_order[l]) * y[class_order[l]];
    const double d = b1(i, i);
    if (!(std::abs(d) > 1e-300))
      throw Error(ErrorCode::SingularB1, "zero pivot for class " + std::to_string(i + 1));
    y[i] = s / d;
  }
  return y;
}

namespace {

Vec limit_ell(const Topology& topo, const LimitParams& p, const FluidSolution& f) {
  Vec ell = p.lambda_hat;
  for (int e = 0; e < topo.edge_count(); ++e) {
    const Edge& ed = topo.edge(e);
    ell[ed.cls] -= p.mu_hat[e] * f.z_star[e] + p.mu[e] * f.xi[e] * p.nu_hat[ed.pool];
  }
  return ell;
}

}  // namespace

StaticData compute_statics(const Topology& topo, const LimitParams& params) {
  StaticData s{topo, params, classify_network(topo, params), solve_fluid(topo, params),
               PhiMap::build(topo, 0), {}, {}, 0.0};
  s.phi = PhiMap::build(topo, basis_pool(topo, s.network_class));
  s.drift = derive_b(topo, s.phi, params.mu);
  s.ell = limit_ell(topo, params, s.fluid);
  s.rho = -s.drift.solve_b1(s.ell).sum();
  return s;
}

Vec ell_at_scale(const StaticData& s, const ScaledParams& sp) {
  const auto& topo = s.topology;
  Vec ell = sp.lambda;
  for (int e = 0; e < topo.edge_count(); ++e) {
    const Edge& ed = topo.edge(e);
    ell[ed.cls] -= sp.mu[e] * s.fluid.xi[e] * static_cast<double>(sp.servers[ed.pool]);
  }
  return ell / std::sqrt(static_cast<double>(sp.n));
}

namespace {

Centering make_centering(const StaticData& s, const ScaledParams& sp, const DriftMatrices& bn,
                         const Vec& ell_n, double rho_n, bool shifted) {
  const auto& topo = s.topology;
  const int m = topo.classes();
  const double nd = static_cast<double>(sp.n);
  Centering c;
  c.shifted = shifted;
  c.z_bar.resize(topo.edge_count());
  for (int e = 0; e < topo.edge_count(); ++e)
    c.z_bar[e] = s.fluid.xi[e] * static_cast<double>(sp.servers[topo.edge(e).pool]) / nd;
  c.zeta = Vec::Zero(m);
  if (shifted) {
    c.zeta = Vec::Constant(m, rho_n / m) + bn.solve_b1(ell_n);
    c.z_bar += s.phi.apply(c.zeta, Vec::Zero(topo.pools())) / std::sqrt(nd);
  }
  c.x_bar = Vec::Zero(m);
  for (int e = 0; e < topo.edge_count(); ++e) c.x_bar[topo.edge(e).cls] += c.z_bar[e];
  return c;
}

}  // namespace

ScaleData at_scale(const StaticData& s, long n, bool shifted) {
  const auto& topo = s.topology;
  ScaleData d;
  d.n = n;
  d.params = params_at_scale(topo, s.params, n);
  d.drift = derive_b(topo, s.phi, d.params.mu);
  d.ell = ell_at_scale(s, d.params);
  d.rho = -d.drift.solve_b1(d.ell).sum();
  d.centering = make_centering(s, d.params, d.drift, d.ell, d.rho, shifted);
  // The shift moves part of ell into the centering: ell_eff = ell - sum_j mu z_check.
  d.ell_eff = d.ell;
  if (shifted) {
    const Vec zc = s.phi.apply(d.centering.zeta, Vec::Zero(topo.pools()));
    for (int e = 0; e < topo.edge_count(); ++e) d.ell_eff[topo.edge(e).cls] -= d.params.mu[e] * zc[e];
  }
  return d;
}

SpareCapacity spare_capacity(const StaticData& s, std::optional<long> n) {
  SpareCapacity sc;
  sc.ell = s.ell;
  sc.rho = s.rho;
  if (n) {
    ScaleData d = at_scale(s, *n, false);
    sc.ell_n = d.ell;
    sc.rho_n = d.rho;
  }
  return sc;
}

Centering centering(const StaticData& s, long n, bool shifted) { return at_scale(s, n, shifted).centering; }

}  // namespace hwnet
