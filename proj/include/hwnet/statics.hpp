#pragma once

#include <optional>
#include <vector>

#include "hwnet/network.hpp"

namespace hwnet {

struct FluidSolution {
  Vec xi;      // per edge
  Vec x_star;  // per class
  Vec z_star;  // per edge
  double residual = 0.0;
  int withheld_class = 0;
};

FluidSolution solve_fluid(const Topology& topo, const LimitParams& params);

// Linear map from (alpha, beta) with equal totals to edge values whose class
// sums are alpha and pool sums are beta. Coefficients never involve the
// column of the root pool, so they are already expressed in the reduced basis.
class PhiMap {
 public:
  static PhiMap build(const Topology& topo, int root_pool);

  Vec apply(const Vec& alpha, const Vec& beta) const;
  const Mat& coefficients() const { return coef_; }  // |E| x (m+J)
  int root_pool() const { return root_pool_; }
  // Classes listed so that every class follows its descendants.
  const std::vector<int>& class_order() const { return class_order_; }

 private:
  Mat coef_;
  int root_pool_ = 0;
  int m_ = 0;
  std::vector<int> class_order_;
};

// Dominant pool when there is one, else the highest-degree pool (ties by index).
int basis_pool(const Topology& topo, const NetworkClass& cls);
PhiMap build_phi(const Topology& topo, int root_pool);

struct DriftMatrices {
  Mat b1;  // m x m, triangular after permuting by class_order
  Mat b2;  // m x J, column dropped_pool is zero
  int dropped_pool = 0;
  std::vector<int> class_order;

  // Solves b1 * y = rhs by substitution along class_order.
  Vec solve_b1(const Vec& rhs) const;
};

DriftMatrices derive_b(const Topology& topo, const PhiMap& phi, const Vec& mu);

struct Centering {
  Vec x_bar;  // per class
  Vec z_bar;  // per edge
  Vec zeta;   // translation (zero when unshifted)
  bool shifted = false;
};

struct StaticData {
  Topology topology;
  LimitParams params;
  NetworkClass network_class;
  FluidSolution fluid;
  PhiMap phi;
  DriftMatrices drift;
  Vec ell;
  double rho = 0.0;
};

StaticData compute_statics(const Topology& topo, const LimitParams& params);

struct ScaleData {
  long n = 1;
  ScaledParams params;
  DriftMatrices drift;
  Vec ell;         // second-order drift at n
  double rho = 0.0;
  Centering centering;
  Vec ell_eff;     // ell minus the rate applied to the centering shift
};

ScaleData at_scale(const StaticData& s, long n, bool shifted);

struct SpareCapacity {
  Vec ell;
  double rho = 0.0;
  std::optional<Vec> ell_n;
  std::optional<double> rho_n;
};

SpareCapacity spare_capacity(const StaticData& s, std::optional<long> n);
Centering centering(const StaticData& s, long n, bool shifted);

// Second-order drift of the n-th system: (lambda^n - sum_j mu^n xi* N^n)/sqrt(n).
Vec ell_at_scale(const StaticData& s, const ScaledParams& sp);

}  // namespace hwnet
