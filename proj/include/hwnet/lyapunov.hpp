#pragma once

#include <optional>

#include "hwnet/diffusion.hpp"
#include "hwnet/statics.hpp"

namespace hwnet {

// Convex C2 function: -1/2 below -1, identity above 0, quartic bridge between.
double psi(double t, int order = 0);
// psi(eps t) and its derivatives in t.
double psi_eval(double t, double eps, int order = 0);

struct LyapunovConfig {
  double eps = 0.0;
  double theta = 0.0;
  Vec mu_tilde;  // diagonal of B1
  int m = 0;
};

void validate_config(const LyapunovConfig& cfg);

// V = V1 + V2 with V1 = exp(theta Psi(-x)) and V2 = exp(Psi(x)). Derivatives are
// stored relative to each term so that large states do not overflow:
// grad V_k = V_k g_k and hess V_k = V_k (g_k g_k^T + diag(h_k)).
struct LyapunovValue {
  double log_v1 = 0.0;
  double log_v2 = 0.0;
  Vec g1, g2;
  Vec h1, h2;

  double v1() const;
  double v2() const;
  double value() const;
  double log_value() const;
  Vec gradient() const;
  Mat hessian() const;
};

LyapunovValue lyapunov_eval(const Vec& x, const LyapunovConfig& cfg);
TestFunction lyapunov_test_function(const LyapunovConfig& cfg);

// Calibrations of the tilt: the limit value and its n-th system analogue.
double limit_epsilon(const StaticData& s);
double prelimit_epsilon(const StaticData& s, const ScaleData& d);

// Class-specific threshold; NotApplicable for general trees.
double theta0(const StaticData& s);

// theta defaults to theta0.
LyapunovConfig limit_config(const StaticData& s, std::optional<double> theta = std::nullopt);
LyapunovConfig prelimit_config(const StaticData& s, const ScaleData& d, std::optional<double> theta = std::nullopt);

struct KappaBounds {
  double kappa = 0.0;        // 0 when there is a single pool
  double kappa_tilde = 0.0;
  std::optional<long> n0;    // absent for general trees
};

KappaBounds kappa_and_n0(const StaticData& s, long n);
// Largest n violating the threshold inequality (0 when none does).
long compute_n0(const StaticData& s);

}  // namespace hwnet
