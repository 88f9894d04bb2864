#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hwnet/control.hpp"
#include "hwnet/lyapunov.hpp"

namespace hwnet {

struct SamplePlan {
  double radius = 200.0;
  double inner_radius = 0.25;
  int shells = 40;  // geometric between inner_radius and radius
  int random_directions = 64;
  std::uint64_t seed = 1;
};

// The origin plus shells of L1 radius r times unit directions: +-e_i, every
// sign pattern (m <= 10) and random directions from the plan's seed.
std::vector<Vec> sample_points(int m, const SamplePlan& plan);

struct Witness {
  Vec x;
  std::optional<ControlPoint> u;
  double value = 0.0;
};

// Checks of the two constituent inequalities on the outer half of the sample.
struct ConeCheck {
  double delta = 0.0;
  long inside = 0;          // samples in the positive cone
  long v2_failures = 0;     // <b, grad V2> > -(rho eps / m) V2 inside the cone
  double outer_slope = 0.0;    // smallest -<b, grad V> / (eps |x|_1 V) outside the cone
  bool v2_dominates = true; // V2 >= V1^2 on the cone
};

struct DriftCertificate {
  bool prelimit = false;
  long n = 0;
  double eps = 0.0;
  double theta = 0.0;
  double decay = 0.0;
  double c0 = 0.0;
  double radius = 0.0;
  double core_radius = 0.0;  // largest |x|_1 where L V + decay V exceeded the slack
  double max_violation = 0.0;
  long samples = 0;
  long violations = 0;       // samples beyond radius/2 with positive excess
  bool passed = false;
  std::optional<Witness> witness;
  std::vector<ConeCheck> cones;
  std::optional<bool> quarter_theta_fails;
  long lnice_violations = 0;
  double kappa = 0.0;
  std::optional<long> n0;
  bool n0_enforced = true;
};

struct CertifyOptions {
  SamplePlan plan;
  bool cone_checks = true;
  bool sharpness_probe = true;
};

DriftCertificate certify_drift_diffusion(const StaticData& s, const LyapunovConfig& cfg,
                                         const CertifyOptions& opt = {});
// With enforce_n0 the n0 guard raises NBelowN0; otherwise it is only reported.
DriftCertificate certify_drift_prelimit(const StaticData& s, long n, const LyapunovConfig& cfg,
                                        const CertifyOptions& opt = {}, bool enforce_n0 = true);

struct TransienceReport {
  double beta = 0.0;
  double beta_max = 0.0;
  double min_margin = 0.0;  // L_u H scaled by cosh^2 / beta
  long samples = 0;
  long violations = 0;
  bool passed = false;
  std::optional<Witness> witness;
  std::optional<long> n;
  double prelimit_min_margin = 0.0;
  long prelimit_samples = 0;
  long prelimit_violations = 0;
};

// <e, B1^{-1} ell> / |sigma^T B1^{-T} e|^2
double beta_upper_bound(const StaticData& s);
TransienceReport transience_certificate(const StaticData& s, double beta, const SamplePlan& plan,
                                        std::optional<long> n = std::nullopt);

// Throws CertificationFailed when the report did not pass.
void require(const DriftCertificate& c);
void require(const TransienceReport& r);

nlohmann::json to_json(const DriftCertificate& c);
nlohmann::json to_json(const TransienceReport& r);

}  // namespace hwnet
