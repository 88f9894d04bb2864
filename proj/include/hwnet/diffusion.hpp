#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "hwnet/control.hpp"
#include "hwnet/prelimit.hpp"
#include "hwnet/statics.hpp"
#include "hwnet/summary.hpp"

namespace hwnet {

// ell, or -(rho/m) B1 e for the centered process.
Vec drift_offset(const StaticData& s, bool centered);

Vec drift_phi_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered);
Vec drift_matrix_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered);
// Available for DominantPool and ClassDependent networks.
std::optional<Vec> drift_closed_form(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered);
// Evaluates every available form and checks that they agree.
Vec drift(const StaticData& s, const Vec& x, const ControlPoint& u, bool centered);

// Diagonal of a = sigma sigma^T.
Vec diffusion_diag(const StaticData& s);

struct TestFunction {
  ScalarField value;
  std::function<Vec(const Vec&)> gradient;  // optional
  std::function<Mat(const Vec&)> hessian;   // optional
};

// 1/2 tr(a D^2 f) + <b, grad f>; central differences fill in missing derivatives.
double generator_apply(const TestFunction& f, const Vec& x, const Vec& b, const Vec& a_diag);
double generator_apply(const TestFunction& f, const Vec& x, const ControlPoint& u, const StaticData& s,
                       bool centered);

using MarkovControl = std::function<const ControlPoint&(const Vec&)>;

// constant:<uc>/<us> | mimic-swc | random-cells:<seed>
MarkovControl make_control(std::string_view spec, const StaticData& s);

double default_step(const StaticData& s);

struct SdeOptions {
  double horizon = 0.0;
  double step = 0.0;      // default_step when zero
  double burn_in = -1.0;  // negative: 20% of the horizon
  int batches = 20;
  std::vector<double> tail_radii;
  double trace_interval = 0.0;
  bool keep_path = false;
};

struct SdePath {
  std::vector<double> times;
  std::vector<Vec> states;
  std::uint64_t seed = 0;
};

struct SdeRun {
  PathSummary summary;
  std::optional<SdePath> path;
};

// Writes the drift at x into b and the idleness weight into weight.
using DriftField = std::function<void(const Vec& x, Vec& b, double& weight)>;

SdeRun simulate_sde(const DriftField& field, const Vec& sigma, const Vec& x0, const SdeOptions& opt,
                    std::uint64_t seed);
SdeRun simulate_sde(const StaticData& s, const MarkovControl& control, bool centered, const Vec& x0,
                    const SdeOptions& opt, std::uint64_t seed);
std::vector<SdeRun> simulate_sde_replications(const StaticData& s, const MarkovControl& control, bool centered,
                                              const Vec& x0, const SdeOptions& opt, int reps,
                                              std::uint64_t master_seed);

}  // namespace hwnet
