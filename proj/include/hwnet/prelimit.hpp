#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "hwnet/policies.hpp"
#include "hwnet/summary.hpp"

namespace hwnet {

using Rng = std::mt19937_64;

// Distinct masters give unrelated seed streams.
inline std::uint64_t replication_seed(std::uint64_t master, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(rep)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct StepResult {
  Event event;
  double holding = 0.0;
};

StepResult step_ctmc(const Topology& topo, const ScaledParams& sp, const IntVec& x, const IntVec& z, Rng& rng);
void apply_event(const Topology& topo, IntVec& x, const Event& ev);

struct CtmcOptions {
  double horizon = 0.0;
  double burn_in = -1.0;  // negative: 20% of the horizon
  int batches = 20;
  std::vector<double> tail_radii;
  double trace_interval = 0.0;
  bool keep_path = false;
};

struct CtmcPath {
  std::vector<double> times;
  std::vector<IntVec> states;
  std::vector<IntVec> allocations;
  std::uint64_t seed = 0;
};

struct CtmcRun {
  PathSummary summary;
  std::optional<CtmcPath> path;
};

// Pool weights 1 + <e, B1^{-1} B2 e_j>.
Vec idle_weights(const DriftMatrices& d);

CtmcRun simulate_ctmc(const StaticData& s, const ScaleData& d, const PolicySpec& policy, const IntVec& x0,
                      const CtmcOptions& opt, std::uint64_t seed);

std::vector<CtmcRun> simulate_ctmc_replications(const StaticData& s, const ScaleData& d,
                                                const PolicySpec& policy, const IntVec& x0,
                                                const CtmcOptions& opt, int reps, std::uint64_t master_seed);

// Head counts at the centering point.
IntVec centered_state(const ScaleData& d);

struct DriftDecomposition {
  Vec b;             // ell - sum_j mu z_hat
  Vec b_decomposed;  // the same drift rebuilt from (u, theta)
  ControlPoint u;
  double theta = 0.0;
};

DriftDecomposition prelimit_drift(const StaticData& s, const ScaleData& d, const Vec& x_hat, const Vec& z_hat);

using ScalarField = std::function<double(const Vec&)>;

double prelimit_generator_apply(const ScalarField& f, const StaticData& s, const ScaleData& d,
                                const Vec& x_hat, const Vec& z_hat);

}  // namespace hwnet
