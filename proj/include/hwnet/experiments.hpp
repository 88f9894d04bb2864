#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hwnet/config.hpp"
#include "hwnet/diffusion.hpp"
#include "hwnet/prelimit.hpp"
#include "hwnet/stats.hpp"

namespace hwnet {

enum class Verdict { Pass, Fail, Inconclusive, None };
const char* to_string(Verdict v);

struct ExperimentReport {
  std::string id;
  nlohmann::json inputs;
  std::vector<std::pair<std::string, Estimate>> estimates;
  nlohmann::json details;
  Verdict verdict = Verdict::None;
  std::string reason;

  const Estimate& estimate(const std::string& name) const;
  nlohmann::json to_json() const;
  // name,mean,std_error,samples,half_width
  std::string csv() const;
};

struct IdlenessOptions {
  std::vector<std::string> controls{"constant:1,0,0/1,0,0"};
  double horizon = 1e4;
  double step = 1e-2;
  int reps = 20;
  std::uint64_t seed = 1;
  double tolerance = 0.05;  // relative
};

// Long-run weighted idleness of the diffusion under each control versus rho.
ExperimentReport idleness_identity(const NetworkConfig& cfg, const IdlenessOptions& opt);

struct TailOptions {
  std::vector<double> radii;  // automatic when empty
  long min_exceedances = 100;
  double r2_min = 0.9;
};

// Least-squares fit of log P(|x|_1 > r) against r from pooled path summaries.
ExperimentReport tail_exponent(const std::vector<PathSummary>& runs, const TailOptions& opt);

struct TailExperimentOptions {
  std::vector<long> ns{100};
  std::string policy = "swc";
  double horizon = 2000.0;
  int reps = 10;
  std::uint64_t seed = 1;
  TailOptions tail;
};

// Simulates the CTMC at each n and fits tails; with two or more n also
// compares the slopes of the first and last n.
ExperimentReport tail_experiment(const NetworkConfig& cfg, const TailExperimentOptions& opt);

struct TransienceOptions {
  long n = 100;
  std::string policy = "swc";
  double horizon = 1000.0;
  int reps = 20;
  std::uint64_t seed = 1;
};

ExperimentReport transience_slope(const NetworkConfig& cfg, const TransienceOptions& opt);

struct InterchangeOptions {
  std::vector<long> ns{25, 100, 400};
  std::string policy = "priority-n";
  std::string control = "constant:1,0/1,0";
  double ctmc_horizon = 2000.0;
  double sde_horizon = 2000.0;
  double step = 1e-2;
  int reps = 10;
  std::uint64_t seed = 1;
  std::string panel_key = "neg";  // functional carrying the verdict
};

ExperimentReport interchange_of_limits(const NetworkConfig& cfg, const InterchangeOptions& opt);

// Gap sequence convention: each step may rise by at most its joint 95%
// half-width and the last gap may not exceed the first.
bool gaps_decreasing(const std::vector<double>& gaps, const std::vector<double>& half_widths);

}  // namespace hwnet
