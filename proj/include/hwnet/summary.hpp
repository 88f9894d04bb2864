#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hwnet/stats.hpp"
#include "hwnet/types.hpp"

namespace hwnet {

// Panel of time-averaged functionals shared by the CTMC and SDE simulators.
enum Functional : int {
  kPositivePart = 0,  // <e,x>^+
  kNegativePart,      // <e,x>^-
  kPositiveSquare,
  kNegativeSquare,
  kIdle,              // <e,y>
  kWeightedIdle,      // <e,y> + <e, B1^{-1} B2 y>
  kThetaPositive,     // indicator of simultaneous queueing and idleness
  kNorm,              // ||x||_1
  kClassBase,         // followed by one coordinate per class
};

struct PathSummary {
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double burn_in = 0.0;
  double observed_time = 0.0;
  long steps = 0;
  bool transience_suspected = false;
  bool step_warning = false;
  double max_drift_step = 0.0;

  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<std::vector<double>> batches;  // per functional

  // Quantiles at 0.5, 0.9, 0.99.
  std::vector<double> quantile_levels;
  std::vector<double> positive_quantiles;
  std::vector<double> negative_quantiles;
  std::vector<std::vector<double>> class_quantiles;

  std::vector<double> tail_radii;
  std::vector<double> tail_fraction;  // time fraction with ||x||_1 > r
  std::vector<long> tail_entries;     // upcrossings of r

  std::vector<double> trace_time;
  std::vector<double> trace_total;  // <e,x> in unscaled units for the CTMC

  Vec final_state;
};

int functional_index(const PathSummary& s, const std::string& name);

struct SummaryOptions {
  double horizon = 0.0;
  double burn_in = 0.0;
  int batches = 20;
  std::vector<double> tail_radii;  // default grid when empty
  double trace_interval = 0.0;     // horizon/200 when zero
};

std::vector<double> default_tail_radii();

class SummaryBuilder {
 public:
  SummaryBuilder(int m, const SummaryOptions& opt);

  // The state (scaled x, idle totals, theta flag) is held on [t0, t1).
  void hold(const Vec& x, double idle, double weighted_idle, bool theta_positive, double t0, double t1);
  // Records trace samples on grid times in [t0, t1) with the given value.
  void trace(double value, double t0, double t1);

  PathSummary finish(std::uint64_t seed, long steps, const Vec& final_state);

 private:
  int m_;
  SummaryOptions opt_;
  BatchAccumulator acc_;
  Histogram total_hist_;
  std::vector<Histogram> class_hist_;
  std::vector<double> values_;
  std::vector<double> tail_bins_;
  std::vector<long> tail_entries_;
  double prev_norm_ = -1.0;
  double next_trace_ = 0.0;
  std::vector<double> trace_t_, trace_v_;
};

nlohmann::json to_json(const PathSummary& s);

}  // namespace hwnet
