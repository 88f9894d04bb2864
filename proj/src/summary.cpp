#include "hwnet/summary.hpp"

#include <algorithm>
#include <cmath>

namespace hwnet {

namespace {

const std::vector<double> kLevels = {0.5, 0.9, 0.99};

}  // namespace

int functional_index(const PathSummary& s, const std::string& name) {
  for (size_t k = 0; k < s.names.size(); ++k)
    if (s.names[k] == name) return static_cast<int>(k);
  return -1;
}

std::vector<double> default_tail_radii() {
  std::vector<double> r;
  for (int k = 1; k <= 160; ++k) r.push_back(0.25 * k);
  return r;
}

SummaryBuilder::SummaryBuilder(int m, const SummaryOptions& opt)
    : m_(m),
      opt_(opt),
      acc_(kClassBase + m, opt.burn_in, opt.horizon, opt.batches),
      total_hist_(-60.0, 60.0, 0.02),
      values_(kClassBase + m, 0.0) {
  if (opt_.tail_radii.empty()) opt_.tail_radii = default_tail_radii();
  std::sort(opt_.tail_radii.begin(), opt_.tail_radii.end());
  if (opt_.trace_interval <= 0.0) opt_.trace_interval = opt_.horizon / 200.0;
  class_hist_.assign(m, Histogram(-60.0, 60.0, 0.02));
  tail_bins_.assign(opt_.tail_radii.size() + 1, 0.0);
  tail_entries_.assign(opt_.tail_radii.size(), 0);
  next_trace_ = opt_.burn_in;
}

void SummaryBuilder::hold(const Vec& x, double idle, double weighted_idle, bool theta_positive,
                          double t0, double t1) {
  const double total = x.sum();
  const double norm = x.lpNorm<1>();
  const auto& radii = opt_.tail_radii;
  const bool observed = t1 > opt_.burn_in && t0 < opt_.horizon;
  if (observed && t0 >= opt_.burn_in && prev_norm_ >= 0.0 && norm > prev_norm_) {
    auto lo = std::lower_bound(radii.begin(), radii.end(), prev_norm_);
    auto hi = std::lower_bound(radii.begin(), radii.end(), norm);
    for (auto it = lo; it != hi; ++it) ++tail_entries_[it - radii.begin()];
  }
  prev_norm_ = norm;
  if (!observed) return;

  values_[kPositivePart] = std::max(total, 0.0);
  values_[kNegativePart] = std::max(-total, 0.0);
  values_[kPositiveSquare] = values_[kPositivePart] * values_[kPositivePart];
  values_[kNegativeSquare] = values_[kNegativePart] * values_[kNegativePart];
  values_[kIdle] = idle;
  values_[kWeightedIdle] = weighted_idle;
  values_[kThetaPositive] = theta_positive ? 1.0 : 0.0;
  values_[kNorm] = norm;
  for (int i = 0; i < m_; ++i) values_[kClassBase + i] = x[i];
  acc_.add(values_.data(), t0, t1);

  const double dt = std::min(t1, opt_.horizon) - std::max(t0, opt_.burn_in);
  total_hist_.add(total, dt);
  for (int i = 0; i < m_; ++i) class_hist_[i].add(x[i], dt);
  const size_t k = std::lower_bound(radii.begin(), radii.end(), norm) - radii.begin();
  tail_bins_[k] += dt;
}

void SummaryBuilder::trace(double value, double t0, double t1) {
  t1 = std::min(t1, opt_.horizon);
  while (next_trace_ >= t0 && next_trace_ < t1) {
    trace_t_.push_back(next_trace_);
    trace_v_.push_back(value);
    next_trace_ += opt_.trace_interval;
  }
}

PathSummary SummaryBuilder::finish(std::uint64_t seed, long steps, const Vec& final_state) {
  PathSummary s;
  s.seed = seed;
  s.horizon = opt_.horizon;
  s.burn_in = opt_.burn_in;
  s.observed_time = acc_.observed();
  s.steps = steps;
  s.names = {"pos", "neg", "pos_sq", "neg_sq", "idle", "weighted_idle", "theta_positive", "norm"};
  for (int i = 0; i < m_; ++i) s.names.push_back("x" + std::to_string(i + 1));
  for (int k = 0; k < static_cast<int>(s.names.size()); ++k) {
    s.batches.push_back(acc_.batch_means(k));
    const auto& b = s.batches.back();
    double mean = 0.0;
    for (double v : b) mean += v;
    s.means.push_back(b.empty() ? 0.0 : mean / b.size());
  }
  s.quantile_levels = kLevels;
  for (double p : kLevels) {
    if (total_hist_.total() <= 0) {
      s.positive_quantiles.push_back(0.0);
      s.negative_quantiles.push_back(0.0);
      continue;
    }
    s.positive_quantiles.push_back(std::max(total_hist_.quantile(p), 0.0));
    s.negative_quantiles.push_back(std::max(-total_hist_.quantile(1.0 - p), 0.0));
  }
  for (int i = 0; i < m_; ++i) {
    std::vector<double> q;
    for (double p : kLevels) q.push_back(class_hist_[i].total() > 0 ? class_hist_[i].quantile(p) : 0.0);
    s.class_quantiles.push_back(q);
  }
  s.tail_radii = opt_.tail_radii;
  s.tail_entries = tail_entries_;
  s.tail_fraction.assign(s.tail_radii.size(), 0.0);
  double above = 0.0;
  for (size_t k = s.tail_radii.size(); k-- > 0;) {
    above += tail_bins_[k + 1];
    s.tail_fraction[k] = s.observed_time > 0 ? above / s.observed_time : 0.0;
  }
  s.trace_time = trace_t_;
  s.trace_total = trace_v_;
  s.final_state = final_state;
  return s;
}

nlohmann::json to_json(const PathSummary& s) {
  using nlohmann::json;
  json means = json::object();
  for (size_t k = 0; k < s.names.size(); ++k) {
    const Estimate e = sample_estimate(s.batches[k]);
    means[s.names[k]] = {{"mean", s.means[k]}, {"std_error", e.std_error}, {"batches", e.samples}};
  }
  json quant = {{"levels", s.quantile_levels},
                {"pos", s.positive_quantiles},
                {"neg", s.negative_quantiles},
                {"classes", s.class_quantiles}};
  std::vector<double> fin(s.final_state.data(), s.final_state.data() + s.final_state.size());
  return json{{"seed", s.seed},
              {"horizon", s.horizon},
              {"burn_in", s.burn_in},
              {"observed_time", s.observed_time},
              {"steps", s.steps},
              {"transience_suspected", s.transience_suspected},
              {"step_warning", s.step_warning},
              {"time_averages", means},
              {"quantiles", quant},
              {"final_state", fin}};
}

}  // namespace hwnet
