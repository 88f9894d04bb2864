#include "hwnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hwnet/error.hpp"
#include "hwnet/lyapunov.hpp"

namespace hwnet {

using nlohmann::json;

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    default: return "none";
  }
}

const Estimate& ExperimentReport::estimate(const std::string& name) const {
  for (const auto& [key, est] : estimates)
    if (key == name) return est;
  throw Error(ErrorCode::InvalidInput, "report has no estimate '" + name + "'");
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean},
          {"std_error", finite_or_null(e.std_error)},
          {"samples", e.samples},
          {"half_width", finite_or_null(e.half_width())}};
}

double joint_half_width(const Estimate& a, const Estimate& b) {
  return std::hypot(a.half_width(), b.half_width());
}

Estimate functional_estimate(const std::vector<PathSummary>& runs, const std::string& name) {
  std::vector<std::vector<double>> groups;
  for (const auto& r : runs) groups.push_back(r.batches.at(functional_index(r, name)));
  return batch_estimate(groups);
}

std::vector<PathSummary> summaries(std::vector<CtmcRun>&& runs) {
  std::vector<PathSummary> out;
  for (auto& r : runs) out.push_back(std::move(r.summary));
  return out;
}

std::vector<PathSummary> summaries(std::vector<SdeRun>&& runs) {
  std::vector<PathSummary> out;
  for (auto& r : runs) out.push_back(std::move(r.summary));
  return out;
}

long count_flag(const std::vector<PathSummary>& runs, bool PathSummary::*flag) {
  return std::count_if(runs.begin(), runs.end(), [flag](const PathSummary& p) { return p.*flag; });
}

}  // namespace

json ExperimentReport::to_json() const {
  json j;
  j["experiment"] = id;
  j["inputs"] = inputs;
  j["estimates"] = json::object();
  for (const auto& [name, est] : estimates) j["estimates"][name] = estimate_json(est);
  j["details"] = details;
  j["verdict"] = hwnet::to_string(verdict);
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

std::string ExperimentReport::csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "name,mean,std_error,samples,half_width\n";
  for (const auto& [name, e] : estimates)
    out << name << ',' << e.mean << ',' << e.std_error << ',' << e.samples << ',' << e.half_width() << '\n';
  return out.str();
}

bool gaps_decreasing(const std::vector<double>& gaps, const std::vector<double>& half_widths) {
  if (gaps.size() < 2) return false;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k)
    if (gaps[k + 1] - gaps[k] > std::max(half_widths[k], half_widths[k + 1])) return false;
  return gaps.back() <= gaps.front();
}

ExperimentReport idleness_identity(const NetworkConfig& cfg, const IdlenessOptions& opt) {
  const StaticData s = compute_statics(cfg.topology, cfg.params);
  if (!(s.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "idleness identity needs positive spare capacity");
  if (s.network_class.primary() == NetworkClass::Kind::GeneralTree)
    throw Error(ErrorCode::NotApplicable, "idleness identity covers dominant-pool and class-dependent networks");

  ExperimentReport rep;
  rep.id = "idleness";
  rep.inputs = {{"config_digest", cfg.digest}, {"seed", opt.seed},        {"horizon", opt.horizon},
                {"step", opt.step},            {"replications", opt.reps}, {"controls", opt.controls},
                {"tolerance", opt.tolerance}};
  rep.details["rho"] = s.rho;
  rep.details["network_class"] = to_string(s.network_class.primary());

  SdeOptions so;
  so.horizon = opt.horizon;
  so.step = opt.step;
  bool ok = true;
  for (std::size_t c = 0; c < opt.controls.size(); ++c) {
    const MarkovControl control = make_control(opt.controls[c], s);
    const auto runs = summaries(simulate_sde_replications(s, control, true, Vec::Zero(s.topology.classes()), so,
                                                          opt.reps, opt.seed + c));
    const Estimate weighted = functional_estimate(runs, "weighted_idle");
    const Estimate plain = functional_estimate(runs, "neg");
    rep.estimates.emplace_back(opt.controls[c] + ":weighted_idle", weighted);
    rep.estimates.emplace_back(opt.controls[c] + ":neg", plain);
    rep.details["blowups"][opt.controls[c]] = count_flag(runs, &PathSummary::transience_suspected);
    rep.details["step_warnings"][opt.controls[c]] = count_flag(runs, &PathSummary::step_warning);
    if (std::abs(weighted.mean - s.rho) > opt.tolerance * s.rho) ok = false;
  }
  rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
  if (!ok) rep.reason = "weighted idleness differs from rho by more than the tolerance";
  return rep;
}

ExperimentReport tail_exponent(const std::vector<PathSummary>& runs, const TailOptions& opt) {
  if (runs.empty()) throw Error(ErrorCode::InvalidInput, "tail fit needs at least one path summary");
  const auto& grid = runs.front().tail_radii;
  const std::size_t G = grid.size();
  std::vector<double> fraction(G, 0.0);
  std::vector<long> entries(G, 0);
  for (const auto& r : runs) {
    if (r.tail_radii != grid) throw Error(ErrorCode::InvalidInput, "path summaries use different radii");
    for (std::size_t k = 0; k < G; ++k) {
      fraction[k] += r.tail_fraction[k] / static_cast<double>(runs.size());
      entries[k] += r.tail_entries[k];
    }
  }
  auto lookup = [&](double r) {
    for (std::size_t k = 0; k < G; ++k)
      if (std::abs(grid[k] - r) < 1e-9) return k;
    throw Error(ErrorCode::InvalidInput, "radius " + std::to_string(r) + " is not on the summary grid");
  };

  ExperimentReport rep;
  rep.id = "tails";
  rep.inputs = {{"replications", runs.size()}, {"min_exceedances", opt.min_exceedances}, {"r2_min", opt.r2_min}};
  std::vector<std::size_t> chosen;
  bool reliable = true;
  if (opt.radii.empty()) {
    // Radii at or beyond the median with enough upcrossings to estimate the tail.
    for (std::size_t k = 0; k < G; ++k)
      if (fraction[k] <= 0.5 && fraction[k] > 0.0 && entries[k] >= opt.min_exceedances) chosen.push_back(k);
    if (chosen.size() < 3)
      throw Error(ErrorCode::InsufficientTailMass, "fewer than three radii carry enough exceedances");
  } else {
    for (double r : opt.radii) chosen.push_back(lookup(r));
    std::sort(chosen.begin(), chosen.end());
    if (entries[chosen.back()] < opt.min_exceedances)
      throw Error(ErrorCode::InsufficientTailMass, "too few exceedances at the largest radius");
    reliable = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t k) { return fraction[k] <= 0.5; });
    if (std::any_of(chosen.begin(), chosen.end(), [&](std::size_t k) { return fraction[k] <= 0.0; }))
      throw Error(ErrorCode::InsufficientTailMass, "empty tail at a requested radius");
  }
  std::vector<double> xs, ys;
  for (std::size_t k : chosen) {
    xs.push_back(grid[k]);
    ys.push_back(std::log(fraction[k]));
  }
  const LineFit fit = fit_line(xs, ys);
  rep.estimates.emplace_back("slope", Estimate{fit.slope, fit.slope_se, static_cast<long>(xs.size()) - 1});
  rep.details = {{"radii", xs},        {"log_fraction", ys},     {"slope", fit.slope},
                 {"intercept", fit.intercept}, {"r2", fit.r2},  {"slope_se", fit.slope_se},
                 {"reliable", reliable}};
  if (!reliable) {
    rep.verdict = Verdict::Inconclusive;
    rep.reason = "all radii lie below the median of the norm";
  } else if (fit.slope < 0.0 && fit.r2 >= opt.r2_min) {
    rep.verdict = Verdict::Pass;
  } else {
    rep.verdict = Verdict::Fail;
    rep.reason = "tail slope not negative or fit below the R^2 threshold";
  }
  return rep;
}

ExperimentReport tail_experiment(const NetworkConfig& cfg, const TailExperimentOptions& opt) {
  const StaticData s = compute_statics(cfg.topology, cfg.params);
  const PolicySpec policy = parse_policy(opt.policy, s.topology);
  ExperimentReport rep;
  rep.id = "tails";
  rep.inputs = {{"config_digest", cfg.digest}, {"seed", opt.seed},        {"horizon", opt.horizon},
                {"replications", opt.reps},    {"policy", opt.policy},    {"n", opt.ns}};
  rep.verdict = Verdict::Pass;
  std::vector<ExperimentReport> per_n;
  for (long n : opt.ns) {
    const ScaleData d = at_scale(s, n, true);
    CtmcOptions co;
    co.horizon = opt.horizon;
    const auto runs =
        summaries(simulate_ctmc_replications(s, d, policy, centered_state(d), co, opt.reps, opt.seed));
    ExperimentReport r = tail_exponent(runs, opt.tail);
    const std::string key = "n=" + std::to_string(n);
    rep.estimates.emplace_back(key + ":slope", r.estimate("slope"));
    r.details["rho_n"] = d.rho;
    rep.details[key] = r.details;
    if (r.verdict != Verdict::Pass) {
      rep.verdict = r.verdict;
      rep.reason = key + ": " + r.reason;
    }
    per_n.push_back(std::move(r));
  }
  if (per_n.size() >= 2) {
    const Estimate& a = per_n.front().estimate("slope");
    const Estimate& b = per_n.back().estimate("slope");
    const double joint = 1.96 * std::hypot(a.std_error, b.std_error);
    rep.details["uniformity"] = {{"difference", b.mean - a.mean}, {"joint_half_width", joint},
                                 {"agree", std::abs(b.mean - a.mean) <= joint}};
  }
  return rep;
}

ExperimentReport transience_slope(const NetworkConfig& cfg, const TransienceOptions& opt) {
  const StaticData s = compute_statics(cfg.topology, cfg.params);
  const ScaleData d = at_scale(s, opt.n, false);
  const PolicySpec policy = parse_policy(opt.policy, s.topology);
  CtmcOptions co;
  co.horizon = opt.horizon;
  co.burn_in = 0.0;
  const auto runs =
      summaries(simulate_ctmc_replications(s, d, policy, centered_state(d), co, opt.reps, opt.seed));
  std::vector<double> slopes;
  for (const auto& r : runs) slopes.push_back(fit_line(r.trace_time, r.trace_total).slope);
  const Estimate slope = sample_estimate(slopes);

  ExperimentReport rep;
  rep.id = "transience";
  rep.inputs = {{"config_digest", cfg.digest}, {"seed", opt.seed}, {"horizon", opt.horizon},
                {"replications", opt.reps},    {"n", opt.n},       {"policy", opt.policy}};
  rep.estimates.emplace_back("slope", slope);
  const double lo = slope.mean - slope.half_width(), hi = slope.mean + slope.half_width();
  rep.details = {{"rho_n", d.rho}, {"ci", {lo, hi}}, {"slopes", slopes},
                 {"overflow_guard_hits", count_flag(runs, &PathSummary::transience_suspected)}};
  if (d.rho == 0.0) {
    rep.verdict = Verdict::Inconclusive;
    rep.reason = "zero spare capacity: null recurrence cannot be told apart from transience by a slope";
  } else if (d.rho < 0.0) {
    rep.verdict = lo > 0.0 ? Verdict::Pass : Verdict::Fail;
    if (lo <= 0.0) rep.reason = "slope interval does not exclude zero from below";
  } else {
    rep.verdict = (lo <= 0.0 && hi >= 0.0) ? Verdict::Pass : Verdict::Fail;
    if (rep.verdict == Verdict::Fail) rep.reason = "stable system shows a nonzero slope";
  }
  return rep;
}

ExperimentReport interchange_of_limits(const NetworkConfig& cfg, const InterchangeOptions& opt) {
  const StaticData s = compute_statics(cfg.topology, cfg.params);
  if (!(s.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "interchange needs positive spare capacity");
  const PolicySpec policy = parse_policy(opt.policy, s.topology);
  const MarkovControl control = make_control(opt.control, s);
  static const std::vector<std::string> panel{"pos", "neg", "pos_sq", "neg_sq"};

  ExperimentReport rep;
  rep.id = "interchange";
  rep.inputs = {{"config_digest", cfg.digest},   {"seed", opt.seed},       {"n", opt.ns},
                {"ctmc_horizon", opt.ctmc_horizon}, {"sde_horizon", opt.sde_horizon},
                {"step", opt.step},               {"replications", opt.reps}, {"policy", opt.policy},
                {"control", opt.control},         {"verdict_functional", opt.panel_key}};

  SdeOptions so;
  so.horizon = opt.sde_horizon;
  so.step = opt.step;
  const auto sde = summaries(
      simulate_sde_replications(s, control, true, Vec::Zero(s.topology.classes()), so, opt.reps, opt.seed));
  std::vector<Estimate> limit;
  for (const auto& f : panel) {
    limit.push_back(functional_estimate(sde, f));
    rep.estimates.emplace_back("sde:" + f, limit.back());
  }

  std::vector<double> gaps, widths;
  for (long n : opt.ns) {
    const ScaleData d = at_scale(s, n, true);
    if (!(d.rho > 0.0)) throw Error(ErrorCode::NotApplicable, "interchange needs positive spare capacity at every n");
    CtmcOptions co;
    co.horizon = opt.ctmc_horizon;
    const auto runs = summaries(
        simulate_ctmc_replications(s, d, policy, centered_state(d), co, opt.reps, opt.seed + static_cast<std::uint64_t>(n)));
    const std::string key = "n=" + std::to_string(n);
    for (std::size_t f = 0; f < panel.size(); ++f) {
      const Estimate e = functional_estimate(runs, panel[f]);
      rep.estimates.emplace_back(key + ":" + panel[f], e);
      const double gap = std::abs(e.mean - limit[f].mean);
      const double hw = joint_half_width(e, limit[f]);
      rep.details["gaps"][panel[f]].push_back(gap);
      rep.details["joint_half_widths"][panel[f]].push_back(hw);
      if (panel[f] == opt.panel_key) {
        gaps.push_back(gap);
        widths.push_back(hw);
      }
    }
  }
  rep.details["rho"] = s.rho;
  if (gaps.empty()) throw Error(ErrorCode::InvalidInput, "unknown verdict functional '" + opt.panel_key + "'");
  if (gaps.size() < 2) {
    rep.verdict = Verdict::None;
    rep.reason = "a single n carries no trend";
    return rep;
  }
  const bool decreasing = gaps_decreasing(gaps, widths);
  const bool close = gaps.back() <= 2.0 * widths.back();
  rep.details["decreasing"] = decreasing;
  rep.details["final_gap_within_two_half_widths"] = close;
  rep.verdict = decreasing && close ? Verdict::Pass : Verdict::Fail;
  if (!decreasing) rep.reason = "gap sequence is not decreasing";
  else if (!close) rep.reason = "final gap exceeds twice the joint half-width";
  return rep;
}

}  // namespace hwnet
