#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hwnet/certify.hpp"
#include "hwnet/config.hpp"
#include "hwnet/error.hpp"
#include "hwnet/experiments.hpp"

using nlohmann::json;
using namespace hwnet;

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

json statics_json(const StaticData& s, std::optional<long> n, bool shifted) {
  json j;
  j["network_class"] = to_string(s.network_class.primary());
  j["xi"] = vec_json(s.fluid.xi);
  j["x_star"] = vec_json(s.fluid.x_star);
  j["z_star"] = vec_json(s.fluid.z_star);
  j["fluid_residual"] = s.fluid.residual;
  j["basis_pool"] = s.phi.root_pool() + 1;
  j["b1"] = mat_json(s.drift.b1);
  j["b2"] = mat_json(s.drift.b2);
  j["ell"] = vec_json(s.ell);
  j["rho"] = s.rho;
  if (s.network_class.primary() != NetworkClass::Kind::GeneralTree) {
    j["theta0"] = theta0(s);
    if (s.rho > 0) j["eps"] = limit_epsilon(s);
  }
  if (n) {
    const ScaleData d = at_scale(s, *n, shifted);
    json k;
    k["n"] = *n;
    k["servers"] = d.params.servers;
    k["rho_n"] = d.rho;
    k["ell_n"] = vec_json(d.ell);
    k["x_bar"] = vec_json(d.centering.x_bar);
    k["z_bar"] = vec_json(d.centering.z_bar);
    k["shifted"] = shifted;
    if (s.network_class.primary() != NetworkClass::Kind::GeneralTree && d.rho > 0) {
      k["eps_n"] = prelimit_epsilon(s, d);
      const KappaBounds kb = kappa_and_n0(s, *n);
      k["kappa"] = kb.kappa;
      k["kappa_tilde"] = kb.kappa_tilde;
      if (kb.n0) k["n0"] = *kb.n0;
    }
    j["scale"] = k;
  }
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out << text;
}

std::string path_csv(const CtmcPath& p) {
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 0; i < p.states.front().size(); ++i) out << ",x" << i + 1;
  for (std::size_t e = 0; e < p.allocations.front().size(); ++e) out << ",z" << e + 1;
  out << '\n';
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    out << p.times[k];
    for (long v : p.states[k]) out << ',' << v;
    for (long v : p.allocations[k]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string path_csv(const SdePath& p) {
  std::ostringstream out;
  out.precision(10);
  out << "t";
  for (int i = 0; i < p.states.front().size(); ++i) out << ",x" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    out << p.times[k];
    for (int i = 0; i < p.states[k].size(); ++i) out << ',' << p.states[k][i];
    out << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel server networks in the Halfin-Whitt regime"};
  app.require_subcommand(1);

  std::string config_path;
  long n = 0;
  bool shifted = false;
  auto* statics = app.add_subcommand("statics", "Fluid solution, drift matrices and spare capacity");
  statics->add_option("config", config_path, "network JSON")->required();
  statics->add_option("--n", n, "also report the n-th system");
  statics->add_flag("--shifted", shifted, "use the shifted centering at n");

  std::string policy, control = "constant:1,0/1,0", dump_path;
  double horizon = 1000.0, step = 0.0;
  int reps = 1;
  std::uint64_t seed = 1;
  auto* ctmc = app.add_subcommand("simulate-ctmc", "Simulate the n-th system under a policy");
  ctmc->add_option("config", config_path)->required();
  ctmc->add_option("--n", n)->required();
  ctmc->add_option("--policy", policy, "swc (default) | swc-fresh | priority-n | lqfs-lb | constant:<uc>/<us>");
  ctmc->add_option("--horizon", horizon);
  ctmc->add_option("--reps", reps);
  ctmc->add_option("--seed", seed);
  ctmc->add_flag("--shifted", shifted);
  ctmc->add_option("--dump-path", dump_path, "CSV of the first replication's path");

  auto* sde = app.add_subcommand("simulate-sde", "Simulate the limiting diffusion under a Markov control");
  sde->add_option("config", config_path)->required();
  sde->add_option("--control", control, "constant:<uc>/<us> | mimic-swc | random-cells:<seed>");
  sde->add_option("--horizon", horizon);
  sde->add_option("--step", step, "Euler step (default 0.01 / max mu)");
  sde->add_option("--reps", reps);
  sde->add_option("--seed", seed);
  sde->add_option("--dump-path", dump_path);

  bool limit = false, transience = false, no_guard = false;
  double radius = 200.0;
  std::string theta_text = "auto";
  double beta = 0.0;
  auto* certify = app.add_subcommand("certify", "Numerical drift or transience certificate");
  certify->add_option("config", config_path)->required();
  auto* limit_opt = certify->add_flag("--limit", limit, "certify the diffusion");
  auto* n_opt = certify->add_option("--n", n, "certify the n-th system");
  limit_opt->excludes(n_opt);
  certify->add_option("--radius", radius);
  certify->add_option("--theta", theta_text, "value or auto (class threshold)");
  certify->add_flag("--transience", transience, "transience certificate (negative spare capacity)");
  certify->add_option("--beta", beta, "transience parameter (default half the admissible bound)");
  certify->add_flag("--no-n0-guard", no_guard, "report instead of refusing when n <= n0");

  std::string kind, csv_path;
  std::vector<long> ns;
  std::vector<std::string> controls;
  double tolerance = 0.05, sde_horizon = 0.0;
  auto* experiment = app.add_subcommand("experiment", "Statistical experiments; exit code 0 iff the verdict passes");
  experiment->add_option("kind", kind)->required()->check(CLI::IsMember({"idleness", "tails", "transience", "interchange"}));
  experiment->add_option("config", config_path)->required();
  experiment->add_option("--n", ns, "n grid");
  experiment->add_option("--policy", policy);
  experiment->add_option("--control", controls, "diffusion controls");
  experiment->add_option("--horizon", horizon);
  experiment->add_option("--sde-horizon", sde_horizon, "interchange: diffusion horizon (default --horizon)");
  experiment->add_option("--step", step);
  experiment->add_option("--reps", reps);
  experiment->add_option("--seed", seed);
  experiment->add_option("--tolerance", tolerance, "idleness: relative tolerance");
  experiment->add_option("--csv", csv_path, "CSV of the estimates");

  CLI11_PARSE(app, argc, argv);

  try {
    const NetworkConfig cfg = load_config(config_path);
    const StaticData s = compute_statics(cfg.topology, cfg.params);

    if (statics->parsed()) {
      json j = statics_json(s, n > 0 ? std::optional<long>(n) : std::nullopt, shifted);
      j["config_digest"] = cfg.digest;
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (ctmc->parsed()) {
      const ScaleData d = at_scale(s, n, shifted);
      CtmcOptions opt;
      opt.horizon = horizon;
      const PolicySpec spec = parse_policy(policy.empty() ? "swc" : policy, s.topology);
      json out = json::array();
      for (int r = 0; r < reps; ++r) {
        opt.keep_path = r == 0 && !dump_path.empty();
        const CtmcRun run = simulate_ctmc(s, d, spec, centered_state(d), opt, replication_seed(seed, r));
        if (run.path) write_file(dump_path, path_csv(*run.path));
        out.push_back(to_json(run.summary));
      }
      std::cout << json{{"config_digest", cfg.digest}, {"n", n}, {"policy", describe(spec)}, {"runs", out}}.dump(2)
                << '\n';
      return 0;
    }

    if (sde->parsed()) {
      SdeOptions opt;
      opt.horizon = horizon;
      opt.step = step;
      const MarkovControl u = make_control(control, s);
      json out = json::array();
      for (int r = 0; r < reps; ++r) {
        opt.keep_path = r == 0 && !dump_path.empty();
        const SdeRun run = simulate_sde(s, u, true, Vec::Zero(s.topology.classes()), opt, replication_seed(seed, r));
        if (run.path) write_file(dump_path, path_csv(*run.path));
        out.push_back(to_json(run.summary));
      }
      std::cout << json{{"config_digest", cfg.digest}, {"control", control}, {"runs", out}}.dump(2) << '\n';
      return 0;
    }

    if (certify->parsed()) {
      SamplePlan plan;
      plan.radius = radius;
      if (transience) {
        const double b = beta > 0 ? beta : 0.5 * beta_upper_bound(s);
        const TransienceReport r =
            transience_certificate(s, b, plan, n > 0 ? std::optional<long>(n) : std::nullopt);
        std::cout << to_json(r).dump(2) << '\n';
        return r.passed ? 0 : 1;
      }
      if (!limit && n <= 0) throw Error(ErrorCode::InvalidInput, "certify needs --limit or --n");
      std::optional<double> theta;
      if (theta_text != "auto") theta = std::stod(theta_text);
      CertifyOptions opt;
      opt.plan = plan;
      DriftCertificate c;
      if (limit) {
        c = certify_drift_diffusion(s, limit_config(s, theta), opt);
      } else {
        const ScaleData d = at_scale(s, n, true);
        c = certify_drift_prelimit(s, n, prelimit_config(s, d, theta), opt, !no_guard);
      }
      std::cout << to_json(c).dump(2) << '\n';
      return c.passed ? 0 : 1;
    }

    if (experiment->parsed()) {
      ExperimentReport rep;
      if (kind == "idleness") {
        IdlenessOptions opt;
        if (!controls.empty()) opt.controls = controls;
        opt.horizon = horizon;
        if (step > 0) opt.step = step;
        opt.reps = reps;
        opt.seed = seed;
        opt.tolerance = tolerance;
        rep = idleness_identity(cfg, opt);
      } else if (kind == "tails") {
        TailExperimentOptions opt;
        if (!ns.empty()) opt.ns = ns;
        if (!policy.empty()) opt.policy = policy;
        opt.horizon = horizon;
        opt.reps = reps;
        opt.seed = seed;
        rep = tail_experiment(cfg, opt);
      } else if (kind == "transience") {
        TransienceOptions opt;
        if (!ns.empty()) opt.n = ns.front();
        if (!policy.empty()) opt.policy = policy;
        opt.horizon = horizon;
        opt.reps = reps;
        opt.seed = seed;
        rep = transience_slope(cfg, opt);
      } else {
        InterchangeOptions opt;
        if (!ns.empty()) opt.ns = ns;
        if (!policy.empty()) opt.policy = policy;
        if (!controls.empty()) opt.control = controls.front();
        opt.ctmc_horizon = horizon;
        opt.sde_horizon = sde_horizon > 0 ? sde_horizon : horizon;
        if (step > 0) opt.step = step;
        opt.reps = reps;
        opt.seed = seed;
        rep = interchange_of_limits(cfg, opt);
      }
      std::cout << rep.to_json().dump(2) << '\n';
      if (!csv_path.empty()) write_file(csv_path, rep.csv());
      return rep.verdict == Verdict::Pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
