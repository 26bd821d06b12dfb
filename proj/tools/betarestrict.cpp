// betarestrict command-line tool: fit, simulate, bootstrap, replay.

#include "betarestrict/errors.hpp"
#include "betarestrict/experiments.hpp"
#include "betarestrict/io.hpp"
#include "betarestrict/iwls.hpp"
#include "betarestrict/mcmc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace br = betarestrict;
using nlohmann::json;

namespace {

constexpr const char* kSeedEnv = "BETARESTRICT_SEED";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

br::RidgeRule parse_ridge_rule(const std::string& s) {
  const std::string l = lower(s);
  if (l == "max-eigen") return br::RidgeRule::MaxEigen;
  if (l == "min-eigen") return br::RidgeRule::MinEigen;
  throw UsageError("unknown ridge rule '" + s + "' (expected max-eigen or min-eigen)");
}

std::vector<br::Method> parse_methods(const std::vector<std::string>& labels) {
  std::vector<br::Method> out;
  for (const auto& l : labels) {
    const br::Method m = br::parse_method(l);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

std::vector<std::string> method_labels(const std::vector<br::Method>& ms) {
  std::vector<std::string> out;
  for (auto m : ms) out.emplace_back(lower(std::string(br::to_string(m))));
  return out;
}

br::BayesOptions bayes_from(const json& cfg) {
  br::BayesOptions b;
  b.total_samples = cfg.at("samples").get<int>();
  b.burn_in = cfg.at("burnin").get<int>();
  b.correction = br::parse_proposal_correction(cfg.at("proposal_correction").get<std::string>());
  b.prior_scale = cfg.value("prior_scale", 1.0);
  if (b.total_samples < 2) throw UsageError("--samples must be at least 2");
  if (b.burn_in < 0 || b.burn_in >= b.total_samples) throw UsageError("--burnin must lie in [0, samples)");
  return b;
}

json make_manifest(const std::string& command, const json& config) {
  return json{{"command", command},
              {"config", config},
              {"seed", config.at("seed")},
              {"tool_version", BETARESTRICT_VERSION}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw br::DomainError("cannot write '" + path + "'");
  out << content;
}

// Timing and worker count live beside the outputs, never inside them, so
// the data files stay byte-identical across reruns.
void write_run_record(const std::string& out, const json& manifest, double seconds, int threads,
                      const std::vector<std::string>& outputs) {
  json record = manifest;
  record["timing_seconds"] = seconds;
  record["threads"] = threads;
  record["outputs"] = outputs;
  write_file(out + ".manifest.json", record.dump(2) + "\n");
}

br::Dataset load_dataset(const json& cfg) {
  br::io::DatasetSpec spec;
  spec.response = cfg.at("response").get<std::string>();
  spec.gamma = cfg.at("gamma").get<double>();
  spec.intercept = cfg.at("intercept").get<bool>();
  return br::io::dataset_from_csv(br::io::read_csv_file(cfg.at("data").get<std::string>()), spec);
}

br::ConstraintSet load_constraints(const json& cfg, const br::Dataset& data) {
  if (!cfg.contains("constraints") || cfg.at("constraints").is_null()) return {};
  return br::io::read_constraints_file(cfg.at("constraints").get<std::string>(), data.p(),
                                       cfg.at("intercept").get<bool>());
}

// ---- fit

int run_fit(const json& cfg, const std::optional<std::string>& out) {
  const auto start = std::chrono::steady_clock::now();
  const br::Dataset data = load_dataset(cfg);
  const br::ConstraintSet cs = load_constraints(cfg, data);
  const br::Method method = br::parse_method(cfg.at("method").get<std::string>());
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const int chains = cfg.at("chains").get<int>();
  if (chains < 1) throw UsageError("--chains must be at least 1");

  const br::FitResult bmle = br::fit_bmle(data);
  br::FitResult fit;
  switch (method) {
    case br::Method::BMLE:
      fit = bmle;
      break;
    case br::Method::BRE: {
      double k;
      if (!cfg.at("ridge_k").is_null()) {
        k = cfg.at("ridge_k").get<double>();
      } else {
        k = br::ridge_k(data, bmle, parse_ridge_rule(cfg.at("ridge_rule").get<std::string>())).k;
      }
      fit = br::fit_ridge(data, bmle, k);
      break;
    }
    case br::Method::BBUNE:
    case br::Method::BBIRE: {
      br::ConstraintSet region = cs;
      if (method == br::Method::BBIRE && cs.empty()) {
        throw UsageError("method bbire needs a constraints file (--constraints)");
      }
      if (method == br::Method::BBUNE) region = br::ConstraintSet::unconstrained(data.p());
      const br::BayesOptions bayes = bayes_from(cfg);
      if (chains == 1) {
        fit = br::fit_bayes(data, bmle, region, bayes, seed);
      } else {
        fit = br::summarize(br::run_overdispersed_chains(data, bmle, region, bayes, seed, chains), method);
      }
      fit.method = method;
      break;
    }
  }

  json doc = br::io::fit_to_json(fit, data.column_names);
  const json manifest = make_manifest("fit", cfg);
  doc["manifest"] = manifest;
  const std::string text = doc.dump(2) + "\n";
  if (!out) {
    std::cout << text;
    return 0;
  }
  const std::string path = *out + ".json";
  write_file(path, text);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_record(*out, manifest, secs, 1, {path});
  std::cerr << "wrote " << path << "\n";
  return 0;
}

// ---- simulate

br::ScenarioConfig scenario_from(const json& cfg) {
  const std::string preset = lower(cfg.at("preset").get<std::string>());
  br::Scenario s;
  if (preset == "a") {
    s = br::Scenario::A;
  } else if (preset == "b") {
    s = br::Scenario::B;
  } else {
    throw UsageError("unknown preset '" + preset + "' (expected a or b)");
  }
  br::ScenarioConfig c = br::scenario_preset(s, cfg.at("rho").get<double>(), cfg.at("n").get<int>(),
                                             cfg.at("gamma").get<double>());
  c.reps = cfg.at("reps").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  c.estimators = parse_methods(cfg.at("estimators").get<std::vector<std::string>>());
  c.ridge_rule = parse_ridge_rule(cfg.at("ridge_rule").get<std::string>());
  c.bayes = bayes_from(cfg);
  return c;
}

std::string scenario_title(const json& cfg, const br::MetricsTable& table) {
  std::ostringstream t;
  t << "Scenario " << static_cast<char>(std::toupper(cfg.at("preset").get<std::string>()[0]))
    << ": rho = " << cfg.at("rho").dump() << ", n = " << cfg.at("n").dump() << ", gamma = " << cfg.at("gamma").dump()
    << " (" << table.completed << " replications)";
  return t.str();
}

int run_simulate(const json& cfg, const std::string& out, int threads) {
  const auto start = std::chrono::steady_clock::now();
  br::ScenarioConfig config = scenario_from(cfg);
  config.threads = threads;
  if (config.off_grid()) std::cerr << "warning: rho " << config.rho << " is off the preset grid\n";
  const br::MetricsTable table = br::run_replications(config);

  const json manifest = make_manifest("simulate", cfg);
  std::ostringstream metrics, tsre, md;
  br::io::write_metrics_csv(metrics, table, manifest);
  br::io::write_tsre_csv(tsre, table, manifest);
  br::io::write_metrics_markdown(md, table, manifest, scenario_title(cfg, table));
  const std::vector<std::string> paths{out + "_metrics.csv", out + "_tsre.csv", out + ".md"};
  write_file(paths[0], metrics.str());
  write_file(paths[1], tsre.str());
  write_file(paths[2], md.str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_record(out, manifest, secs, threads, paths);
  for (const auto& f : table.failures) std::cerr << "replication " << f.rep << " failed: " << f.message << "\n";
  for (const auto& p : paths) std::cerr << "wrote " << p << "\n";
  return 0;
}

// ---- bootstrap

int run_bootstrap(const json& cfg, const std::string& out, int threads) {
  const auto start = std::chrono::steady_clock::now();
  br::BootstrapConfig bc;
  bc.estimators = parse_methods(cfg.at("estimators").get<std::vector<std::string>>());
  const bool wants_bbire = std::find(bc.estimators.begin(), bc.estimators.end(), br::Method::BBIRE) != bc.estimators.end();
  if (wants_bbire && cfg.at("constraints").is_null()) {
    throw UsageError("bootstrap: the bbire estimator needs --constraints <file.json>; "
                     "pass one or drop bbire with --estimators");
  }
  const br::Dataset data = load_dataset(cfg);
  const br::ConstraintSet cs = load_constraints(cfg, data);
  bc.sample_size = cfg.at("size").get<int>();
  bc.reps = cfg.at("reps").get<int>();
  bc.seed = cfg.at("seed").get<std::uint64_t>();
  bc.ridge_rule = parse_ridge_rule(cfg.at("ridge_rule").get<std::string>());
  bc.bayes = bayes_from(cfg);
  bc.threads = threads;
  const br::MetricsTable table = br::bootstrap_study(data, cs, bc);

  const json manifest = make_manifest("bootstrap", cfg);
  std::ostringstream metrics, tsre, md;
  br::io::write_metrics_csv(metrics, table, manifest);
  br::io::write_tsre_csv(tsre, table, manifest);
  std::ostringstream title;
  title << "Bootstrap: " << table.completed << " resamples of size " << bc.sample_size << " from " << data.n()
        << " observations";
  br::io::write_bootstrap_markdown(md, table, manifest, title.str());
  const std::vector<std::string> paths{out + "_metrics.csv", out + "_tsre.csv", out + ".md"};
  write_file(paths[0], metrics.str());
  write_file(paths[1], tsre.str());
  write_file(paths[2], md.str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_record(out, manifest, secs, threads, paths);
  for (const auto& f : table.failures) std::cerr << "replication " << f.rep << " failed: " << f.message << "\n";
  for (const auto& p : paths) std::cerr << "wrote " << p << "\n";
  return 0;
}

int dispatch(const std::string& command, const json& cfg, const std::optional<std::string>& out, int threads) {
  if (command == "fit") return run_fit(cfg, out);
  if (!out) throw UsageError(command + " needs --out");
  if (command == "simulate") return run_simulate(cfg, *out, threads);
  if (command == "bootstrap") return run_bootstrap(cfg, *out, threads);
  throw UsageError("manifest names unknown command '" + command + "'");
}

// Shared MCMC flags.
struct McmcFlags {
  int samples = 10000;
  int burnin = 1000;
  std::string correction = "symmetric-approx";
  double prior_scale = 1.0;

  void add(CLI::App* app) {
    app->add_option("--samples", samples, "MCMC draws per chain, burn-in included")->capture_default_str();
    app->add_option("--burnin", burnin, "draws discarded at the start")->capture_default_str();
    app->add_option("--proposal-correction", correction, "symmetric-approx | estimated-constants")
        ->capture_default_str();
    app->add_option("--prior-scale", prior_scale, "g in the prior covariance g (X'X)^-1")->capture_default_str();
  }
  void echo(json& cfg) const {
    cfg["samples"] = samples;
    cfg["burnin"] = burnin;
    cfg["proposal_correction"] = correction;
    cfg["prior_scale"] = prior_scale;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beta regression under linear inequality restrictions"};
  app.set_version_flag("--version", std::string(BETARESTRICT_VERSION));
  app.set_config("--config", "", "TOML/INI file with option defaults (flags win)");
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;

  // fit
  auto* fit = app.add_subcommand("fit", "fit one estimator to a CSV dataset");
  std::string data_path, response = "y", method = "bmle", constraints_path, ridge_rule = "max-eigen";
  double gamma = 0.0;
  bool intercept_fit = true;
  std::optional<double> ridge_k_value;
  int chains = 1;
  McmcFlags fit_mcmc;
  fit->add_option("--data", data_path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  fit->add_option("--response", response, "response column name")->capture_default_str();
  fit->add_option("--gamma", gamma, "known precision parameter")->required();
  fit->add_option("--method", method, "bmle | bre | bbune | bbire")->capture_default_str();
  fit->add_option("--constraints", constraints_path, "JSON restriction rows")->check(CLI::ExistingFile);
  fit->add_flag("--intercept,!--no-intercept", intercept_fit, "prepend a ones column (default on)");
  fit->add_option("--ridge-rule", ridge_rule, "max-eigen | min-eigen")->capture_default_str();
  fit->add_option("--ridge-k", ridge_k_value, "fixed ridge parameter (overrides --ridge-rule)");
  fit->add_option("--chains", chains, "overdispersed chains; more than one reports R-hat")->capture_default_str();
  fit->add_option("--seed", seed, "RNG seed")->envname(kSeedEnv)->capture_default_str();
  fit->add_option("--out", out, "output prefix; prints to stdout when omitted");
  fit_mcmc.add(fit);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a Scenario A/B simulation cell");
  std::string preset = "a";
  double rho = 0.0, sim_gamma = 5.0;
  int n = 20, reps = 100;
  std::vector<std::string> sim_estimators;
  std::string sim_ridge = "max-eigen";
  McmcFlags sim_mcmc;
  sim->add_option("--preset", preset, "a | b")->capture_default_str();
  sim->add_option("--rho", rho, "covariate correlation")->capture_default_str();
  sim->add_option("--n", n, "observations per replication")->capture_default_str();
  sim->add_option("--gamma", sim_gamma, "precision parameter")->capture_default_str();
  sim->add_option("--reps", reps, "replications")->capture_default_str();
  sim->add_option("--estimators", sim_estimators, "comma list; defaults to the preset's")->delimiter(',');
  sim->add_option("--ridge-rule", sim_ridge, "max-eigen | min-eigen")->capture_default_str();
  sim->add_option("--seed", seed, "RNG seed")->envname(kSeedEnv)->capture_default_str();
  sim->add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
  sim->add_option("--out", out, "output prefix")->required();
  sim_mcmc.add(sim);

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "case-resampling comparison of the estimators");
  std::string boot_data, boot_response = "y", boot_constraints, boot_ridge = "min-eigen";
  double boot_gamma = 0.0;
  bool intercept_boot = true;
  int size = 30, boot_reps = 100;
  std::vector<std::string> boot_estimators{"bmle", "bre", "bbune", "bbire"};
  McmcFlags boot_mcmc;
  boot->add_option("--data", boot_data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  boot->add_option("--response", boot_response, "response column name")->capture_default_str();
  boot->add_option("--gamma", boot_gamma, "known precision parameter")->required();
  boot->add_option("--constraints", boot_constraints, "JSON restriction rows")->check(CLI::ExistingFile);
  boot->add_flag("--intercept,!--no-intercept", intercept_boot, "prepend a ones column (default on)");
  boot->add_option("--size", size, "bootstrap sample size")->capture_default_str();
  boot->add_option("--reps", boot_reps, "bootstrap replications")->capture_default_str();
  boot->add_option("--estimators", boot_estimators, "comma list")->delimiter(',')->capture_default_str();
  boot->add_option("--ridge-rule", boot_ridge, "max-eigen | min-eigen")->capture_default_str();
  boot->add_option("--seed", seed, "RNG seed")->envname(kSeedEnv)->capture_default_str();
  boot->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  boot->add_option("--out", out, "output prefix")->required();
  boot_mcmc.add(boot);

  // replay
  auto* replay = app.add_subcommand("replay", "rerun a command from its manifest");
  std::string manifest_path;
  replay->add_option("manifest", manifest_path, "a .manifest.json file or a fit result")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", out, "output prefix (required for simulate/bootstrap)");
  replay->add_option("--threads", threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::optional<std::string> out_opt;
    if (!out.empty()) out_opt = out;

    if (fit->parsed()) {
      json cfg{{"data", data_path},
               {"response", response},
               {"gamma", gamma},
               {"method", lower(method)},
               {"constraints", constraints_path.empty() ? json(nullptr) : json(constraints_path)},
               {"intercept", intercept_fit},
               {"ridge_rule", ridge_rule},
               {"ridge_k", ridge_k_value ? json(*ridge_k_value) : json(nullptr)},
               {"chains", chains},
               {"seed", seed}};
      fit_mcmc.echo(cfg);
      return dispatch("fit", cfg, out_opt, threads);
    }
    if (sim->parsed()) {
      const std::string p = lower(preset);
      if (sim_estimators.empty()) {
        sim_estimators = p == "b" ? std::vector<std::string>{"bre", "bbune", "bbire"}
                                  : std::vector<std::string>{"bmle", "bbune", "bbire"};
      }
      json cfg{{"preset", p},         {"rho", rho},   {"n", n},
               {"gamma", sim_gamma},  {"reps", reps}, {"estimators", method_labels(parse_methods(sim_estimators))},
               {"ridge_rule", sim_ridge}, {"seed", seed}};
      sim_mcmc.echo(cfg);
      return dispatch("simulate", cfg, out_opt, threads);
    }
    if (boot->parsed()) {
      json cfg{{"data", boot_data},
               {"response", boot_response},
               {"gamma", boot_gamma},
               {"constraints", boot_constraints.empty() ? json(nullptr) : json(boot_constraints)},
               {"intercept", intercept_boot},
               {"size", size},
               {"reps", boot_reps},
               {"estimators", method_labels(parse_methods(boot_estimators))},
               {"ridge_rule", boot_ridge},
               {"seed", seed}};
      boot_mcmc.echo(cfg);
      return dispatch("bootstrap", cfg, out_opt, threads);
    }
    if (replay->parsed()) {
      std::ifstream in(manifest_path);
      json doc = json::parse(in);
      if (doc.contains("manifest")) doc = doc.at("manifest");
      return dispatch(doc.at("command").get<std::string>(), doc.at("config"), out_opt, threads);
    }
  } catch (const br::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
