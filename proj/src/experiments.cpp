#include "betarestrict/experiments.hpp"

#include "betarestrict/errors.hpp"
#include "betarestrict/linalg.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace betarestrict {

namespace {

constexpr double kMaxFailureFraction = 0.10;

// Seeds for the MCMC streams are kept apart from the data-generation streams.
std::uint64_t mcmc_seed(std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x4d434d435f736565ULL;
  return detail::splitmix64(state);
}

struct RepOutcome {
  std::optional<std::map<Method, VectorXd>> estimates;
  std::string failure;
};

// Runs task(rep) for every rep on up to `threads` workers. Outcomes are
// stored by index, so the result does not depend on scheduling.
template <typename Task>
std::vector<RepOutcome> run_parallel(int reps, int threads, Task task) {
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(reps));

  std::atomic<int> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        outcomes[static_cast<std::size_t>(rep)] = task(rep);
      } catch (const Error& e) {
        outcomes[static_cast<std::size_t>(rep)].failure = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(reps);
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  return outcomes;
}

MetricsTable aggregate(const std::vector<RepOutcome>& outcomes, const std::vector<Method>& estimators,
                       const VectorXd& reference, std::vector<std::string> names) {
  MetricsTable table;
  const Index p = reference.size();
  if (static_cast<Index>(names.size()) != p) {
    names.clear();
    for (Index j = 0; j < p; ++j) names.push_back("beta" + std::to_string(j + 1));
  }
  table.coefficient_names = std::move(names);
  table.reference = reference;

  std::vector<const std::map<Method, VectorXd>*> ok;
  for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
    if (outcomes[rep].estimates) {
      ok.push_back(&*outcomes[rep].estimates);
    } else {
      table.failures.push_back({static_cast<int>(rep), outcomes[rep].failure});
    }
  }
  table.completed = static_cast<int>(ok.size());
  const int attempted = static_cast<int>(outcomes.size());
  if (ok.empty() || static_cast<double>(table.failures.size()) > kMaxFailureFraction * attempted) {
    std::string msg = std::to_string(table.failures.size()) + " of " + std::to_string(attempted) +
                      " replications failed (limit 10%)";
    if (!table.failures.empty()) msg += "; first failure (rep " + std::to_string(table.failures.front().rep) +
                                        "): " + table.failures.front().message;
    throw ReplicationError(msg, static_cast<int>(table.failures.size()), attempted);
  }

  MseTable mse_table;
  for (Method m : estimators) {
    MatrixXd est(static_cast<Index>(ok.size()), p);
    for (std::size_t k = 0; k < ok.size(); ++k) est.row(static_cast<Index>(k)) = ok[k]->at(m).transpose();
    EstimatorMetrics row;
    row.method = m;
    row.mean = est.colwise().mean().transpose();
    if (est.rows() > 1) {
      row.sd = ((est.rowwise() - row.mean.transpose()).colwise().squaredNorm() / static_cast<double>(est.rows() - 1))
                   .cwiseSqrt()
                   .transpose();
    } else {
      row.sd = VectorXd::Zero(p);
    }
    row.mse = mse(est, reference);
    mse_table[m] = row.mse;
    table.rows.push_back(std::move(row));
  }

  const bool has_benchmark = mse_table.contains(Method::BBIRE);
  std::map<Method, VectorXd> re;
  std::map<Method, double> total;
  if (has_benchmark) {
    re = relative_efficiency(mse_table, Method::BBIRE);
    total = tsre(mse_table, Method::BBIRE);
  }
  for (auto& row : table.rows) {
    row.re = has_benchmark ? re.at(row.method) : VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    row.tsre = has_benchmark ? total.at(row.method) : std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("scenario: rho must lie in [0, 1)");
  if (beta_true.size() < 1) throw ShapeError("scenario: beta_true is empty");
  if (n <= beta_true.size()) throw DomainError("scenario: n must exceed the number of coefficients");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("scenario: gamma must be positive");
  if (reps < 1) throw DomainError("scenario: reps must be at least 1");
  if (estimators.empty()) throw DomainError("scenario: no estimators requested");
  if (!constraints.empty() && constraints.p() != beta_true.size()) {
    throw ShapeError("scenario: constraints do not match the coefficient count");
  }
  if (bayes.burn_in < 0 || bayes.burn_in >= bayes.total_samples) {
    throw DomainError("scenario: burn-in must lie in [0, samples)");
  }
  if (threads < 0) throw DomainError("scenario: threads must be non-negative");
}

bool ScenarioConfig::off_grid() const {
  if (scenario == Scenario::A) return !(rho == 0.0 || rho == 0.5);
  return !(rho == 0.90 || rho == 0.95);
}

ConstraintSet scenario_constraints() {
  return normalize({
      {(VectorXd(4) << 1, 0, 0, 0).finished(), Relation::LessEqual, 1.5},
      {(VectorXd(4) << 1, -1, 1, 0).finished(), Relation::LessEqual, 1.5},
      {(VectorXd(4) << 0, 0, 1, 0).finished(), Relation::LessEqual, 1.5},
  });
}

ScenarioConfig scenario_preset(Scenario s, double rho, int n, double gamma) {
  ScenarioConfig c;
  c.scenario = s;
  c.rho = rho;
  c.n = n;
  c.gamma = gamma;
  c.beta_true = VectorXd::Ones(4);
  c.constraints = scenario_constraints();
  if (s == Scenario::A) {
    c.estimators = {Method::BMLE, Method::BBUNE, Method::BBIRE};
  } else {
    c.estimators = {Method::BRE, Method::BBUNE, Method::BBIRE};
  }
  c.ridge_rule = RidgeRule::MaxEigen;
  return c;
}

const EstimatorMetrics& MetricsTable::at(Method m) const {
  for (const auto& r : rows) {
    if (r.method == m) return r;
  }
  throw DomainError("metrics table has no row for " + std::string(to_string(m)));
}

Dataset generate_scenario(const ScenarioConfig& config, int rep) {
  const Index p = config.beta_true.size();
  MatrixXd corr(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) corr(i, j) = std::pow(config.rho, static_cast<double>(std::abs(i - j)));
  }
  const MatrixXd factor = cholesky_lower(corr);

  RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
  MatrixXd z(config.n, p);
  for (Index i = 0; i < config.n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  MatrixXd X = z * factor.transpose();

  const auto state = predictor(X, config.beta_true);
  VectorXd y_raw(config.n);
  for (Index i = 0; i < config.n; ++i) {
    const double mu = state.mu[i];
    y_raw[i] = rng.beta(mu * config.gamma, (1.0 - mu) * config.gamma);
  }
  // Only boundary draws trigger the rescaling; applied unconditionally it
  // pulls every logit(y) inwards and attenuates the fit.
  const bool boundary = (y_raw.array() <= 0.0).any() || (y_raw.array() >= 1.0).any();
  return make_dataset(std::move(X), boundary ? rescale_response(y_raw) : std::move(y_raw), config.gamma);
}

std::map<Method, VectorXd> relative_efficiency(const MseTable& mse_table, Method benchmark) {
  const auto it = mse_table.find(benchmark);
  if (it == mse_table.end()) throw PreconditionError("relative_efficiency: benchmark estimator missing");
  const VectorXd& base = it->second;
  if ((base.array() == 0.0).any()) throw UndefinedRatioError("relative_efficiency: benchmark MSE is zero");
  std::map<Method, VectorXd> out;
  for (const auto& [m, v] : mse_table) {
    if (v.size() != base.size()) throw ShapeError("relative_efficiency: MSE vectors differ in length");
    out[m] = m == benchmark ? VectorXd::Ones(base.size()) : VectorXd(v.cwiseQuotient(base));
  }
  return out;
}

std::map<Method, double> tsre(const MseTable& mse_table, Method benchmark) {
  const auto it = mse_table.find(benchmark);
  if (it == mse_table.end()) throw PreconditionError("tsre: benchmark estimator missing");
  const double base = it->second.sum();
  if (base == 0.0) throw UndefinedRatioError("tsre: benchmark MSE sum is zero");
  std::map<Method, double> out;
  for (const auto& [m, v] : mse_table) out[m] = m == benchmark ? 1.0 : v.sum() / base;
  return out;
}

std::map<Method, FitResult> fit_estimators(const Dataset& data, const EstimatorSettings& settings,
                                           std::uint64_t seed, std::uint64_t stream) {
  std::map<Method, FitResult> fits;
  const FitResult bmle = fit_bmle(data, settings.iwls);
  for (Method m : settings.estimators) {
    switch (m) {
      case Method::BMLE:
        fits[m] = bmle;
        break;
      case Method::BRE: {
        const RidgeSpec spec = ridge_k(data, bmle, settings.ridge_rule);
        fits[m] = fit_ridge(data, bmle, spec.k);
        break;
      }
      case Method::BBUNE:
        fits[m] = fit_bayes(data, bmle, ConstraintSet::unconstrained(data.p()), settings.bayes, seed, stream);
        break;
      case Method::BBIRE:
        if (settings.constraints.empty()) throw PreconditionError("BBIRE requested without restrictions");
        fits[m] = fit_bayes(data, bmle, settings.constraints, settings.bayes, seed, stream);
        break;
    }
  }
  return fits;
}

MetricsTable run_replications(const ScenarioConfig& config) {
  config.validate();
  EstimatorSettings settings;
  settings.estimators = config.estimators;
  settings.constraints = config.constraints;
  settings.ridge_rule = config.ridge_rule;
  settings.bayes = config.bayes;
  const std::uint64_t chain_seed = mcmc_seed(config.seed);

  auto outcomes = run_parallel(config.reps, config.threads, [&](int rep) {
    const Dataset data = generate_scenario(config, rep);
    RepOutcome out;
    std::map<Method, VectorXd> est;
    for (auto& [m, fit] : fit_estimators(data, settings, chain_seed, static_cast<std::uint64_t>(rep))) {
      est[m] = fit.estimates;
    }
    out.estimates = std::move(est);
    return out;
  });

  std::vector<std::string> names;
  for (Index j = 0; j < config.beta_true.size(); ++j) names.push_back("beta" + std::to_string(j + 1));
  MetricsTable table = aggregate(outcomes, config.estimators, config.beta_true, std::move(names));
  table.reference_label = "true coefficients";
  return table;
}

MetricsTable bootstrap_study(const Dataset& data, const ConstraintSet& cs, const BootstrapConfig& config) {
  data.validate();
  if (config.sample_size < 1 || config.sample_size > data.n()) {
    throw DomainError("bootstrap: sample size " + std::to_string(config.sample_size) + " must lie in [1, " +
                      std::to_string(data.n()) + "]");
  }
  if (config.reps < 1) throw DomainError("bootstrap: reps must be at least 1");
  if (config.estimators.empty()) throw DomainError("bootstrap: no estimators requested");

  const FitResult reference = fit_bmle(data);

  EstimatorSettings settings;
  settings.estimators = config.estimators;
  settings.constraints = cs;
  settings.ridge_rule = config.ridge_rule;
  settings.bayes = config.bayes;
  const std::uint64_t chain_seed = mcmc_seed(config.seed);

  auto outcomes = run_parallel(config.reps, config.threads, [&](int rep) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
    std::vector<Index> rows;
    if (config.resampler) {
      rows = config.resampler(data.n(), config.sample_size, rep, rng);
    } else {
      rows.resize(static_cast<std::size_t>(config.sample_size));
      for (auto& r : rows) r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(data.n())));
    }
    const Dataset sample = data.subset(rows);
    RepOutcome out;
    std::map<Method, VectorXd> est;
    for (auto& [m, fit] : fit_estimators(sample, settings, chain_seed, static_cast<std::uint64_t>(rep))) {
      est[m] = fit.estimates;
    }
    out.estimates = std::move(est);
    return out;
  });

  MetricsTable table = aggregate(outcomes, config.estimators, reference.estimates, data.column_names);
  table.reference_label = "full-data BMLE (pseudo-truth)";
  return table;
}

}  // namespace betarestrict
