#pragma once

// Simulation and bootstrap studies comparing the four estimators by MSE,
// relative efficiency (RE) and total relative efficiency (TSRE).

#include "betarestrict/constraints.hpp"
#include "betarestrict/fit_result.hpp"
#include "betarestrict/iwls.hpp"
#include "betarestrict/mcmc.hpp"
#include "betarestrict/model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace betarestrict {

enum class Scenario { A, B };

struct ScenarioConfig {
  Scenario scenario = Scenario::A;
  double rho = 0.0;
  int n = 20;
  double gamma = 5.0;
  VectorXd beta_true = VectorXd::Ones(4);
  int reps = 100;
  ConstraintSet constraints;
  std::uint64_t seed = 1;
  std::vector<Method> estimators;
  RidgeRule ridge_rule = RidgeRule::MaxEigen;
  BayesOptions bayes;
  int threads = 1;  // 0 = hardware concurrency; never changes results

  void validate() const;
  /// True when rho is not one of the values the scenario is defined for.
  bool off_grid() const;
};

/// beta_1 <= 1.5, beta_1 - beta_2 + beta_3 <= 1.5, beta_3 <= 1.5.
ConstraintSet scenario_constraints();

/// Scenario A compares BMLE, BBUNE, BBIRE; Scenario B swaps BMLE for the
/// max-eigen ridge estimator.
ScenarioConfig scenario_preset(Scenario s, double rho, int n, double gamma);

/// Per-estimator summary across replications.
struct EstimatorMetrics {
  Method method = Method::BMLE;
  VectorXd mean;  // mean estimate
  VectorXd sd;    // across-replication SD (divisor reps - 1; 0 for one rep)
  VectorXd mse;
  VectorXd re;    // NaN when no benchmark is available
  double tsre = 0.0;
};

struct ReplicationFailure {
  int rep = 0;
  std::string message;
};

struct MetricsTable {
  std::vector<std::string> coefficient_names;
  std::vector<EstimatorMetrics> rows;  // one entry per estimator, in request order
  VectorXd reference;                  // truth, or pseudo-truth for the bootstrap
  std::string reference_label;
  int completed = 0;
  std::vector<ReplicationFailure> failures;

  const EstimatorMetrics& at(Method m) const;
  Index row_count() const { return static_cast<Index>(rows.size()) * static_cast<Index>(coefficient_names.size()); }
};

/// X rows ~ N(0, C) with C_ij = rho^|i-j|, y_i ~ Beta(mu_i gamma, (1 - mu_i) gamma),
/// rescaled into the open interval when a draw lands on 0 or 1.
/// Deterministic per (seed, rep).
Dataset generate_scenario(const ScenarioConfig& config, int rep);

/// MSE_j = mean_k (estimates(k, j) - truth_j)^2.
template <typename Derived, typename DerivedT>
Vector<typename Derived::Scalar> mse(const Eigen::MatrixBase<Derived>& estimates,
                                     const Eigen::MatrixBase<DerivedT>& truth) {
  if (estimates.rows() < 1) throw PreconditionError("mse: need at least one replication");
  if (estimates.cols() != truth.size()) throw ShapeError("mse: truth has wrong dimension");
  return (estimates.rowwise() - truth.transpose()).array().square().colwise().mean().transpose();
}

using MseTable = std::map<Method, VectorXd>;

/// RE_j(est) = MSE_j(est) / MSE_j(benchmark).
std::map<Method, VectorXd> relative_efficiency(const MseTable& mse_table, Method benchmark);

/// TSRE(est) = sum_j MSE_j(est) / sum_j MSE_j(benchmark).
std::map<Method, double> tsre(const MseTable& mse_table, Method benchmark);

/// Point estimates of every requested estimator on one dataset.
struct EstimatorSettings {
  std::vector<Method> estimators;
  ConstraintSet constraints;
  RidgeRule ridge_rule = RidgeRule::MaxEigen;
  BayesOptions bayes;
  IwlsOptions iwls;
};

std::map<Method, FitResult> fit_estimators(const Dataset& data, const EstimatorSettings& settings,
                                           std::uint64_t seed, std::uint64_t stream);

MetricsTable run_replications(const ScenarioConfig& config);

struct BootstrapConfig {
  int sample_size = 30;
  int reps = 100;
  std::uint64_t seed = 1;
  std::vector<Method> estimators{kAllMethods.begin(), kAllMethods.end()};
  RidgeRule ridge_rule = RidgeRule::MinEigen;
  BayesOptions bayes;
  int threads = 1;
  /// Row indices for replication `rep`; defaults to uniform draws with replacement.
  std::function<std::vector<Index>(Index n, int sample_size, int rep, RngStream& rng)> resampler;
};

/// Case-resampling study; MSE is measured against the full-data BMLE.
MetricsTable bootstrap_study(const Dataset& data, const ConstraintSet& cs, const BootstrapConfig& config);

}  // namespace betarestrict
