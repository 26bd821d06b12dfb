#pragma once

// Metropolis-Hastings for beta regression under a (truncated) multivariate
// normal prior. The proposal is a truncated normal centred at the current
// state and drawn with a few Gibbs cycles started from that state. With an
// empty constraint set this is the unrestricted sampler (BBUNE); with
// restrictions it gives the inequality-restricted estimator (BBIRE).

#include "betarestrict/constraints.hpp"
#include "betarestrict/fit_result.hpp"
#include "betarestrict/model.hpp"
#include "betarestrict/tmvn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace betarestrict {

/// How the Hastings ratio treats the centre-dependent normalizing constant
/// of the truncated proposal.
enum class ProposalCorrection {
  SymmetricApprox,     // cancel it, as for an untruncated random walk
  EstimatedConstants,  // Monte Carlo estimate of both truncation probabilities
};

std::string_view to_string(ProposalCorrection c);
ProposalCorrection parse_proposal_correction(std::string_view label);

struct McmcConfig {
  int total_samples = 10000;
  int burn_in = 1000;
  VectorXd prior_mean;
  MatrixXd prior_cov;
  MatrixXd proposal_cov;
  ConstraintSet constraints;  // q = 0 for the unrestricted sampler
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  ProposalCorrection correction = ProposalCorrection::SymmetricApprox;
  int inner_cycles = 10;
  int constant_draws = 256;

  void validate(Index p) const;
};

/// Retained post-burn-in draws.
struct Chain {
  MatrixXd samples;  // (total - burn_in) x p
  int accepted = 0;
  int transitions = 0;  // total - 1
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<std::string> warnings;
};

struct Hyperparameters {
  VectorXd prior_mean;
  MatrixXd prior_cov;
  MatrixXd proposal_cov;
};

/// Zero prior mean, prior covariance (X'X)^-1, proposal covariance
/// gamma^-1 (X'CX)^-1 with C at the maximum likelihood estimate.
Hyperparameters default_hyperparameters(const Dataset& data, const FitResult& bmle);
Hyperparameters default_hyperparameters(const MatrixXd& X, const VectorXd& C, double gamma);

/// log-likelihood plus the prior's log-kernel; -inf outside the region.
double log_posterior(const Dataset& data, const VectorXd& beta, const TmvnSpec& prior);

/// Log Metropolis-Hastings ratio for moving current -> candidate.
///
/// `normal_draws` holds standard normal columns shared by both truncation
/// probability estimates (common random numbers); it is ignored in
/// symmetric mode and when the proposal is unrestricted.
double log_acceptance_ratio(double log_post_current, double log_post_candidate, const VectorXd& current,
                            const VectorXd& candidate, const TmvnSpec& proposal, ProposalCorrection mode,
                            const MatrixXd& normal_draws);

Chain run_chain(const Dataset& data, const McmcConfig& config, const VectorXd& init);

/// Posterior mean and SD (divisor count - 1) of the retained draws.
FitResult summarize(const Chain& chain, Method method = Method::BBIRE);

/// Pools several chains and attaches per-coordinate R-hat.
FitResult summarize(const std::vector<Chain>& chains, Method method = Method::BBIRE);

/// Potential scale reduction per coordinate, sqrt(V / W).
VectorXd gelman_rubin(const std::vector<Chain>& chains);

struct BayesOptions {
  int total_samples = 10000;
  int burn_in = 1000;
  ProposalCorrection correction = ProposalCorrection::SymmetricApprox;
  int inner_cycles = 10;
  int constant_draws = 256;
  /// g in the prior covariance g (X'X)^-1. g = n gives a unit-information prior.
  double prior_scale = 1.0;
};

/// Starting point: the BMLE when feasible, otherwise repaired into the region.
VectorXd default_initial_value(const FitResult& bmle, const ConstraintSet& cs);

/// Full estimator: default hyperparameters, one chain, posterior mean.
/// An empty `cs` gives BBUNE, a non-empty one BBIRE.
FitResult fit_bayes(const Dataset& data, const FitResult& bmle, const ConstraintSet& cs,
                    const BayesOptions& options, std::uint64_t seed, std::uint64_t stream = 0);

/// `n_chains` chains from overdispersed starts (BMLE +/- 2 SD, repaired
/// into the region), for convergence checks.
std::vector<Chain> run_overdispersed_chains(const Dataset& data, const FitResult& bmle, const ConstraintSet& cs,
                                            const BayesOptions& options, std::uint64_t seed, int n_chains = 3);

}  // namespace betarestrict
