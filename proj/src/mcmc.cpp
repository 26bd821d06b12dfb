#include "betarestrict/mcmc.hpp"

#include "betarestrict/errors.hpp"
#include "betarestrict/iwls.hpp"
#include "betarestrict/linalg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace betarestrict {

std::string_view to_string(ProposalCorrection c) {
  switch (c) {
    case ProposalCorrection::SymmetricApprox: return "symmetric-approx";
    case ProposalCorrection::EstimatedConstants: return "estimated-constants";
  }
  return "?";
}

ProposalCorrection parse_proposal_correction(std::string_view label) {
  if (label == "symmetric-approx") return ProposalCorrection::SymmetricApprox;
  if (label == "estimated-constants") return ProposalCorrection::EstimatedConstants;
  throw DomainError("unknown proposal correction '" + std::string(label) +
                    "' (expected symmetric-approx or estimated-constants)");
}

void McmcConfig::validate(Index p) const {
  if (total_samples < 2) throw PreconditionError("mcmc: total samples must be at least 2");
  if (burn_in < 0 || burn_in >= total_samples) throw PreconditionError("mcmc: burn-in must lie in [0, total samples)");
  if (inner_cycles < 1) throw PreconditionError("mcmc: inner cycles must be at least 1");
  if (constant_draws < 1) throw PreconditionError("mcmc: constant draws must be at least 1");
  if (prior_mean.size() != p || prior_cov.rows() != p || prior_cov.cols() != p || proposal_cov.rows() != p ||
      proposal_cov.cols() != p) {
    throw ShapeError("mcmc: hyperparameter dimensions do not match the design");
  }
  if (!constraints.empty() && constraints.p() != p) throw ShapeError("mcmc: constraints do not match the design");
}

Hyperparameters default_hyperparameters(const MatrixXd& X, const VectorXd& C, double gamma) {
  const Index p = X.cols();
  Hyperparameters h;
  h.prior_mean = VectorXd::Zero(p);
  try {
    h.prior_cov = spd_inverse(MatrixXd(X.transpose() * X));
    h.proposal_cov = spd_inverse(weighted_cross_product(X, C)) / gamma;
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(
        "default hyperparameters: singular design; use the ridge estimator or supply explicit priors",
        e.pivot());
  }
  return h;
}

Hyperparameters default_hyperparameters(const Dataset& data, const FitResult& bmle) {
  const IwlsState ws = working_quantities(data, bmle.estimates);
  return default_hyperparameters(data.X, ws.C, data.gamma);
}

double log_posterior(const Dataset& data, const VectorXd& beta, const TmvnSpec& prior) {
  const double prior_term = log_kernel(prior, beta);
  if (prior_term == -std::numeric_limits<double>::infinity()) return prior_term;
  return log_likelihood(data, beta) + prior_term;
}

namespace {

// Smoothed share of shifted draws that land inside the region.
double truncation_probability(const VectorXd& centre, const TmvnSpec& proposal, const MatrixXd& shifts) {
  const ConstraintSet& cs = proposal.constraints();
  const MatrixXd lhs = cs.H() * shifts;
  const VectorXd base = cs.G() - cs.H() * centre;
  Index inside = 0;
  for (Index k = 0; k < shifts.cols(); ++k) {
    if (((lhs.col(k) - base).array() <= kFeasibilitySlack).all()) ++inside;
  }
  return (static_cast<double>(inside) + 0.5) / (static_cast<double>(shifts.cols()) + 1.0);
}

}  // namespace

double log_acceptance_ratio(double log_post_current, double log_post_candidate, const VectorXd& current,
                            const VectorXd& candidate, const TmvnSpec& proposal, ProposalCorrection mode,
                            const MatrixXd& normal_draws) {
  double ratio = log_post_candidate - log_post_current;
  if (mode == ProposalCorrection::EstimatedConstants && !proposal.constraints().empty()) {
    const MatrixXd shifts = proposal.cov_factor() * normal_draws;
    // q(current | candidate) / q(candidate | current) = Z(current) / Z(candidate)
    ratio += std::log(truncation_probability(current, proposal, shifts)) -
             std::log(truncation_probability(candidate, proposal, shifts));
  }
  return ratio;
}

Chain run_chain(const Dataset& data, const McmcConfig& config, const VectorXd& init) {
  const Index p = data.p();
  config.validate(p);
  if (init.size() != p) throw ShapeError("run_chain: init has wrong dimension");
  const ConstraintSet cs = config.constraints.empty() ? ConstraintSet::unconstrained(p) : config.constraints;
  if (!is_feasible(init, cs)) throw PreconditionError("run_chain: initial value violates the restrictions");

  const TmvnSpec prior(config.prior_mean, config.prior_cov, cs);
  const TmvnSpec proposal(init, config.proposal_cov, cs);
  const bool estimate_constants = config.correction == ProposalCorrection::EstimatedConstants && !cs.empty();

  RngStream rng(config.seed, config.stream);
  Chain chain;
  chain.seed = config.seed;
  chain.stream = config.stream;
  chain.samples.resize(config.total_samples - config.burn_in, p);

  VectorXd state = init;
  double log_post = log_posterior(data, state, prior);
  if (!std::isfinite(log_post)) throw PreconditionError("run_chain: log-posterior is not finite at the initial value");

  VectorXd candidate(p);
  MatrixXd normal_draws(p, estimate_constants ? config.constant_draws : 0);
  if (config.burn_in == 0) chain.samples.row(0) = state.transpose();

  for (int t = 1; t < config.total_samples; ++t) {
    candidate = state;
    gibbs_cycles(proposal, state, candidate, config.inner_cycles, rng);
    const double log_post_candidate = log_posterior(data, candidate, prior);

    if (estimate_constants) {
      for (Index k = 0; k < normal_draws.cols(); ++k) {
        for (Index j = 0; j < p; ++j) normal_draws(j, k) = rng.normal();
      }
    }
    const double log_ratio = log_acceptance_ratio(log_post, log_post_candidate, state, candidate, proposal,
                                                  config.correction, normal_draws);
    if (std::log(rng.uniform()) < log_ratio) {
      state = candidate;
      log_post = log_post_candidate;
      ++chain.accepted;
    }
    if (t >= config.burn_in) chain.samples.row(t - config.burn_in) = state.transpose();
  }
  chain.transitions = config.total_samples - 1;
  chain.acceptance_rate = static_cast<double>(chain.accepted) / static_cast<double>(chain.transitions);
  if (chain.accepted == 0) chain.warnings.push_back("stuck chain: no proposal was accepted");
  return chain;
}

namespace {

FitResult summarize_samples(const MatrixXd& samples, Method method) {
  if (samples.rows() == 0) throw PreconditionError("summarize: chain is empty");
  FitResult fit;
  fit.method = method;
  fit.estimates = samples.colwise().mean().transpose();
  if (samples.rows() < 2) {
    fit.sd = VectorXd::Zero(samples.cols());
  } else {
    const MatrixXd centred = samples.rowwise() - fit.estimates.transpose();
    fit.sd = (centred.colwise().squaredNorm() / static_cast<double>(samples.rows() - 1)).cwiseSqrt().transpose();
  }
  return fit;
}

}  // namespace

FitResult summarize(const Chain& chain, Method method) {
  FitResult fit = summarize_samples(chain.samples, method);
  fit.diagnostics.acceptance_rate = chain.acceptance_rate;
  fit.diagnostics.warnings = chain.warnings;
  return fit;
}

FitResult summarize(const std::vector<Chain>& chains, Method method) {
  if (chains.empty()) throw PreconditionError("summarize: no chains");
  Index rows = 0;
  for (const auto& c : chains) rows += c.samples.rows();
  MatrixXd pooled(rows, chains.front().samples.cols());
  Index offset = 0;
  long accepted = 0;
  long transitions = 0;
  Diagnostics diag;
  for (const auto& c : chains) {
    pooled.middleRows(offset, c.samples.rows()) = c.samples;
    offset += c.samples.rows();
    accepted += c.accepted;
    transitions += c.transitions;
    diag.warnings.insert(diag.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  FitResult fit = summarize_samples(pooled, method);
  fit.diagnostics = std::move(diag);
  if (transitions > 0) fit.diagnostics.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(transitions);
  if (chains.size() >= 2) fit.diagnostics.rhat = gelman_rubin(chains);
  return fit;
}

VectorXd gelman_rubin(const std::vector<Chain>& chains) {
  if (chains.size() < 2) throw PreconditionError("gelman_rubin: need at least two chains");
  const Index n = chains.front().samples.rows();
  const Index p = chains.front().samples.cols();
  if (n < 2) throw PreconditionError("gelman_rubin: chains need at least two draws");
  for (const auto& c : chains) {
    if (c.samples.rows() != n || c.samples.cols() != p) {
      throw PreconditionError("gelman_rubin: chains must have equal length and dimension");
    }
  }
  const auto m = static_cast<Index>(chains.size());
  MatrixXd means(m, p);
  MatrixXd vars(m, p);
  for (Index c = 0; c < m; ++c) {
    const MatrixXd& s = chains[static_cast<std::size_t>(c)].samples;
    means.row(c) = s.colwise().mean();
    vars.row(c) = (s.rowwise() - means.row(c)).colwise().squaredNorm() / static_cast<double>(n - 1);
  }
  VectorXd rhat(p);
  const double nn = static_cast<double>(n);
  for (Index j = 0; j < p; ++j) {
    const double grand = means.col(j).mean();
    const double between_over_n = (means.col(j).array() - grand).square().sum() / static_cast<double>(m - 1);
    const double within = vars.col(j).mean();
    if (within == 0.0) {
      rhat[j] = between_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      continue;
    }
    const double pooled = (nn - 1.0) / nn * within + between_over_n;
    rhat[j] = std::sqrt(pooled / within);
  }
  return rhat;
}

VectorXd default_initial_value(const FitResult& bmle, const ConstraintSet& cs) {
  if (cs.empty() || is_feasible(bmle.estimates, cs)) return bmle.estimates;
  return find_feasible_point(cs, bmle.estimates);
}

namespace {

McmcConfig make_config(const Dataset& data, const FitResult& bmle, const ConstraintSet& cs,
                       const BayesOptions& options, std::uint64_t seed, std::uint64_t stream) {
  if (!(options.prior_scale > 0.0) || !std::isfinite(options.prior_scale)) {
    throw DomainError("mcmc: prior scale must be positive and finite");
  }
  const Hyperparameters h = default_hyperparameters(data, bmle);
  McmcConfig config;
  config.total_samples = options.total_samples;
  config.burn_in = options.burn_in;
  config.prior_mean = h.prior_mean;
  config.prior_cov = options.prior_scale * h.prior_cov;
  config.proposal_cov = h.proposal_cov;
  config.constraints = cs.empty() ? ConstraintSet::unconstrained(data.p()) : cs;
  config.seed = seed;
  config.stream = stream;
  config.correction = options.correction;
  config.inner_cycles = options.inner_cycles;
  config.constant_draws = options.constant_draws;
  return config;
}

}  // namespace

FitResult fit_bayes(const Dataset& data, const FitResult& bmle, const ConstraintSet& cs,
                    const BayesOptions& options, std::uint64_t seed, std::uint64_t stream) {
  const McmcConfig config = make_config(data, bmle, cs, options, seed, stream);
  const Chain chain = run_chain(data, config, default_initial_value(bmle, config.constraints));
  return summarize(chain, config.constraints.empty() ? Method::BBUNE : Method::BBIRE);
}

std::vector<Chain> run_overdispersed_chains(const Dataset& data, const FitResult& bmle, const ConstraintSet& cs,
                                            const BayesOptions& options, std::uint64_t seed, int n_chains) {
  if (n_chains < 1) throw PreconditionError("run_overdispersed_chains: need at least one chain");
  const Index p = data.p();
  std::vector<Chain> chains;
  RngStream jitter_rng = RngStream(seed, 0).child(0x6a17);
  for (int k = 0; k < n_chains; ++k) {
    const McmcConfig config = make_config(data, bmle, cs, options, seed, static_cast<std::uint64_t>(k));
    VectorXd start = bmle.estimates;
    for (Index j = 0; j < p; ++j) {
      const double sign = jitter_rng.uniform() < 0.5 ? -1.0 : 1.0;
      start[j] += sign * 2.0 * bmle.sd[j];
    }
    if (!is_feasible(start, config.constraints)) start = find_feasible_point(config.constraints, start);
    chains.push_back(run_chain(data, config, start));
  }
  return chains;
}

}  // namespace betarestrict
