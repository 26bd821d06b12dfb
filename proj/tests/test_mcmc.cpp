#include "betarestrict/errors.hpp"
#include "betarestrict/iwls.hpp"
#include "betarestrict/mcmc.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace betarestrict;

namespace {

struct Moments {
  double mean;
  double sd;
};

// Posterior moments of a one-coefficient model by trapezoidal quadrature of
// likelihood x N(0, prior_var) on [lower, inf).
Moments quadrature_posterior(const Dataset& d, double prior_var, double lower, double centre, double width) {
  const int n = 20001;
  const double lo = std::max(lower, centre - width), hi = centre + width;
  std::vector<double> x(n), logw(n);
  double peak = -INFINITY;
  for (int i = 0; i < n; ++i) {
    x[i] = lo + (hi - lo) * i / (n - 1);
    logw[i] = oracle::log_likelihood(d.X, d.y, d.gamma, VectorXd::Constant(1, x[i])) - 0.5 * x[i] * x[i] / prior_var;
    peak = std::max(peak, logw[i]);
  }
  double z = 0, m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - peak) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    z += w;
    m1 += w * x[i];
    m2 += w * x[i] * x[i];
  }
  m1 /= z;
  return {m1, std::sqrt(m2 / z - m1 * m1)};
}

Dataset one_coefficient_data(std::uint64_t seed, Index n, double g, double beta) {
  RngStream rng(seed);
  return oracle::random_dataset(n, 1, g, VectorXd::Constant(1, beta), rng);
}

McmcConfig config_for(const Dataset& d, const FitResult& mle, double prior_scale) {
  const Hyperparameters h = default_hyperparameters(d, mle);
  McmcConfig c;
  c.total_samples = 60000;
  c.burn_in = 1000;
  c.prior_mean = h.prior_mean;
  c.prior_cov = prior_scale * h.prior_cov;
  c.proposal_cov = h.proposal_cov;
  c.constraints = ConstraintSet::unconstrained(d.p());
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("default hyperparameters") {
  RngStream rng(70);
  const Dataset d = oracle::random_dataset(30, 2, 5.0, VectorXd::Ones(2), rng);
  const FitResult mle = fit_bmle(d);
  const Hyperparameters h = default_hyperparameters(d, mle);
  CHECK(h.prior_mean.isZero());
  CHECK((h.prior_cov * (d.X.transpose() * d.X) - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  // proposal SDs are the BMLE's standard errors
  CHECK((h.proposal_cov.diagonal().cwiseSqrt() - mle.sd).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(default_hyperparameters(MatrixXd::Ones(4, 2), VectorXd::Ones(4), 1.0), SingularMatrixError);
}

TEST_CASE("unrestricted chain matches quadrature") {
  const Dataset d = one_coefficient_data(71, 25, 6.0, 0.8);
  const FitResult mle = fit_bmle(d);
  const double prior_var = (d.X.transpose() * d.X).inverse()(0, 0);
  const Moments ref = quadrature_posterior(d, prior_var, -INFINITY, mle.estimates[0], 12 * mle.sd[0]);
  const Chain chain = run_chain(d, config_for(d, mle, 1.0), mle.estimates);
  const FitResult post = summarize(chain, Method::BBUNE);
  CHECK(std::abs(post.estimates[0] - ref.mean) < 0.05 * ref.sd);
  CHECK(std::abs(post.sd[0] - ref.sd) < 0.05 * ref.sd);
  CHECK(chain.acceptance_rate > 0.2);
  CHECK(chain.acceptance_rate < 0.95);
}

TEST_CASE("restricted chain with estimated constants matches quadrature") {
  // bound sits near the likelihood peak so the truncation matters
  const Dataset d = one_coefficient_data(72, 25, 6.0, 0.8);
  const FitResult mle = fit_bmle(d);
  const double prior_scale = 25.0;
  const double prior_var = prior_scale * (d.X.transpose() * d.X).inverse()(0, 0);
  const double bound = mle.estimates[0];
  const Moments ref = quadrature_posterior(d, prior_var, bound, mle.estimates[0], 12 * mle.sd[0]);

  McmcConfig c = config_for(d, mle, prior_scale);
  c.constraints = ConstraintSet((MatrixXd(1, 1) << -1.0).finished(), VectorXd::Constant(1, -bound));
  c.correction = ProposalCorrection::EstimatedConstants;
  c.constant_draws = 2000;
  const Chain chain = run_chain(d, c, VectorXd::Constant(1, bound + mle.sd[0]));
  const FitResult post = summarize(chain);
  CHECK((chain.samples.array() >= bound).all());
  CHECK(std::abs(post.estimates[0] - ref.mean) < 0.06 * ref.sd);
  CHECK(std::abs(post.sd[0] - ref.sd) < 0.06 * ref.sd);

  // the symmetric shortcut stays inside the region and near the target
  c.correction = ProposalCorrection::SymmetricApprox;
  const FitResult approx = summarize(run_chain(d, c, VectorXd::Constant(1, bound + mle.sd[0])));
  CHECK(approx.estimates[0] >= bound);
  CHECK(std::abs(approx.estimates[0] - ref.mean) < 0.5 * ref.sd);
}

TEST_CASE("log acceptance ratio") {
  const ConstraintSet half((MatrixXd(1, 1) << -1.0).finished(), VectorXd::Zero(1));
  const TmvnSpec proposal(VectorXd::Constant(1, 1.0), MatrixXd::Identity(1, 1), half);
  RngStream rng(73);
  MatrixXd z(1, 200000);
  for (Index k = 0; k < z.cols(); ++k) z(0, k) = rng.normal();
  const VectorXd deep = VectorXd::Constant(1, 50.0), edge = VectorXd::Zero(1);
  CHECK(log_acceptance_ratio(-3.0, -1.0, deep, edge, proposal, ProposalCorrection::SymmetricApprox, z) == 2.0);
  // Z(deep) = 1, Z(edge) = 1/2
  CHECK(log_acceptance_ratio(-3.0, -1.0, deep, edge, proposal, ProposalCorrection::EstimatedConstants, z) ==
        doctest::Approx(2.0 + std::log(2.0)).epsilon(0.005));
  CHECK(log_acceptance_ratio(-1.0, -3.0, edge, deep, proposal, ProposalCorrection::EstimatedConstants, z) ==
        doctest::Approx(-2.0 - std::log(2.0)).epsilon(0.005));
  const TmvnSpec free(VectorXd::Zero(1), MatrixXd::Identity(1, 1), ConstraintSet::unconstrained(1));
  CHECK(log_acceptance_ratio(0.0, 1.5, deep, edge, free, ProposalCorrection::EstimatedConstants, z) == 1.5);
}

TEST_CASE("chain bookkeeping and determinism") {
  RngStream rng(74);
  const Dataset d = oracle::random_dataset(30, 3, 8.0, VectorXd::Ones(3), rng);
  const FitResult mle = fit_bmle(d);
  McmcConfig c = config_for(d, mle, 1.0);
  c.total_samples = 500;
  c.burn_in = 100;
  c.constraints = ConstraintSet((MatrixXd(1, 3) << 0, 0, -1).finished(), VectorXd::Zero(1));
  const VectorXd init = default_initial_value(mle, c.constraints);
  const Chain a = run_chain(d, c, init);
  CHECK(a.samples.rows() == 400);
  CHECK(a.transitions == 499);
  CHECK(a.acceptance_rate == doctest::Approx(a.accepted / 499.0));
  for (Index t = 0; t < a.samples.rows(); ++t) CHECK(a.samples(t, 2) >= 0.0);
  CHECK(run_chain(d, c, init).samples == a.samples);
  c.stream = 1;
  CHECK(run_chain(d, c, init).samples != a.samples);

  c.burn_in = 0;
  CHECK(run_chain(d, c, init).samples.row(0).transpose() == init);

  McmcConfig bad = c;
  bad.burn_in = 500;
  CHECK_THROWS_AS(run_chain(d, bad, init), PreconditionError);
  bad = c;
  bad.total_samples = 1;
  CHECK_THROWS_AS(run_chain(d, bad, init), PreconditionError);
  bad = c;
  bad.inner_cycles = 0;
  CHECK_THROWS_AS(run_chain(d, bad, init), PreconditionError);
  bad = c;
  bad.prior_mean = VectorXd::Zero(2);
  CHECK_THROWS_AS(run_chain(d, bad, init), ShapeError);
  CHECK_THROWS_AS(run_chain(d, c, (VectorXd(3) << 1, 1, -1).finished()), PreconditionError);
}

TEST_CASE("gelman-rubin hand case") {
  Chain a, b;
  a.samples = (MatrixXd(2, 1) << 0, 1).finished();
  b.samples = (MatrixXd(2, 1) << 2, 3).finished();
  // W = 1/2, B/n = 2, V = (1/2)(1/2) + 2
  CHECK(gelman_rubin({a, b})[0] == doctest::Approx(std::sqrt(4.5)));
  CHECK(gelman_rubin({a, a})[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(gelman_rubin({a}), PreconditionError);
  Chain c;
  c.samples = MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(gelman_rubin({a, c}), PreconditionError);
  const FitResult pooled = summarize(std::vector<Chain>{a, b});
  CHECK(pooled.estimates[0] == 1.5);
  REQUIRE(pooled.diagnostics.rhat.has_value());
  CHECK(pooled.diagnostics.rhat->size() == 1);
}

TEST_CASE("overdispersed chains agree") {
  RngStream rng(75);
  const Dataset d = oracle::random_dataset(50, 3, 10.0, VectorXd::Ones(3), rng);
  const FitResult mle = fit_bmle(d);
  BayesOptions opt;
  opt.total_samples = 4000;
  opt.burn_in = 500;
  const auto chains = run_overdispersed_chains(d, mle, ConstraintSet::unconstrained(3), opt, 5, 3);
  REQUIRE(chains.size() == 3);
  CHECK(gelman_rubin(chains).maxCoeff() < 1.1);
  const FitResult f = summarize(chains, Method::BBUNE);
  REQUIRE(f.diagnostics.rhat.has_value());
  CHECK(f.diagnostics.rhat->size() == 3);
  CHECK(f.diagnostics.acceptance_rate > 0.0);
}

TEST_CASE("fit_bayes") {
  RngStream rng(76);
  const Dataset d = oracle::random_dataset(40, 3, 10.0, VectorXd::Ones(3), rng);
  const FitResult mle = fit_bmle(d);
  BayesOptions opt;
  opt.total_samples = 3000;
  opt.burn_in = 300;
  const FitResult un = fit_bayes(d, mle, ConstraintSet::unconstrained(3), opt, 11);
  CHECK(un.method == Method::BBUNE);
  // a restriction that the BMLE violates
  const ConstraintSet cs((MatrixXd(1, 3) << 1, 0, 0).finished(), VectorXd::Constant(1, mle.estimates[0] - 0.3));
  const FitResult re = fit_bayes(d, mle, cs, opt, 11);
  CHECK(re.method == Method::BBIRE);
  CHECK(is_feasible(re.estimates, cs));
  CHECK(!is_feasible(mle.estimates, cs));
  CHECK(is_feasible(default_initial_value(mle, cs), cs));
  CHECK(fit_bayes(d, mle, cs, opt, 11).estimates == re.estimates);
  opt.prior_scale = 0.0;
  CHECK_THROWS_AS(fit_bayes(d, mle, cs, opt, 11), DomainError);
  opt.prior_scale = 1.0;
  opt.correction = ProposalCorrection::EstimatedConstants;
  opt.constant_draws = 64;
  CHECK(is_feasible(fit_bayes(d, mle, cs, opt, 11).estimates, cs));
}

TEST_CASE("posterior concentrates on the truth (well-specified, unit-information prior)") {
  RngStream rng(77);
  const VectorXd truth = VectorXd::Ones(4);
  const Dataset d = oracle::random_dataset(500, 4, 10.0, truth, rng);
  const FitResult mle = fit_bmle(d);
  BayesOptions opt;
  opt.total_samples = 5000;
  opt.burn_in = 500;
  opt.prior_scale = 500.0;
  const FitResult post = fit_bayes(d, mle, ConstraintSet::unconstrained(4), opt, 3);
  CHECK((post.estimates - truth).cwiseAbs().maxCoeff() < 0.1);
  const ConstraintSet cs((MatrixXd(1, 4) << 0, 0, 0, -1).finished(), VectorXd::Zero(1));
  CHECK((fit_bayes(d, mle, cs, opt, 3).estimates - truth).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("proposal correction labels") {
  CHECK(parse_proposal_correction("estimated-constants") == ProposalCorrection::EstimatedConstants);
  CHECK(to_string(ProposalCorrection::SymmetricApprox) == "symmetric-approx");
  CHECK_THROWS_AS(parse_proposal_correction("exact"), DomainError);
}
