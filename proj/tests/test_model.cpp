#include "betarestrict/errors.hpp"
#include "betarestrict/model.hpp"
#include "betarestrict/rng.hpp"
#include "betarestrict/special.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace betarestrict;

TEST_CASE("logit link and inverse") {
  CHECK(link_logit(0.5) == 0.0);
  CHECK(link_inverse(0.0) == 0.5);
  CHECK(std::abs(link_inverse(link_logit(0.731)) - 0.731) < 1e-12);
  CHECK_THROWS_AS(link_logit(0.0), DomainError);
  CHECK_THROWS_AS(link_logit(1.0), DomainError);
  CHECK_THROWS_AS(link_logit(1.5), DomainError);
  // no overflow at extreme predictors
  CHECK(link_inverse(-800.0) >= 0.0);
  CHECK(link_inverse(-800.0) < 1e-300);
  CHECK(link_inverse(800.0) == 1.0);
  CHECK(std::isfinite(link_inverse(-1e308)));
  for (double eta : {-30.0, -3.0, -0.1, 0.2, 4.0, 10.0}) {
    CHECK(std::abs(link_logit(link_inverse(eta)) - eta) < 1e-9 * std::max(1.0, std::abs(eta)));
  }
}

TEST_CASE("predictor") {
  SUBCASE("zero coefficients") {
    const MatrixXd X = MatrixXd::Random(6, 3);
    const auto s = predictor(X, VectorXd::Zero(3));
    CHECK(s.eta.cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.mu.array() == 0.5).all());
  }
  SUBCASE("identity design") {
    const auto s = predictor(MatrixXd::Identity(4, 4), VectorXd::Ones(4));
    CHECK((s.eta.array() == 1.0).all());
    CHECK(s.mu[0] == doctest::Approx(0.7310585786300049));
  }
  SUBCASE("random case against a double loop") {
    RngStream rng(4);
    MatrixXd X(5, 4);
    VectorXd b(4);
    for (Index i = 0; i < 20; ++i) X.data()[i] = rng.normal();
    for (Index j = 0; j < 4; ++j) b[j] = rng.normal();
    const auto s = predictor(X, b);
    for (Index i = 0; i < 5; ++i) {
      double eta = 0;
      for (Index j = 0; j < 4; ++j) eta += X(i, j) * b[j];
      CHECK(std::abs(s.eta[i] - eta) < 1e-12);
      CHECK(std::abs(s.mu[i] - 1.0 / (1.0 + std::exp(-eta))) < 1e-12);
    }
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(predictor(MatrixXd::Ones(3, 2), VectorXd::Ones(3)), ShapeError); }
}

TEST_CASE("log_likelihood values") {
  const Dataset one = make_dataset(MatrixXd::Ones(1, 1), VectorXd::Constant(1, 0.5), 2.0);
  CHECK(std::abs(log_likelihood(one, VectorXd::Zero(1))) < 1e-14);
  const Dataset three = make_dataset(MatrixXd::Ones(3, 1), VectorXd::Constant(3, 0.5), 2.0);
  CHECK(std::abs(log_likelihood(three, VectorXd::Zero(1))) < 1e-14);
  // ln of the Beta(2.5, 2.5) density at 1/2
  const Dataset five = make_dataset(MatrixXd::Ones(1, 1), VectorXd::Constant(1, 0.5), 5.0);
  const double expected = std::lgamma(5.0) - 2 * std::lgamma(2.5) + 3.0 * std::log(0.5);
  CHECK(expected == doctest::Approx(0.5292465477).epsilon(1e-9));
  CHECK(std::abs(log_likelihood(five, VectorXd::Zero(1)) - expected) < 1e-12);
}

TEST_CASE("log_likelihood matches a straight-line density sum") {
  RngStream rng(31);
  for (int t = 0; t < 20; ++t) {
    VectorXd beta(4);
    for (Index j = 0; j < 4; ++j) beta[j] = rng.normal();
    const Dataset d = oracle::random_dataset(50, 4, 2.0 + 10.0 * rng.uniform(), beta, rng);
    VectorXd at(4);
    for (Index j = 0; j < 4; ++j) at[j] = 0.5 * rng.normal();
    const double ref = oracle::log_likelihood(d.X, d.y, d.gamma, at);
    CHECK(std::abs(log_likelihood(d, at) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("score matches finite differences") {
  RngStream rng(32);
  for (int t = 0; t < 50; ++t) {
    VectorXd beta(3);
    for (Index j = 0; j < 3; ++j) beta[j] = 0.7 * rng.normal();
    const Dataset d = oracle::random_dataset(30, 3, 3.0 + 20.0 * rng.uniform(), beta, rng);
    VectorXd at = beta;
    for (Index j = 0; j < 3; ++j) at[j] += 0.3 * rng.normal();
    const VectorXd g = score(d, at);
    const double h = 1e-6;
    for (Index j = 0; j < 3; ++j) {
      VectorXd e = VectorXd::Zero(3);
      e[j] = h;
      const double fd = (log_likelihood(d, at + e) - log_likelihood(d, at - e)) / (2 * h);
      CHECK(std::abs(fd - g[j]) < 1e-5 * std::max(1.0, std::abs(g[j])));
    }
  }
}

TEST_CASE("log_likelihood is invariant to row order") {
  RngStream rng(33);
  const Dataset d = oracle::random_dataset(25, 3, 6.0, VectorXd::Ones(3), rng);
  std::vector<Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[17]);
  const VectorXd at = (VectorXd(3) << 0.2, -0.4, 1.1).finished();
  CHECK(std::abs(log_likelihood(d.subset(perm), at) - log_likelihood(d, at)) < 1e-10);
}

TEST_CASE("log_likelihood survives extreme predictors") {
  const Dataset d = make_dataset((MatrixXd(2, 1) << 1.0, -1.0).finished(), (VectorXd(2) << 0.3, 0.6).finished(), 5.0);
  // clamped means keep it finite far outside the data's range
  CHECK(std::isfinite(log_likelihood(d, VectorXd::Constant(1, 40.0))));
  CHECK(std::isfinite(log_likelihood(d, VectorXd::Constant(1, -1000.0))));
  try {
    log_likelihood(d, VectorXd::Constant(1, std::numeric_limits<double>::infinity()));
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.index() == 0);
  }
}

TEST_CASE("rescale_response") {
  const VectorXd y20 = (VectorXd(20) << 0, 1, 0.5, VectorXd::Constant(17, 0.3)).finished();
  const VectorXd r = rescale_response(y20);
  CHECK(r[0] == doctest::Approx(0.025));
  CHECK(r[1] == doctest::Approx(0.975));
  CHECK(r[2] == 0.5);
  CHECK(r.minCoeff() > 0.0);
  CHECK(r.maxCoeff() < 1.0);
  CHECK(rescale_response(VectorXd::Constant(3, 0.5), 1000)[0] == 0.5);
  // monotone
  const VectorXd grid = VectorXd::LinSpaced(11, 0.0, 1.0);
  const VectorXd rg = rescale_response(grid);
  for (Index i = 1; i < 11; ++i) CHECK(rg[i] > rg[i - 1]);
  CHECK_THROWS_AS(rescale_response((VectorXd(2) << 0.2, 1.2).finished()), DomainError);
  CHECK_THROWS_AS(rescale_response((VectorXd(2) << -0.1, 0.5).finished()), DomainError);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(make_dataset(MatrixXd::Ones(3, 2), VectorXd::Constant(2, 0.5), 1.0), ShapeError);
  CHECK_THROWS_AS(make_dataset(MatrixXd::Ones(2, 1), (VectorXd(2) << 0.0, 0.5).finished(), 1.0), DomainError);
  CHECK_THROWS_AS(make_dataset(MatrixXd::Ones(2, 1), VectorXd::Constant(2, 0.5), 0.0), DomainError);
  MatrixXd bad = MatrixXd::Ones(2, 1);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(make_dataset(bad, VectorXd::Constant(2, 0.5), 1.0), DomainError);
  const Dataset d = make_dataset(MatrixXd::Ones(2, 2), VectorXd::Constant(2, 0.5), 1.0);
  CHECK(d.column_names == std::vector<std::string>{"x1", "x2"});
  const Dataset s = d.subset({1, 1, 0});
  CHECK(s.n() == 3);
  CHECK(s.gamma == 1.0);
}
