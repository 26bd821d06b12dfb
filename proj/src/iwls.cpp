#include "betarestrict/iwls.hpp"

#include "betarestrict/linalg.hpp"
#include "betarestrict/special.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace betarestrict {

IwlsState working_quantities(const Dataset& data, const VectorXd& beta) {
  if (!beta.allFinite()) throw DomainError("working_quantities: beta must be finite");
  const auto state = predictor(data.X, beta);
  const double g = data.gamma;

  IwlsState out;
  out.beta = beta;
  out.C.resize(data.n());
  out.U.resize(data.n());
  for (Index i = 0; i < data.n(); ++i) {
    if (!std::isfinite(state.mu[i])) throw EvaluationError("working_quantities: non-finite mean", i);
    const double mu = std::clamp(state.mu[i], kMeanClamp, 1.0 - kMeanClamp);
    const double dmu = mu * (1.0 - mu);  // 1 / g'(mu) for the logit link
    const double c = g * (trigamma(mu * g) + trigamma((1.0 - mu) * g)) * dmu * dmu;
    const double y_star = std::log(data.y[i] / (1.0 - data.y[i]));
    const double mu_star = digamma(mu * g) - digamma((1.0 - mu) * g);
    out.C[i] = c;
    out.U[i] = state.eta[i] + dmu * (y_star - mu_star) / c;
  }
  return out;
}

MatrixXd weighted_cross_product(const MatrixXd& X, const VectorXd& C) {
  MatrixXd a = X.transpose() * C.asDiagonal() * X;
  return (a + a.transpose()) / 2;
}

namespace {

VectorXd ols_logit_start(const Dataset& data) {
  VectorXd y_star(data.n());
  for (Index i = 0; i < data.n(); ++i) y_star[i] = std::log(data.y[i] / (1.0 - data.y[i]));
  try {
    return spd_solve(MatrixXd(data.X.transpose() * data.X), data.X.transpose() * y_star);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError("fit_bmle: singular design, X'X is not invertible", e.pivot());
  }
}

}  // namespace

FitResult fit_bmle(const Dataset& data, const IwlsOptions& options) {
  data.validate();
  VectorXd beta = ols_logit_start(data);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const IwlsState ws = working_quantities(data, beta);
    const MatrixXd info = weighted_cross_product(data.X, ws.C);
    VectorXd next;
    try {
      next = spd_solve(info, data.X.transpose() * (ws.C.asDiagonal() * ws.U));
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("fit_bmle: singular design, X'CX is not invertible", e.pivot());
    }
    if (!next.allFinite()) throw NonConvergenceError("fit_bmle: iterate diverged", beta);

    const double step = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    if (step < options.tol) {
      const IwlsState final_ws = working_quantities(data, beta);
      MatrixXd cov;
      try {
        cov = spd_inverse(weighted_cross_product(data.X, final_ws.C)) / data.gamma;
      } catch (const SingularMatrixError& e) {
        throw SingularMatrixError("fit_bmle: singular design at the estimate", e.pivot());
      }
      FitResult fit;
      fit.estimates = beta;
      fit.sd = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      fit.method = Method::BMLE;
      fit.diagnostics.iterations = iter;
      return fit;
    }
  }
  throw NonConvergenceError("fit_bmle: no convergence after " + std::to_string(options.max_iter) +
                                " iterations",
                            beta);
}

RidgeSpec ridge_k(const MatrixXd& information, const VectorXd& beta_mle, double gamma, RidgeRule rule) {
  if (rule == RidgeRule::Fixed) throw DomainError("ridge_k: a fixed rule carries its own k");
  if (information.rows() != beta_mle.size()) throw ShapeError("ridge_k: dimension mismatch");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(information);
  if (eig.info() != Eigen::Success) throw DomainError("ridge_k: eigen-decomposition failed");
  const VectorXd& lambda = eig.eigenvalues();  // ascending
  if (!(lambda.minCoeff() > 0.0)) {
    throw SingularMatrixError("ridge_k: information matrix is not positive definite", 0);
  }
  const VectorXd alpha_sq = (eig.eigenvectors().transpose() * beta_mle).array().square();

  RidgeSpec spec;
  spec.rule = rule;
  if (rule == RidgeRule::MaxEigen) {
    const double a = alpha_sq.maxCoeff();
    if (!(a > 0.0)) throw DegenerateRidgeError("ridge_k: max alpha^2 is zero");
    spec.k = lambda.maxCoeff() / (gamma * a);
  } else {
    const double a = alpha_sq.minCoeff();
    if (!(a > 0.0)) throw DegenerateRidgeError("ridge_k: min alpha^2 is zero");
    spec.k = lambda.minCoeff() / (gamma * a);
  }
  return spec;
}

RidgeSpec ridge_k(const Dataset& data, const FitResult& bmle, RidgeRule rule) {
  const IwlsState ws = working_quantities(data, bmle.estimates);
  return ridge_k(weighted_cross_product(data.X, ws.C), bmle.estimates, data.gamma, rule);
}

FitResult fit_ridge(const Dataset& data, const FitResult& bmle, double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("fit_ridge: k must be finite and non-negative");
  const IwlsState ws = working_quantities(data, bmle.estimates);
  const MatrixXd info = weighted_cross_product(data.X, ws.C);
  const Index p = data.p();

  FitResult fit;
  fit.method = Method::BRE;
  fit.diagnostics.ridge_k = k;
  if (k == 0.0) {
    fit.estimates = bmle.estimates;
    fit.sd = bmle.sd;
    return fit;
  }
  const MatrixXd shrunk_inv = spd_inverse(MatrixXd(info + k * MatrixXd::Identity(p, p)));
  fit.estimates = shrunk_inv * (info * bmle.estimates);
  const MatrixXd cov = shrunk_inv * info * shrunk_inv / data.gamma;
  fit.sd = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

FitResult fit_ridge(const Dataset& data, double k, const IwlsOptions& options) {
  return fit_ridge(data, fit_bmle(data, options), k);
}

}  // namespace betarestrict
