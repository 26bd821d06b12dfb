#pragma once

// Frequentist baselines: maximum likelihood by iteratively reweighted least
// squares (Fisher scoring) and the ridge-shrunk variant of it.

#include "betarestrict/fit_result.hpp"
#include "betarestrict/model.hpp"

namespace betarestrict {

/// IWLS working weights and response at a given beta.
struct IwlsState {
  VectorXd beta;
  VectorXd C;  // working weights, strictly positive
  VectorXd U;  // working response
  int iteration = 0;
  bool converged = false;
};

IwlsState working_quantities(const Dataset& data, const VectorXd& beta);

/// X' diag(C) X.
MatrixXd weighted_cross_product(const MatrixXd& X, const VectorXd& C);

struct IwlsOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

/// Maximum likelihood fit. SDs are sqrt(diag(gamma^-1 (X'CX)^-1)).
FitResult fit_bmle(const Dataset& data, const IwlsOptions& options = {});

enum class RidgeRule { MaxEigen, MinEigen, Fixed };

struct RidgeSpec {
  double k = 0.0;
  RidgeRule rule = RidgeRule::Fixed;
};

/// Ridge parameter from the eigen-decomposition of the information matrix:
///   max-eigen: lambda_max / (gamma max_j alpha_j^2)
///   min-eigen: lambda_min / (gamma min_j alpha_j^2)
/// with alpha the coordinates of the BMLE in the eigenbasis.
RidgeSpec ridge_k(const Dataset& data, const FitResult& bmle, RidgeRule rule);
RidgeSpec ridge_k(const MatrixXd& information, const VectorXd& beta_mle, double gamma, RidgeRule rule);

/// (X'CX + kI)^-1 X'CX beta_mle with C evaluated at the BMLE.
FitResult fit_ridge(const Dataset& data, const FitResult& bmle, double k);
FitResult fit_ridge(const Dataset& data, double k, const IwlsOptions& options = {});

}  // namespace betarestrict
