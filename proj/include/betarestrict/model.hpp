#pragma once

// Beta regression with logit mean link and known precision gamma:
//   y_i ~ Beta(mu_i gamma, (1 - mu_i) gamma),  logit(mu_i) = x_i' beta.

#include "betarestrict/errors.hpp"
#include "betarestrict/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace betarestrict {

/// Design matrix, response in (0,1), and the known precision.
struct Dataset {
  MatrixXd X;
  VectorXd y;
  double gamma = 1.0;
  std::vector<std::string> column_names;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  /// Throws DomainError/ShapeError when any invariant is broken.
  void validate() const;

  /// Rows `rows` of this dataset (repeats allowed), same gamma and names.
  Dataset subset(const std::vector<Index>& rows) const;
};

/// Builds and validates a dataset; fills default column names x1..xp.
Dataset make_dataset(MatrixXd X, VectorXd y, double gamma, std::vector<std::string> names = {});

/// Linear predictor and mean at a given beta.
struct LinearPredictorState {
  VectorXd eta;
  VectorXd mu;
};

// Means are clamped here before any Gamma-function term is evaluated.
inline constexpr double kMeanClamp = 1e-12;

template <typename Scalar>
Scalar link_logit(Scalar mu) {
  if (!(mu > Scalar(0) && mu < Scalar(1))) {
    throw DomainError("link_logit: mean must lie in (0,1), got " +
                      std::to_string(static_cast<double>(mu)));
  }
  return std::log(mu / (Scalar(1) - mu));
}

template <typename Scalar>
Scalar link_inverse(Scalar eta) {
  if (eta < Scalar(0)) {
    const Scalar e = std::exp(eta);
    return e / (Scalar(1) + e);
  }
  return Scalar(1) / (Scalar(1) + std::exp(-eta));
}

LinearPredictorState predictor(const MatrixXd& X, const VectorXd& beta);

/// Sum of Beta log-densities of the observations at beta.
double log_likelihood(const Dataset& data, const VectorXd& beta);

/// Analytic gradient of log_likelihood with respect to beta.
VectorXd score(const Dataset& data, const VectorXd& beta);

/// Pushes responses in [0,1] into (0,1): (y (n - 1) + 0.5) / n.
VectorXd rescale_response(const VectorXd& y_raw);
VectorXd rescale_response(const VectorXd& y_raw, Index n);

}  // namespace betarestrict
