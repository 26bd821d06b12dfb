#include "betarestrict/model.hpp"

#include "betarestrict/special.hpp"

#include <algorithm>

namespace betarestrict {

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw ShapeError("dataset: need n >= 1 and p >= 1");
  if (y.size() != X.rows()) {
    throw ShapeError("dataset: response has " + std::to_string(y.size()) + " entries but X has " +
                     std::to_string(X.rows()) + " rows");
  }
  if (!X.allFinite()) throw DomainError("dataset: design matrix contains non-finite entries");
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0 && y[i] < 1.0)) {
      throw DomainError("dataset: response " + std::to_string(i) + " = " + std::to_string(y[i]) +
                        " is outside (0,1)");
    }
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("dataset: precision gamma must be positive");
  if (!column_names.empty() && static_cast<Index>(column_names.size()) != X.cols()) {
    throw ShapeError("dataset: column name count does not match X");
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.X.row(static_cast<Index>(k)) = X.row(rows[k]);
    out.y[static_cast<Index>(k)] = y[rows[k]];
  }
  out.gamma = gamma;
  out.column_names = column_names;
  return out;
}

Dataset make_dataset(MatrixXd X, VectorXd y, double gamma, std::vector<std::string> names) {
  Dataset d{std::move(X), std::move(y), gamma, std::move(names)};
  if (d.column_names.empty()) {
    for (Index j = 0; j < d.X.cols(); ++j) d.column_names.push_back("x" + std::to_string(j + 1));
  }
  d.validate();
  return d;
}

LinearPredictorState predictor(const MatrixXd& X, const VectorXd& beta) {
  if (X.cols() != beta.size()) {
    throw ShapeError("predictor: X has " + std::to_string(X.cols()) + " columns but beta has " +
                     std::to_string(beta.size()) + " entries");
  }
  LinearPredictorState state;
  state.eta = X * beta;
  state.mu = state.eta.unaryExpr([](double e) { return link_inverse(e); });
  return state;
}

namespace {

double clamp_mean(double mu) { return std::clamp(mu, kMeanClamp, 1.0 - kMeanClamp); }

}  // namespace

double log_likelihood(const Dataset& data, const VectorXd& beta) {
  const auto state = predictor(data.X, beta);
  const double g = data.gamma;
  const double lg_gamma = log_gamma(g);

  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    if (!std::isfinite(state.eta[i])) throw EvaluationError("log_likelihood: non-finite linear predictor", i);
    const double mu = clamp_mean(state.mu[i]);
    const double a = g * mu;
    const double b = g * (1.0 - mu);
    const double yi = data.y[i];
    const double term = lg_gamma - log_gamma(a) - log_gamma(b) + (a - 1.0) * std::log(yi) +
                        (b - 1.0) * std::log1p(-yi);
    if (!std::isfinite(term)) throw EvaluationError("log_likelihood: non-finite log-density", i);
    total += term;
  }
  return total;
}

VectorXd score(const Dataset& data, const VectorXd& beta) {
  const auto state = predictor(data.X, beta);
  const double g = data.gamma;
  VectorXd weighted(data.n());
  for (Index i = 0; i < data.n(); ++i) {
    const double mu = clamp_mean(state.mu[i]);
    const double y_star = std::log(data.y[i] / (1.0 - data.y[i]));
    const double mu_star = digamma(mu * g) - digamma((1.0 - mu) * g);
    weighted[i] = g * (y_star - mu_star) * mu * (1.0 - mu);
  }
  return data.X.transpose() * weighted;
}

VectorXd rescale_response(const VectorXd& y_raw, Index n) {
  if (n < 1) throw DomainError("rescale_response: n must be positive");
  for (Index i = 0; i < y_raw.size(); ++i) {
    if (!(y_raw[i] >= 0.0 && y_raw[i] <= 1.0)) {
      throw DomainError("rescale_response: entry " + std::to_string(i) + " = " +
                        std::to_string(y_raw[i]) + " is outside [0,1]");
    }
  }
  const double nn = static_cast<double>(n);
  return (y_raw.array() * (nn - 1.0) + 0.5) / nn;
}

VectorXd rescale_response(const VectorXd& y_raw) { return rescale_response(y_raw, y_raw.size()); }

}  // namespace betarestrict
