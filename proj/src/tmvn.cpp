#include "betarestrict/tmvn.hpp"

#include "betarestrict/errors.hpp"
#include "betarestrict/linalg.hpp"
#include "betarestrict/truncnorm.hpp"

#include <cmath>
#include <limits>

namespace betarestrict {

TmvnSpec::TmvnSpec(VectorXd mean, MatrixXd cov, ConstraintSet cs)
    : mean_(std::move(mean)), cov_(std::move(cov)), cs_(std::move(cs)) {
  const Index p = mean_.size();
  if (p == 0) throw ShapeError("tmvn: zero-dimensional mean");
  if (cov_.rows() != p || cov_.cols() != p) throw ShapeError("tmvn: covariance does not match mean");
  if (cs_.p() == 0 && cs_.q() == 0) cs_ = ConstraintSet::unconstrained(p);
  if (cs_.p() != p) throw ShapeError("tmvn: constraints do not match mean dimension");

  require_symmetric(cov_, "tmvn covariance");
  cov_factor_ = cholesky_lower(cov_);
  precision_ = spd_inverse(cov_);
  const double err = (precision_ * cov_ - MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
  if (err > 1e-8) throw DomainError("tmvn: covariance is too ill-conditioned to invert reliably");

  // Throws EmptyRegionError when no feasible point can be found.
  (void)find_feasible_point(cs_, mean_);
}

double log_kernel(const TmvnSpec& spec, const VectorXd& beta) {
  if (beta.size() != spec.dim()) throw ShapeError("log_kernel: dimension mismatch");
  if (!is_feasible(beta, spec.constraints())) return -std::numeric_limits<double>::infinity();
  const VectorXd d = beta - spec.mean();
  return -0.5 * d.dot(spec.precision() * d);
}

void gibbs_cycles(const TmvnSpec& spec, const VectorXd& mean, VectorXd& state, int cycles, RngStream& rng) {
  const Index p = spec.dim();
  const MatrixXd& lambda = spec.precision();
  const ConstraintSet& cs = spec.constraints();
  VectorXd slack = cs.G() - cs.H() * state;
  VectorXd diff = state - mean;

  for (int c = 0; c < cycles; ++c) {
    for (Index j = 0; j < p; ++j) {
      const double ljj = lambda(j, j);
      const double cross = lambda.col(j).dot(diff) - ljj * diff[j];
      const double cond_mean = mean[j] - cross / ljj;
      const double cond_sd = 1.0 / std::sqrt(ljj);

      const double old = state[j];
      double next;
      if (cs.empty()) {
        next = cond_mean + cond_sd * rng.normal();
      } else {
        const Interval range = conditional_interval_from_slack(j, old, slack, cs);
        next = range.lower < range.upper ? sample_truncated_normal(cond_mean, cond_sd, range, rng) : range.lower;
        slack -= cs.H().col(j) * (next - old);
      }
      state[j] = next;
      diff[j] = next - mean[j];
    }
  }
}

MatrixXd gibbs_chain(const TmvnSpec& spec, const VectorXd& init, Index count, RngStream& rng) {
  if (count < 1) throw PreconditionError("gibbs_chain: count must be at least 1");
  if (init.size() != spec.dim()) throw ShapeError("gibbs_chain: init has wrong dimension");
  if (!is_feasible(init, spec.constraints())) throw PreconditionError("gibbs_chain: init is infeasible");

  MatrixXd out(count, spec.dim());
  VectorXd state = init;
  for (Index t = 0; t < count; ++t) {
    gibbs_cycles(spec, spec.mean(), state, 1, rng);
    out.row(t) = state.transpose();
  }
  return out;
}

}  // namespace betarestrict
