#pragma once

// Multivariate normal truncated to a polyhedron {beta : H beta <= G},
// sampled with coordinate-wise Gibbs cycles.

#include "betarestrict/constraints.hpp"
#include "betarestrict/rng.hpp"
#include "betarestrict/types.hpp"

namespace betarestrict {

class TmvnSpec {
public:
  /// Validates that cov is SPD and that the region is non-empty.
  TmvnSpec(VectorXd mean, MatrixXd cov, ConstraintSet cs);

  const VectorXd& mean() const { return mean_; }
  const MatrixXd& cov() const { return cov_; }
  const MatrixXd& precision() const { return precision_; }
  const ConstraintSet& constraints() const { return cs_; }
  Index dim() const { return mean_.size(); }

  /// Lower Cholesky factor of cov.
  const MatrixXd& cov_factor() const { return cov_factor_; }

private:
  VectorXd mean_;
  MatrixXd cov_;
  MatrixXd precision_;
  MatrixXd cov_factor_;
  ConstraintSet cs_;
};

/// -(1/2)(beta - mean)' cov^-1 (beta - mean), or -inf outside the region.
double log_kernel(const TmvnSpec& spec, const VectorXd& beta);

/// Runs `cycles` full Gibbs sweeps in place, coordinates in ascending order,
/// targeting the truncated normal centred at `mean` (which overrides the
/// spec's mean; the covariance and region are taken from the spec).
void gibbs_cycles(const TmvnSpec& spec, const VectorXd& mean, VectorXd& state, int cycles, RngStream& rng);

/// One row per full cycle, starting from a feasible `init`.
MatrixXd gibbs_chain(const TmvnSpec& spec, const VectorXd& init, Index count, RngStream& rng);

}  // namespace betarestrict
