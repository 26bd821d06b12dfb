#include "betarestrict/constraints.hpp"

#include "betarestrict/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace betarestrict {

ConstraintSet::ConstraintSet(MatrixXd H, VectorXd G) : H_(std::move(H)), G_(std::move(G)) {
  if (H_.rows() != G_.size()) throw ShapeError("constraints: H and G row counts differ");
  if (!H_.allFinite() || !G_.allFinite()) throw InvalidConstraintError("constraints: non-finite entries");
  for (Index r = 0; r < H_.rows(); ++r) {
    if (H_.row(r).cwiseAbs().maxCoeff() == 0.0) {
      throw InvalidConstraintError("constraints: row " + std::to_string(r) + " has all-zero coefficients");
    }
  }
}

ConstraintSet ConstraintSet::unconstrained(Index p) { return ConstraintSet(MatrixXd(0, p), VectorXd(0)); }

std::vector<ConstraintRow> ConstraintSet::rows() const {
  std::vector<ConstraintRow> out;
  for (Index r = 0; r < q(); ++r) out.push_back({H_.row(r).transpose(), Relation::LessEqual, G_[r]});
  return out;
}

ConstraintSet normalize(const std::vector<ConstraintRow>& rows) {
  if (rows.empty()) throw InvalidConstraintError("normalize: at least one restriction row is required");
  const Index p = rows.front().coeffs.size();
  if (p == 0) throw ShapeError("normalize: empty coefficient vector");

  MatrixXd H(static_cast<Index>(rows.size()), p);
  VectorXd G(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    const auto r = static_cast<Index>(k);
    if (row.coeffs.size() != p) {
      throw ShapeError("normalize: row " + std::to_string(k) + " has " + std::to_string(row.coeffs.size()) +
                       " coefficients, expected " + std::to_string(p));
    }
    if (row.coeffs.cwiseAbs().maxCoeff() == 0.0) {
      throw InvalidConstraintError("normalize: row " + std::to_string(k) + " has all-zero coefficients");
    }
    const double sign = row.relation == Relation::LessEqual ? 1.0 : -1.0;
    H.row(r) = sign * row.coeffs.transpose();
    G[r] = sign * row.bound;
  }
  return ConstraintSet(std::move(H), std::move(G));
}

bool is_feasible(const VectorXd& beta, const ConstraintSet& cs, double slack) {
  if (cs.empty()) return true;
  if (beta.size() != cs.p()) throw ShapeError("is_feasible: beta dimension does not match constraints");
  return ((cs.H() * beta - cs.G()).array() <= slack).all();
}

Interval conditional_interval_from_slack(Index j, double beta_j, const VectorXd& slack,
                                         const ConstraintSet& cs) {
  Interval out;
  for (Index r = 0; r < cs.q(); ++r) {
    const double h = cs.H()(r, j);
    if (h == 0.0) continue;
    // G_r - sum_{k != j} H_rk beta_k
    const double bound = (slack[r] + h * beta_j) / h;
    if (h > 0.0) {
      out.upper = std::min(out.upper, bound);
    } else {
      out.lower = std::max(out.lower, bound);
    }
  }
  if (out.lower > out.upper) {
    const double scale = std::max({1.0, std::abs(out.lower), std::abs(out.upper)});
    if (out.lower - out.upper > 1e-9 * scale) {
      throw InconsistentStateError("conditional_interval: coordinate " + std::to_string(j) +
                                   " has empty range; conditioning point is infeasible");
    }
    out.upper = out.lower;
  }
  return out;
}

Interval conditional_interval(Index j, const VectorXd& beta, const ConstraintSet& cs) {
  if (cs.empty()) return Interval::unbounded();
  if (beta.size() != cs.p()) throw ShapeError("conditional_interval: dimension mismatch");
  if (j < 0 || j >= cs.p()) throw ShapeError("conditional_interval: coordinate out of range");
  const VectorXd slack = cs.G() - cs.H() * beta;
  return conditional_interval_from_slack(j, beta[j], slack, cs);
}

VectorXd find_feasible_point(const ConstraintSet& cs, const std::optional<VectorXd>& hint) {
  const Index p = cs.p();
  if (hint && hint->size() != p) throw ShapeError("find_feasible_point: hint has wrong dimension");
  if (hint && is_feasible(*hint, cs)) return *hint;
  const VectorXd zero = VectorXd::Zero(p);
  if (is_feasible(zero, cs)) return zero;

  constexpr int kMaxSweeps = 10000;
  VectorXd beta = hint ? *hint : zero;
  const VectorXd row_norm_sq = cs.H().rowwise().squaredNorm();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (Index r = 0; r < cs.q(); ++r) {
      const double excess = cs.H().row(r).dot(beta) - cs.G()[r];
      if (excess <= 0.0) continue;
      // Land slightly inside the half-space so the point survives rounding.
      const double margin = 1e-9 * std::max(1.0, std::abs(cs.G()[r]));
      beta -= ((excess + margin) / row_norm_sq[r]) * cs.H().row(r).transpose();
    }
    if (is_feasible(beta, cs)) return beta;
  }
  throw EmptyRegionError("find_feasible_point: projection did not converge in " +
                         std::to_string(kMaxSweeps) + " sweeps; the restricted region may be empty");
}

}  // namespace betarestrict
