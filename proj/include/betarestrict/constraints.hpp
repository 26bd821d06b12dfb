#pragma once

// Linear inequality restrictions H beta <= G.

#include "betarestrict/truncnorm.hpp"
#include "betarestrict/types.hpp"

#include <optional>
#include <vector>

namespace betarestrict {

enum class Relation { LessEqual, GreaterEqual };

struct ConstraintRow {
  VectorXd coeffs;
  Relation relation = Relation::LessEqual;
  double bound = 0.0;
};

// Boundary comparisons allow this much slack.
inline constexpr double kFeasibilitySlack = 1e-12;

/// Restriction system stored entirely in <= form. An empty system (q = 0)
/// still knows its dimension p.
class ConstraintSet {
public:
  ConstraintSet() = default;
  ConstraintSet(MatrixXd H, VectorXd G);

  static ConstraintSet unconstrained(Index p);

  const MatrixXd& H() const { return H_; }
  const VectorXd& G() const { return G_; }
  Index q() const { return H_.rows(); }
  Index p() const { return H_.cols(); }
  bool empty() const { return q() == 0; }

  /// Rows back in (coeffs, <=, bound) form.
  std::vector<ConstraintRow> rows() const;

private:
  MatrixXd H_;
  VectorXd G_;
};

/// Folds >= rows into <= rows by negation; rejects all-zero rows.
ConstraintSet normalize(const std::vector<ConstraintRow>& rows);

bool is_feasible(const VectorXd& beta, const ConstraintSet& cs, double slack = kFeasibilitySlack);

/// Range of values coordinate j may take with the others held at beta.
Interval conditional_interval(Index j, const VectorXd& beta, const ConstraintSet& cs);

/// Same as conditional_interval, given the precomputed slack G - H beta.
Interval conditional_interval_from_slack(Index j, double beta_j, const VectorXd& slack,
                                         const ConstraintSet& cs);

/// A point satisfying every row: the hint, else zero, else cyclic projection
/// of the hint onto violated half-spaces.
VectorXd find_feasible_point(const ConstraintSet& cs, const std::optional<VectorXd>& hint = std::nullopt);

}  // namespace betarestrict
