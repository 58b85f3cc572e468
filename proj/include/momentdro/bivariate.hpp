#pragma once

#include <array>
#include <optional>
#include <string>

#include "momentdro/moments.hpp"
#include "momentdro/scarf.hpp"

namespace momentdro {

/// The six mutually exclusive parameter regimes of the bivariate bound.
enum class Condition { C1 = 1, C2 = 2, C3 = 3, C4 = 4, C5 = 5, C6 = 6 };

/// Which column of the q-interval table the inputs fall into.
enum class CaseLabel {
  AGtCGtB,           ///< a > c > b
  BGtCGtA,           ///< b > c > a
  InteriorUnderPos,  ///< a > c, b > c, C_bar >= C_under, C_under > 0
  InteriorUnderNeg,  ///< a > c, b > c, C_bar >= C_under, C_under < 0
  InteriorBarPos,    ///< a > c, b > c, C_bar < C_under, C_bar > 0
  InteriorBarNeg,    ///< a > c, b > c, C_bar < C_under, C_bar < 0
  Pooled             ///< a = b = c: delegated to the univariate bound
};

const char* to_string(Condition c);
const char* to_string(CaseLabel l);

/// Half-open or closed interval of q; empty when a condition cannot
/// occur in the active case.
struct QInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;
  bool empty = true;

  bool contains(double q, double tol) const;
};

/**
 * @brief Full classification output: the active condition plus every
 *        intermediate quantity used to decide it.
 */
struct ConditionReport {
  Condition condition;
  CaseLabel case_label;
  double q_a;      ///< Q_a
  double q_b;      ///< Q_b
  double q_c;      ///< Q_c
  double zeta_a;   ///< a*mu1 + c*mu2 - q
  double zeta_b;   ///< c*mu1 + b*mu2 - q
  std::array<QInterval, 6> interval_table;  ///< per condition, index 0 = C1

  struct Aux {
    double A_bar, A_under;  ///< first breakpoints of q
    double B_bar, B_under;  ///< second breakpoints of q
    double C_bar, C_under;  ///< sign quantities deciding the case
    double D_bar, D_under;
    double E;
  } aux;

  bool boundary_case = false;  ///< routed across a measure-zero theta boundary
  bool pooled = false;         ///< a = b = c, univariate delegation
};

/**
 * @brief Dual feasible 6-vector certifying the worst-case value.
 *
 * Defines h1(x; z) = z1 + z2 x1 + z3 x2 + z4 x1^2 + z5 x2^2 + z6 x1 x2
 * and h2 = h1 + q - x1 - x2; both are nonnegative on the quadrant and
 * the objective z1 + z2 mu1 + z3 mu2 + z4 a mu1^2 + z5 b mu2^2 +
 * z6 c mu1 mu2 equals the primal value.
 */
struct DualCertificate {
  std::array<double, 6> z;
  double q;  ///< the order of the certified instance (defines h2)

  double h1(double x1, double x2) const;
  double h2(double x1, double x2) const;
  double objective(const MomentSpec& spec) const;
};

/// Outcome of the primal/dual agreement check.
struct GapReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;  ///< |primal - dual| / (1 + |primal|)
  bool feasible_primal = false;
  bool feasible_dual = false;
  bool dual_skipped = false;  ///< certificate unavailable on this branch
  std::string skip_reason;
};

/// Affine reduction of a two-piece loss onto the shortfall kernel.
struct ReducedLoss {
  double scale;        ///< u2 - u1
  double offset;       ///< u1 * w.mu + v1
  MomentSpec reduced_spec;  ///< means scaled by w; a, b, c unchanged
  double reduced_q;    ///< -(v2 - v1)/(u2 - u1), may be negative
  std::array<double, 2> w;

  /// Worst case of E[max{u1 w.x + v1, u2 w.x + v2}]; dispatches to the
  /// univariate bound when a component of w is zero and handles
  /// reduced_q < 0 exactly.
  double evaluate_worst_case() const;
};

/// Raised when a closed-form branch degenerates at a region boundary
/// (merged support points, vanishing denominators). Callers fall back
/// to the LP oracle and flag the result.
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Decide which of the six conditions holds at (spec, q).
 *
 * Routes through the q-interval table of the active theta-case and
 * cross-checks against the direct condition inequalities; a
 * disagreement beyond tolerance raises consistency_error.
 *
 * @throws infeasible_error for infeasible spec or q < 0.
 */
ConditionReport classify_condition(const MomentSpec& spec, double q);

/**
 * @brief Exact worst-case E[(X1 + X2 - q)+] over the ambiguity set.
 * @return value and the classification that selected the branch.
 */
std::pair<double, ConditionReport> worst_case_value(const MomentSpec& spec,
                                                    double q);

/**
 * @brief A distribution in the ambiguity set attaining the worst case.
 *
 * Three support points under conditions 1-5 (two when the line support
 * merges), four under condition 6.
 *
 * @throws degenerate_error at boundary-degenerate condition-6 inputs.
 */
DiscreteDistribution worst_case_distribution(const MomentSpec& spec, double q);

/**
 * @brief Closed-form dual certificate for the active condition.
 * @throws degenerate_error when the branch quantities degenerate
 *         (certificates are a verification aid, not required for values).
 */
DualCertificate dual_certificate(const MomentSpec& spec, double q);

/**
 * @brief Primal/dual agreement report at (spec, q).
 *
 * feasible_primal checks the attaining distribution's moments and
 * value; feasible_dual checks the Hessian, the exact quadrant minimum
 * of h1 and h2 and a verification grid. Degenerate duals are reported
 * as skipped, never raised.
 */
GapReport verify_duality(const MomentSpec& spec, double q);

/**
 * @brief Map max{u1 w.x + v1, u2 w.x + v2} onto the shortfall kernel.
 *
 * scale * E[(w.x - reduced_q)+] + offset reproduces the two-piece loss
 * pointwise, so the worst case follows from worst_case_value on the
 * reduced spec.
 *
 * @throws infeasible_error when u1 >= u2 or w has a negative component.
 */
ReducedLoss reduce_loss(double u1, double u2, double v1, double v2,
                        const std::array<double, 2>& w,
                        const MomentSpec& spec);

}  // namespace momentdro
