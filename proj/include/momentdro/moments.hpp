#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace momentdro {

/**
 * @brief Bivariate moment description of a nonnegative demand pair.
 *
 * The ambiguity set consists of all distributions on the nonnegative
 * quadrant with E[X1] = mu1, E[X2] = mu2, E[X1^2] = a*mu1^2,
 * E[X2^2] = b*mu2^2 and E[X1*X2] = c*mu1*mu2.
 */
struct MomentSpec {
  double mu1;  ///< mean of X1, strictly positive
  double mu2;  ///< mean of X2, strictly positive
  double a;    ///< second moment scale of X1: E[X1^2] = a*mu1^2
  double b;    ///< second moment scale of X2: E[X2^2] = b*mu2^2
  double c;    ///< cross moment scale: E[X1*X2] = c*mu1*mu2
};

/// One failed feasibility inequality together with its residual.
struct Violation {
  std::string inequality;  ///< human-readable name, e.g. "a > 1"
  double residual;         ///< amount by which the inequality fails
};

/// Outcome of validate(): either clean, or a list of named violations.
struct ValidationResult {
  bool ok = false;
  bool boundary = false;  ///< some inequality holds only within tolerance
  std::vector<Violation> violations;

  explicit operator bool() const { return ok; }
};

/// Covariance-matrix view of a MomentSpec.
struct CovarianceView {
  double m11;  ///< Var(X1) = (a-1)*mu1^2
  double m12;  ///< Cov(X1,X2) = (c-1)*mu1*mu2
  double m22;  ///< Var(X2) = (b-1)*mu2^2
  double rho;  ///< correlation (c-1)/sqrt((a-1)(b-1))
};

/**
 * @brief Finite discrete distribution on the nonnegative quadrant.
 *
 * Univariate distributions store their support in the first coordinate
 * with the second coordinate zero.
 */
struct DiscreteDistribution {
  std::vector<std::array<double, 2>> points;
  std::vector<double> probs;

  /// E[(x1 + x2 - q)+] under this distribution.
  double expected_shortfall(double q) const;
  /// Realized moments (E[X1], E[X2], E[X1^2], E[X2^2], E[X1 X2]).
  std::array<double, 5> moments() const;
  /// Total probability mass (should be 1 up to rounding).
  double total_mass() const;
};

/// Raised when the spec inequalities cannot be satisfied at all.
class infeasible_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when two internally redundant computations disagree.
class consistency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Check the feasibility inequalities of a MomentSpec.
 *
 * Checks mu1 > 0, mu2 > 0, a > 1, b > 1, c >= 0,
 * (a-1)(b-1) >= (c-1)^2 and c^2 <= a*b. Inequalities are evaluated
 * with absolute tolerance 1e-12 scaled by max(1, |lhs|, |rhs|);
 * values within tolerance of an inequality boundary are accepted and
 * flagged boundary = true.
 *
 * Total over all finite inputs; violations are data, not exceptions.
 */
ValidationResult validate(const MomentSpec& spec);

/// Throw infeasible_error naming the first violated inequality, if any.
void require_valid(const MomentSpec& spec);

/// Covariance matrix entries and correlation of a valid spec.
CovarianceView covariance_view(const MomentSpec& spec);

/**
 * @brief Build a MomentSpec from a correlation instead of c.
 *
 * Sets c = 1 + rho*sqrt((a-1)(b-1)). Round-trips with
 * covariance_view().rho to 1e-12 relative.
 *
 * @throws infeasible_error when rho is outside [-1, 1] or the implied
 *         c turns negative (the message names the broken inequality).
 */
MomentSpec from_correlation(double mu1, double mu2, double a, double b,
                            double rho);

/**
 * @brief Moments of the pooled demand X1 + X2.
 * @return (mu_bar, sigma_bar) with mu_bar = mu1 + mu2 and
 *         sigma_bar = E[(X1+X2)^2] = a*mu1^2 + b*mu2^2 + 2c*mu1*mu2.
 */
std::pair<double, double> pooled_moments(const MomentSpec& spec);

}  // namespace momentdro
