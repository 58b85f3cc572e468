#pragma once

#include "momentdro/moments.hpp"

namespace momentdro {

/**
 * @brief Univariate moment description: mean and raw second moment.
 *
 * sigma2 is E[X^2], not the variance. Feasibility requires
 * sigma2 >= mu^2; equality is the degenerate point mass at mu.
 */
struct UnivariateSpec {
  double mu;      ///< mean, strictly positive
  double sigma2;  ///< second moment E[X^2]
};

/// Which branch of the univariate bound produced the result.
enum class ScarfRegime {
  SmallQ,     ///< q <= sigma2/(2 mu): linear value, support {0, sigma2/mu}
  LargeQ,     ///< q > sigma2/(2 mu): value (Q - q + mu)/2, support {q-Q, q+Q}
  Degenerate  ///< sigma2 = mu^2: point mass at mu
};

/// Worst-case expectation value with the attaining two-point law.
struct ScarfResult {
  double value;
  DiscreteDistribution distribution;  ///< support in the first coordinate
  ScarfRegime regime;
};

/**
 * @brief Worst-case E[(X - q)+] over mean/second-moment ambiguity on
 *        the nonnegative half-line.
 *
 * For q <= sigma2/(2 mu) the value is mu - q*mu^2/sigma2, attained on
 * {0, sigma2/mu}; beyond that the value is (Q - q + mu)/2 with
 * Q = sqrt(q^2 - 2 mu q + sigma2), attained on {q-Q, q+Q}.
 *
 * @throws infeasible_error for q < 0 or an infeasible uspec.
 */
ScarfResult scarf_bound(const UnivariateSpec& uspec, double q);

/**
 * @brief Robust newsvendor order quantity at critical ratio eta.
 *
 * Minimizes scarf_bound(uspec, q).value + (1 - eta)*q over q >= 0:
 * q* = mu + (sqrt(sigma2 - mu^2)/2)*(2 eta - 1)/sqrt(eta (1 - eta))
 * when eta exceeds (sigma2 - mu^2)/sigma2, else q* = 0.
 *
 * @throws infeasible_error for eta outside (0, 1) or infeasible uspec.
 */
double scarf_order(const UnivariateSpec& uspec, double eta);

}  // namespace momentdro
