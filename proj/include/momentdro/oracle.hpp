#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "momentdro/bivariate.hpp"
#include "momentdro/simplex.hpp"

namespace momentdro {

/// The discretized moment system admitted no distribution at the
/// requested slack; distinct from bad inputs so callers can map it to
/// a numeric failure rather than a usage error.
class lp_infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretization parameters for the grid restriction of the inner
/// problem. The box is [0, mu_i + box_scale * sigma_sum] per axis with
/// n_per_axis intervals, so doubling n_per_axis nests the grids. A
/// negative moment_slack selects the default 1e-6 * (1 + a mu1^2 +
/// b mu2^2), which scales with the largest constraint coefficient.
struct GridConfig {
  int n_per_axis = 200;
  double box_scale = 8.0;
  double moment_slack = -1.0;
  bool augment = true;
};

struct OracleResult {
  double value = 0.0;
  DiscreteDistribution distribution;
  /// Residuals of (mass, E[X1], E[X2], E[X1^2], E[X2^2], E[X1 X2])
  /// against their targets at the optimum.
  std::array<double, 6> slack_used{};
  /// Slack actually applied to the moment rows.
  double slack = 0.0;
};

/// Maximizes the expectation of an arbitrary loss over distributions
/// supported on the grid whose moments match the spec within the
/// slack. extra_points are injected into the support unconditionally.
OracleResult lp_maximize(const MomentSpec& spec,
                         const std::function<double(double, double)>& loss,
                         const GridConfig& grid,
                         const std::vector<std::array<double, 2>>&
                             extra_points);

/// Grid restriction of the worst-case expected shortfall at q. With
/// grid.augment the analytic support points and (0,0), (q,0), (0,q)
/// are injected so the restriction can attain the supremum.
OracleResult lp_worst_case(const MomentSpec& spec, double q,
                           const GridConfig& grid);

/// Worst-case P(X1 <= xi) over the discretized ambiguity set.
double max_prob_below(const MomentSpec& spec, double xi,
                      const GridConfig& grid);

/// Support floor of the lower-variance coordinate under perfect
/// positive correlation.
double shifting_bound(const MomentSpec& spec);

}  // namespace momentdro
