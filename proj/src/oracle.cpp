#include "momentdro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace momentdro {

namespace {

double default_slack(const MomentSpec& s) {
  return 1e-6 * (1.0 + s.a * s.mu1 * s.mu1 + s.b * s.mu2 * s.mu2);
}

const char* row_name(std::size_t r) {
  switch (r) {
    case 0: return "total mass";
    case 1: case 2: return "E[X1]";
    case 3: case 4: return "E[X2]";
    case 5: case 6: return "E[X1^2]";
    case 7: case 8: return "E[X2^2]";
    case 9: case 10: return "E[X1 X2]";
  }
  return "?";
}

}  // namespace

OracleResult lp_maximize(const MomentSpec& spec,
                         const std::function<double(double, double)>& loss,
                         const GridConfig& grid,
                         const std::vector<std::array<double, 2>>&
                             extra_points) {
  require_valid(spec);
  if (grid.n_per_axis < 10) {
    throw infeasible_error("n_per_axis >= 10 violated");
  }
  if (!(grid.box_scale > 0.0)) {
    throw infeasible_error("box_scale > 0 violated");
  }
  const double delta =
      grid.moment_slack >= 0.0 ? grid.moment_slack : default_slack(spec);

  const double var_sum =
      (spec.a - 1.0) * spec.mu1 * spec.mu1 +
      2.0 * (spec.c - 1.0) * spec.mu1 * spec.mu2 +
      (spec.b - 1.0) * spec.mu2 * spec.mu2;
  const double sigma_sum = std::sqrt(std::max(var_sum, 0.0));
  const double hi1 = spec.mu1 + grid.box_scale * sigma_sum;
  const double hi2 = spec.mu2 + grid.box_scale * sigma_sum;

  const std::array<double, 5> targets = {
      spec.mu1, spec.mu2, spec.a * spec.mu1 * spec.mu1,
      spec.b * spec.mu2 * spec.mu2, spec.c * spec.mu1 * spec.mu2};

  std::vector<LpProblem::Row> rows;
  rows.push_back({RowSense::EQ, 1.0});
  for (double t : targets) {
    rows.push_back({RowSense::LE, t + delta});
    rows.push_back({RowSense::GE, t - delta});
  }
  LpProblem lp(rows);

  std::vector<std::array<double, 2>> support;
  const int n = grid.n_per_axis;
  support.reserve(static_cast<std::size_t>(n + 1) * (n + 1) +
                  extra_points.size());
  for (int i = 0; i <= n; ++i) {
    const double x1 = hi1 * i / n;
    for (int j = 0; j <= n; ++j) {
      support.push_back({x1, hi2 * j / n});
    }
  }
  for (const auto& p : extra_points) {
    if (p[0] >= 0.0 && p[1] >= 0.0) support.push_back(p);
  }

  std::vector<double> coeffs(rows.size());
  for (const auto& p : support) {
    const std::array<double, 5> mom = {p[0], p[1], p[0] * p[0], p[1] * p[1],
                                       p[0] * p[1]};
    coeffs[0] = 1.0;
    for (int k = 0; k < 5; ++k) {
      coeffs[1 + 2 * k] = mom[k];
      coeffs[2 + 2 * k] = mom[k];
    }
    lp.add_column(loss(p[0], p[1]), coeffs);
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible) {
    std::ostringstream msg;
    msg << "discretized moment system infeasible at slack " << delta;
    if (!sol.infeasible_rows.empty()) {
      msg << " (violated: " << row_name(sol.infeasible_rows.front()) << ")";
    }
    msg << "; suggested slack >= " << 10.0 * delta;
    throw lp_infeasible_error(msg.str());
  }
  if (sol.status != LpStatus::Optimal) {
    throw consistency_error(std::string("oracle LP failed: ") + sol.message);
  }

  OracleResult out;
  out.value = sol.objective;
  out.slack = delta;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (sol.x[j] > 0.0) {
      out.distribution.points.push_back(support[j]);
      out.distribution.probs.push_back(sol.x[j]);
    }
  }
  out.slack_used[0] = sol.row_activity[0] - 1.0;
  for (int k = 0; k < 5; ++k) {
    out.slack_used[1 + k] = sol.row_activity[1 + 2 * k] - targets[k];
  }
  return out;
}

OracleResult lp_worst_case(const MomentSpec& spec, double q,
                           const GridConfig& grid) {
  if (!(q >= 0.0)) throw infeasible_error("q >= 0 violated");
  std::vector<std::array<double, 2>> extra;
  if (grid.augment) {
    extra.push_back({0.0, 0.0});
    extra.push_back({q, 0.0});
    extra.push_back({0.0, q});
    try {
      const DiscreteDistribution d = worst_case_distribution(spec, q);
      extra.insert(extra.end(), d.points.begin(), d.points.end());
    } catch (const degenerate_error&) {
      // The analytic support is unavailable; the plain grid still
      // provides a valid lower bound.
    }
  }
  return lp_maximize(
      spec, [q](double x1, double x2) { return std::max(x1 + x2 - q, 0.0); },
      grid, extra);
}

double max_prob_below(const MomentSpec& spec, double xi,
                      const GridConfig& grid) {
  if (!(xi >= 0.0)) throw infeasible_error("xi >= 0 violated");
  std::vector<std::array<double, 2>> extra;
  if (grid.augment) {
    extra.push_back({0.0, 0.0});
    extra.push_back({xi, 0.0});
    const double var_sum =
        (spec.a - 1.0) * spec.mu1 * spec.mu1 +
        2.0 * (spec.c - 1.0) * spec.mu1 * spec.mu2 +
        (spec.b - 1.0) * spec.mu2 * spec.mu2;
    const double hi2 =
        spec.mu2 + grid.box_scale * std::sqrt(std::max(var_sum, 0.0));
    const int n = grid.n_per_axis;
    for (int j = 0; j <= n; ++j) {
      extra.push_back({xi, hi2 * j / n});
    }
  }
  const double edge = xi * (1.0 + 1e-12) + 1e-300;
  return lp_maximize(
             spec,
             [edge](double x1, double) { return x1 <= edge ? 1.0 : 0.0; },
             grid, extra)
      .value;
}

double shifting_bound(const MomentSpec& spec) {
  require_valid(spec);
  if (spec.a <= spec.b) {
    return (1.0 - std::sqrt((spec.a - 1.0) / (spec.b - 1.0))) * spec.mu1;
  }
  return (1.0 - std::sqrt((spec.b - 1.0) / (spec.a - 1.0))) * spec.mu2;
}

}  // namespace momentdro
