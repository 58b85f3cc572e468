#pragma once

#include <array>
#include <optional>
#include <vector>

#include "momentdro/bivariate.hpp"
#include "momentdro/scarf.hpp"

namespace momentdro {

/// Which robust newsvendor formulation a solution belongs to.
enum class NewsvendorModel { BCM, BDM, UCM };

const char* to_string(NewsvendorModel m);

/// One entry of the audit trail behind a centralized solve: a candidate
/// order quantity, the branch it was drawn from, and its objective.
struct NewsvendorCandidate {
  Condition condition;
  double q = 0.0;
  double objective = 0.0;
  bool stationary = false;
};

/// Solution of a robust newsvendor problem. Centralized models carry a
/// single order quantity; the decentralized model carries one per
/// coordinate. The objective is the worst-case expected shortfall at
/// the chosen orders plus (1 - eta) times the total order.
struct NewsvendorSolution {
  NewsvendorModel model = NewsvendorModel::BCM;
  std::vector<double> q_star;
  double objective = 0.0;
  std::optional<ConditionReport> active_condition;
  std::vector<NewsvendorCandidate> candidates;

  double total_order() const;
};

/// Per-branch stationary points of the centralized objective at a given
/// critical ratio, with the eta windows on which each formula exists.
struct StationaryTable {
  double s_a = 0.0;
  double s_b = 0.0;
  double s_c = 0.0;
  std::array<double, 6> q{};
  std::array<bool, 6> window_ok{};
  std::array<std::array<double, 2>, 6> eta_window{};
};

/// Evaluates the per-branch stationary point formulas at eta.
StationaryTable stationary_points(const MomentSpec& spec, double eta);

/// Centralized objective value at order q: worst-case expected
/// shortfall plus (1 - eta) q.
double bcm_objective(const MomentSpec& spec, double eta, double q);

/// Centralized solve over the joint ambiguity set: minimizes the
/// worst-case shortfall plus holding over q >= 0 by comparing every
/// branch's stationary point and interval endpoints.
NewsvendorSolution solve_bcm(const MomentSpec& spec, double eta);

/// Decentralized solve: one marginal-moment newsvendor per coordinate.
NewsvendorSolution solve_bdm(const MomentSpec& spec, double eta);

/// Univariate solve on the pooled demand moments.
NewsvendorSolution solve_ucm(const MomentSpec& spec, double eta);

/// (V_BDM - V_BCM) / V_BCM, the decentralization penalty.
double relative_gap(const MomentSpec& spec, double eta);

/// Total decentralized order minus the centralized order; can be
/// negative.
double order_gap(const MomentSpec& spec, double eta);

/// One- or two-dimensional marginal description used by the
/// decomposition bound. Exactly one of uni/biv is set; w holds the
/// loss weights of the block's coordinates (w[1] ignored for
/// one-dimensional blocks).
struct MarginalBlock {
  std::optional<UnivariateSpec> uni;
  std::optional<MomentSpec> biv;
  std::array<double, 2> w{1.0, 1.0};
};

/// Upper bound on E[max(u1 s + v1_i, u2 s + v2_i)] summed over blocks
/// for a fixed split of the intercepts (sum v1s = v1, sum v2s = v2).
double decomposition_value(const std::vector<MarginalBlock>& blocks,
                           double u1, double u2,
                           const std::vector<double>& v1s,
                           const std::vector<double>& v2s);

/// Minimizes decomposition_value over intercept splits by coordinate
/// descent from the proportional-to-mean split. Any returned value is
/// an upper bound on the joint worst-case expectation by construction.
double multivariate_upper_bound(const std::vector<MarginalBlock>& blocks,
                                double u1, double u2, double v1, double v2);

}  // namespace momentdro
