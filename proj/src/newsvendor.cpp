#include "momentdro/newsvendor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace momentdro {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw infeasible_error("eta in (0,1) violated");
  }
}

double scarf_objective(const UnivariateSpec& u, double eta, double q) {
  return scarf_bound(u, q).value + (1.0 - eta) * q;
}

UnivariateSpec marginal(const MomentSpec& s, int i) {
  return i == 0 ? UnivariateSpec{s.mu1, s.a * s.mu1 * s.mu1}
                : UnivariateSpec{s.mu2, s.b * s.mu2 * s.mu2};
}

// S-value sqrt(num / (4 * scale * lo * hi)); NaN when the window term
// is nonpositive.
double s_value(double num, double scale, double lo, double hi) {
  const double den = 4.0 * scale * lo * hi;
  if (den <= 0.0) return kNan;
  return std::sqrt(std::max(num, 0.0) / den);
}

}  // namespace

const char* to_string(NewsvendorModel m) {
  switch (m) {
    case NewsvendorModel::BCM: return "bcm";
    case NewsvendorModel::BDM: return "bdm";
    case NewsvendorModel::UCM: return "ucm";
  }
  return "?";
}

double NewsvendorSolution::total_order() const {
  double t = 0.0;
  for (double q : q_star) t += q;
  return t;
}

StationaryTable stationary_points(const MomentSpec& spec, double eta) {
  require_valid(spec);
  require_eta(eta);
  const double a = spec.a, b = spec.b, c = spec.c;
  const double mu1 = spec.mu1, mu2 = spec.mu2;
  const double psd = std::max((a - 1.0) * (b - 1.0) - (c - 1.0) * (c - 1.0),
                              0.0);
  const double var_sum = (a - 1.0) * mu1 * mu1 +
                         2.0 * (c - 1.0) * mu1 * mu2 +
                         (b - 1.0) * mu2 * mu2;

  StationaryTable t;
  t.s_a = s_value(a * psd, a, eta, a - a * eta - 1.0);
  t.s_b = s_value(b * psd, b, eta, b - b * eta - 1.0);
  t.s_c = s_value(var_sum, 1.0, eta, 1.0 - eta);
  t.q.fill(kNan);
  t.window_ok.fill(false);
  t.eta_window = {{{kNan, kNan},
                   {0.0, 1.0 - 1.0 / b},
                   {0.0, 1.0 - 1.0 / a},
                   {1.0 / b, 1.0},
                   {1.0 / a, 1.0},
                   {0.0, 1.0}}};

  // The shortfall value is linear in q under condition 1, so that row
  // never contributes a stationary point.

  if (eta < 1.0 - 1.0 / b) {
    t.window_ok[1] = true;
    t.q[1] = ((2.0 * b * eta - b + 1.0) * t.s_b - (c - b)) * mu1 / (b - 1.0);
  }
  if (eta < 1.0 - 1.0 / a) {
    t.window_ok[2] = true;
    t.q[2] = ((2.0 * a * eta - a + 1.0) * t.s_a - (c - a)) * mu2 / (a - 1.0);
  }
  if (eta > 1.0 / b) {
    t.window_ok[3] = true;
    const double s = s_value(b * psd, b, 1.0 - eta, b * eta - 1.0);
    t.q[3] = ((2.0 * b * eta - b - 1.0) * s - (c - b)) * mu1 / (b - 1.0);
  }
  if (eta > 1.0 / a) {
    t.window_ok[4] = true;
    const double s = s_value(a * psd, a, 1.0 - eta, a * eta - 1.0);
    t.q[4] = ((2.0 * a * eta - a - 1.0) * s - (c - a)) * mu2 / (a - 1.0);
  }
  t.window_ok[5] = true;
  t.q[5] = (2.0 * eta - 1.0) * t.s_c + mu1 + mu2;
  return t;
}

double bcm_objective(const MomentSpec& spec, double eta, double q) {
  return worst_case_value(spec, q).first + (1.0 - eta) * q;
}

NewsvendorSolution solve_bcm(const MomentSpec& spec, double eta) {
  require_valid(spec);
  require_eta(eta);

  std::vector<std::pair<double, bool>> raw;  // (q, from stationary formula)
  raw.emplace_back(0.0, false);

  const ConditionReport table = classify_condition(spec, 0.0);
  for (const QInterval& iv : table.interval_table) {
    if (iv.empty) continue;
    if (std::isfinite(iv.lo) && iv.lo >= 0.0) raw.emplace_back(iv.lo, false);
    if (std::isfinite(iv.hi) && iv.hi >= 0.0) raw.emplace_back(iv.hi, false);
  }
  const StationaryTable st = stationary_points(spec, eta);
  for (int i = 0; i < 6; ++i) {
    if (st.window_ok[i] && std::isfinite(st.q[i]) && st.q[i] >= 0.0) {
      raw.emplace_back(st.q[i], true);
    }
  }

  std::sort(raw.begin(), raw.end());
  NewsvendorSolution sol;
  sol.model = NewsvendorModel::BCM;

  double best_q = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  double last_q = -1.0;
  for (const auto& [q, stationary] : raw) {
    if (!raw.empty() && last_q >= 0.0 &&
        std::abs(q - last_q) <= 1e-12 * std::max(1.0, q)) {
      if (stationary && !sol.candidates.empty()) {
        sol.candidates.back().stationary = true;
      }
      continue;
    }
    last_q = q;
    const auto [value, rep] = worst_case_value(spec, q);
    const double obj = value + (1.0 - eta) * q;
    sol.candidates.push_back({rep.condition, q, obj, stationary});
    if (obj < best_obj) {
      best_obj = obj;
      best_q = q;
    }
  }

  sol.q_star = {best_q};
  sol.objective = best_obj;
  sol.active_condition = classify_condition(spec, best_q);
  return sol;
}

NewsvendorSolution solve_bdm(const MomentSpec& spec, double eta) {
  require_valid(spec);
  require_eta(eta);
  NewsvendorSolution sol;
  sol.model = NewsvendorModel::BDM;
  sol.objective = 0.0;
  for (int i = 0; i < 2; ++i) {
    const UnivariateSpec u = marginal(spec, i);
    const double q = scarf_order(u, eta);
    const double obj = scarf_objective(u, eta, q);
    sol.q_star.push_back(q);
    sol.objective += obj;
    sol.candidates.push_back({Condition::C1, q, obj, false});
  }
  return sol;
}

NewsvendorSolution solve_ucm(const MomentSpec& spec, double eta) {
  require_valid(spec);
  require_eta(eta);
  const auto [mu_bar, sigma_bar] = pooled_moments(spec);
  const UnivariateSpec u{mu_bar, sigma_bar};
  NewsvendorSolution sol;
  sol.model = NewsvendorModel::UCM;
  const double q = scarf_order(u, eta);
  sol.q_star = {q};
  sol.objective = scarf_objective(u, eta, q);
  sol.candidates.push_back({Condition::C6, q, sol.objective, false});
  return sol;
}

double relative_gap(const MomentSpec& spec, double eta) {
  const double v_bcm = solve_bcm(spec, eta).objective;
  const double v_bdm = solve_bdm(spec, eta).objective;
  return (v_bdm - v_bcm) / v_bcm;
}

double order_gap(const MomentSpec& spec, double eta) {
  return solve_bdm(spec, eta).total_order() -
         solve_bcm(spec, eta).total_order();
}

namespace {

struct BlockView {
  double mean = 0.0;        // E[w . x]
  bool univariate = false;
  UnivariateSpec uni{1.0, 1.0};
  MomentSpec biv{1.0, 1.0, 2.0, 2.0, 1.0};
};

BlockView view_of(const MarginalBlock& blk) {
  if (blk.uni.has_value() == blk.biv.has_value()) {
    throw infeasible_error(
        "block must carry exactly one marginal description");
  }
  if (blk.w[0] < 0.0 || blk.w[1] < 0.0) {
    throw infeasible_error("w >= 0 violated");
  }
  BlockView v;
  if (blk.uni) {
    const double w = blk.w[0];
    if (w <= 0.0) throw infeasible_error("w > 0 violated for 1-dim block");
    v.univariate = true;
    v.uni = UnivariateSpec{w * blk.uni->mu, w * w * blk.uni->sigma2};
    v.mean = v.uni.mu;
    return v;
  }
  const MomentSpec& s = *blk.biv;
  require_valid(s);
  if (blk.w[0] <= 0.0 && blk.w[1] <= 0.0) {
    throw infeasible_error("w > 0 violated for 2-dim block");
  }
  if (blk.w[0] <= 0.0 || blk.w[1] <= 0.0) {
    // One coordinate drops out; collapse to its marginal.
    const int keep = blk.w[0] > 0.0 ? 0 : 1;
    const double w = blk.w[keep];
    const UnivariateSpec m = marginal(s, keep);
    v.univariate = true;
    v.uni = UnivariateSpec{w * m.mu, w * w * m.sigma2};
    v.mean = v.uni.mu;
    return v;
  }
  v.biv = MomentSpec{blk.w[0] * s.mu1, blk.w[1] * s.mu2, s.a, s.b, s.c};
  v.mean = v.biv.mu1 + v.biv.mu2;
  return v;
}

// Worst-case E[(w.x - r)+] for one block; exact for r < 0 since the
// weighted sum is nonnegative.
double block_shortfall(const BlockView& v, double r) {
  if (r < 0.0) return v.mean - r;
  if (v.univariate) return scarf_bound(v.uni, r).value;
  return worst_case_value(v.biv, r).first;
}

}  // namespace

double decomposition_value(const std::vector<MarginalBlock>& blocks,
                           double u1, double u2,
                           const std::vector<double>& v1s,
                           const std::vector<double>& v2s) {
  if (!(u1 < u2)) throw infeasible_error("u1 < u2 violated");
  if (blocks.empty()) throw infeasible_error("empty block partition");
  if (v1s.size() != blocks.size() || v2s.size() != blocks.size()) {
    throw infeasible_error("split size does not match block count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const BlockView v = view_of(blocks[i]);
    const double r = (v1s[i] - v2s[i]) / (u2 - u1);
    total += (u2 - u1) * block_shortfall(v, r) + u1 * v.mean + v1s[i];
  }
  return total;
}

double multivariate_upper_bound(const std::vector<MarginalBlock>& blocks,
                                double u1, double u2, double v1, double v2) {
  if (!(u1 < u2)) throw infeasible_error("u1 < u2 violated");
  if (blocks.empty()) throw infeasible_error("empty block partition");

  const std::size_t n = blocks.size();
  std::vector<BlockView> views;
  views.reserve(n);
  double mean_total = 0.0;
  for (const auto& blk : blocks) {
    views.push_back(view_of(blk));
    mean_total += views.back().mean;
  }

  // Only the kink locations r_i matter: with the intercept sums fixed,
  // the affine parts of the split contribute a constant, and the r_i
  // are free up to sum r_i = (v1 - v2)/(u2 - u1).
  const double R = (v1 - v2) / (u2 - u1);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = mean_total > 0.0 ? R * views[i].mean / mean_total : R / double(n);
  }

  auto total_at = [&](const std::vector<double>& rv) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += block_shortfall(views[i], rv[i]);
    return t;
  };

  double cur = total_at(r);
  if (n > 1) {
    const double span =
        std::max(1.0, std::abs(R)) + mean_total;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
      const double before = cur;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          // Golden-section search on the exchange r_i + t, r_j - t.
          auto f = [&](double t) {
            return block_shortfall(views[i], r[i] + t) +
                   block_shortfall(views[j], r[j] - t);
          };
          double lo = -span, hi = span;
          double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
          double f1 = f(m1), f2 = f(m2);
          while (hi - lo > 1e-7) {
            if (f1 <= f2) {
              hi = m2;
              m2 = m1;
              f2 = f1;
              m1 = hi - phi * (hi - lo);
              f1 = f(m1);
            } else {
              lo = m1;
              m1 = m2;
              f1 = f2;
              m2 = lo + phi * (hi - lo);
              f2 = f(m2);
            }
          }
          const double t = 0.5 * (lo + hi);
          const double base = block_shortfall(views[i], r[i]) +
                              block_shortfall(views[j], r[j]);
          const double moved = f(t);
          if (moved < base) {
            r[i] += t;
            r[j] -= t;
            cur += moved - base;
          }
        }
      }
      if (before - cur <= 1e-10 * (1.0 + std::abs(cur))) break;
    }
    cur = total_at(r);
  }
  return (u2 - u1) * cur + u1 * mean_total + v1;
}

}  // namespace momentdro
