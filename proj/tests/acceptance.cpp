// Acceptance gate: one pass/fail line per criterion, nonzero exit on
// any failure. Each criterion carries its own tolerances and runtime
// budget; failures print the offending instance.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "momentdro/bivariate.hpp"
#include "momentdro/newsvendor.hpp"
#include "momentdro/oracle.hpp"
#include "momentdro/scarf.hpp"
#include "momentdro/sdp.hpp"

using namespace momentdro;

namespace {

struct acceptance_failure {
  std::string message;
};

#define ACC(cond, msg)                                     \
  do {                                                     \
    if (!(cond)) {                                         \
      std::ostringstream acc_os;                           \
      acc_os << msg;                                       \
      throw acceptance_failure{acc_os.str()};              \
    }                                                      \
  } while (0)

std::string describe(const MomentSpec& s) {
  std::ostringstream os;
  os << "spec(mu1=" << s.mu1 << ", mu2=" << s.mu2 << ", a=" << s.a
     << ", b=" << s.b << ", c=" << s.c << ")";
  return os.str();
}

std::string describe(const MomentSpec& s, double q) {
  std::ostringstream os;
  os << describe(s) << ", q=" << q;
  return os.str();
}

MomentSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(0.2, 5.0);
  std::uniform_real_distribution<double> shape(1.05, 8.0);
  std::uniform_real_distribution<double> corr(-0.95, 0.95);
  for (;;) {
    MomentSpec s{mean(rng), mean(rng), shape(rng), shape(rng), 0.0};
    s.c = 1.0 + corr(rng) * std::sqrt((s.a - 1.0) * (s.b - 1.0));
    if (s.c < 0.0) continue;
    if (validate(s).ok) return s;
  }
}

double random_q(std::mt19937_64& rng, const MomentSpec& s) {
  const double mu_bar = s.mu1 + s.mu2;
  const auto [m, second] = pooled_moments(s);
  (void)m;
  const double sigma = std::sqrt(std::max(second - mu_bar * mu_bar, 0.0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < 0.05) return 0.0;
  return u(rng) * (mu_bar + 3.0 * sigma);
}

// The six predicates of the partition, recomputed from scratch so the
// routed classification is checked against an independent evaluation.
std::array<bool, 6> direct_predicates(const MomentSpec& s, double q) {
  const double a = s.a, b = s.b, c = s.c;
  const double mu1 = s.mu1, mu2 = s.mu2;
  const double det = a * b - c * c;
  const double psd = std::max((a - 1.0) * (b - 1.0) -
                                  (c - 1.0) * (c - 1.0),
                              0.0);
  const double qa = std::hypot(q - (a - c) * mu2 / (a - 1.0),
                               mu2 * std::sqrt(a * psd) / (a - 1.0));
  const double qb = std::hypot(q - (b - c) * mu1 / (b - 1.0),
                               mu1 * std::sqrt(b * psd) / (b - 1.0));
  const double za = a * mu1 + c * mu2 - q;
  const double zb = c * mu1 + b * mu2 - q;
  const bool pa = 2.0 * q * (a - c) <= det * mu2;
  const bool pb = 2.0 * q * (b - c) <= det * mu1;
  const bool ta = qa <= std::abs(za);
  const bool tb = qb <= std::abs(zb);
  return {pa && pb,
          !pb && tb && zb >= 0.0,
          !pa && ta && za >= 0.0,
          !pb && tb && zb <= 0.0,
          !pa && ta && za <= 0.0,
          !ta && !tb};
}

double pooled_scarf(const MomentSpec& s, double q) {
  const auto [mu_bar, sigma_bar] = pooled_moments(s);
  return scarf_bound({mu_bar, sigma_bar}, q).value;
}

// Deterministic scan that yields one (spec, q) per condition plus
// extras, used by the oracle and certificate criteria.
std::vector<std::pair<MomentSpec, double>> canonical_instances(
    std::size_t want) {
  const std::vector<MomentSpec> specs = {
      {1.0, 1.0, 2.0, 6.0, 0.3},  {1.0, 1.0, 2.0, 6.0, 1.0},
      {1.0, 1.0, 2.0, 6.0, 1.5},  {1.0, 1.0, 2.0, 6.0, 2.4},
      {0.7, 1.8, 3.5, 2.5, 0.5},  {0.7, 1.8, 3.5, 2.5, 1.2},
      {2.0, 0.5, 2.2, 4.0, 0.8},  {1.0, 2.0, 5.0, 1.5, 1.4},
      {2.0, 0.4, 1.3, 1.5, 0.62}, {0.4, 2.0, 1.5, 1.3, 0.62},
  };
  const std::vector<double> q_scales = {0.1, 0.3, 0.5, 0.8, 1.2,
                                        1.8, 2.6, 3.5, 5.0};
  std::array<bool, 6> seen{};
  std::vector<std::pair<MomentSpec, double>> picked;
  for (int pass = 0; pass < 2 && picked.size() < want; ++pass) {
    for (const MomentSpec& s : specs) {
      if (!validate(s).ok) continue;
      for (double scale : q_scales) {
        if (picked.size() >= want) break;
        const double q = scale * (s.mu1 + s.mu2);
        const ConditionReport r = classify_condition(s, q);
        const int idx = static_cast<int>(r.condition) - 1;
        const bool fresh = !seen[idx];
        if (pass == 0 && !fresh) continue;
        bool duplicate = false;
        for (const auto& [ps, pq] : picked) {
          duplicate = duplicate || (ps.c == s.c && ps.mu1 == s.mu1 &&
                                    ps.a == s.a && pq == q);
        }
        if (duplicate) continue;
        seen[idx] = true;
        picked.emplace_back(s, q);
      }
    }
  }
  return picked;
}

// ---------------------------------------------------------------------
// Criterion 1: the balanced-ratio pooling curve of the running example.
void criterion_1() {
  const double s5 = std::sqrt(5.0);
  const NewsvendorSolution bdm =
      solve_bdm(from_correlation(1.0, 1.0, 2.0, 6.0, 0.3), 0.5);
  ACC(std::abs(bdm.objective - 2.0) <= 1e-9,
      "V_BDM(0.5) = " << bdm.objective << ", expected 2");

  double vmax = -1.0;
  for (int k = 0; k <= 20; ++k) {
    const double rho = -s5 / 5.0 + k * (1.0 + s5 / 5.0) / 20.0;
    const MomentSpec s = from_correlation(1.0, 1.0, 2.0, 6.0, rho);
    const double v = solve_bcm(s, 0.5).objective;
    const double expect =
        0.2 * std::sqrt(5.0 - 5.0 * rho * rho) + (s5 / 10.0) * rho + 1.5;
    ACC(std::abs(v - expect) <= 1e-9,
        "V_BCM(rho=" << rho << ") = " << v << ", expected " << expect);
    vmax = std::max(vmax, v);
  }
  const double vstar =
      solve_bcm(from_correlation(1.0, 1.0, 2.0, 6.0, s5 / 5.0), 0.5)
          .objective;
  ACC(std::abs(vstar - 2.0) <= 1e-9,
      "V_BCM at the critical correlation = " << vstar << ", expected 2");
  ACC(vstar >= vmax - 1e-9, "critical correlation is not the maximum");
}

// Criterion 2: order-quantity anchors of the running example.
void criterion_2() {
  const MomentSpec s = from_correlation(1.0, 1.0, 2.0, 6.0, 0.3);
  const double q_hi = solve_bcm(s, 0.9).q_star[0];
  ACC(std::abs(q_hi - 5.61) <= 0.01,
      "q_BCM(0.9) = " << q_hi << ", expected 5.61 +- 0.01");
  const NewsvendorSolution bdm_hi = solve_bdm(s, 0.9);
  ACC(std::abs(bdm_hi.q_star[0] - 2.33) <= 0.01,
      "q1_BDM(0.9) = " << bdm_hi.q_star[0]);
  ACC(std::abs(bdm_hi.q_star[1] - 3.98) <= 0.01,
      "q2_BDM(0.9) = " << bdm_hi.q_star[1]);
  const double q_mid = solve_bcm(s, 0.7).q_star[0];
  ACC(std::abs(q_mid - 1.84) <= 0.01,
      "q_BCM(0.7) = " << q_mid << ", expected 1.84 +- 0.01");
  const NewsvendorSolution bdm_mid = solve_bdm(s, 0.7);
  ACC(std::abs(bdm_mid.q_star[0] - 1.44) <= 0.01,
      "q1_BDM(0.7) = " << bdm_mid.q_star[0]);
  ACC(bdm_mid.q_star[1] == 0.0,
      "q2_BDM(0.7) = " << bdm_mid.q_star[1] << ", expected exactly 0");
}

// Criterion 3: the six conditions partition every feasible (spec, q).
void criterion_3() {
  std::mt19937_64 rng(20240820);
  int knife_edge = 0;
  for (int i = 0; i < 10000; ++i) {
    const MomentSpec s = random_spec(rng);
    const double q = random_q(rng, s);
    const ConditionReport r = classify_condition(s, q);
    const std::array<bool, 6> direct = direct_predicates(s, q);
    int holds = 0;
    for (bool d : direct) holds += d ? 1 : 0;
    if (holds != 1) {
      // Tolerated only on a floating-point knife edge of a boundary.
      ++knife_edge;
      ACC(knife_edge <= 5, "non-unique condition (" << holds << " hold) at "
                               << describe(s, q));
      continue;
    }
    int direct_idx = 0;
    while (!direct[direct_idx]) ++direct_idx;
    if (!r.boundary_case) {
      ACC(static_cast<int>(r.condition) - 1 == direct_idx,
          "routing gave " << to_string(r.condition) << " but "
                          << "C" << direct_idx + 1 << " holds at "
                          << describe(s, q));
      int contained = 0;
      for (int k = 0; k < 6; ++k) {
        contained += r.interval_table[k].contains(q, 0.0) ? 1 : 0;
      }
      ACC(contained == 1,
          "q sits in " << contained << " intervals at " << describe(s, q));
    }
  }
}

// Criterion 4: primal attainment and dual certification close the gap.
void criterion_4() {
  std::mt19937_64 rng(20240820);
  int degenerate = 0;
  for (int i = 0; i < 10000; ++i) {
    const MomentSpec s = random_spec(rng);
    const double q = random_q(rng, s);
    const GapReport g = verify_duality(s, q);
    if (g.dual_skipped) {
      ++degenerate;
      std::cout << "    degenerate #" << degenerate << " at "
                << describe(s, q) << ": " << g.skip_reason << "\n";
      ACC(degenerate <= 10,
          "degenerate instances exceed 0.1% at " << describe(s, q));
      continue;
    }
    ACC(g.feasible_primal,
        "worst-case distribution infeasible at " << describe(s, q));
    ACC(g.feasible_dual,
        "dual certificate infeasible at " << describe(s, q));
    ACC(g.gap <= 1e-8, "duality gap " << g.gap << " at " << describe(s, q));
  }
}

// Criterion 5: the discretized oracle converges to the closed forms.
void criterion_5() {
  const auto instances = canonical_instances(10);
  ACC(instances.size() == 10, "expected 10 canonical instances");
  std::array<bool, 6> seen{};
  for (const auto& [s, q] : instances) {
    seen[static_cast<int>(classify_condition(s, q).condition) - 1] = true;
  }
  for (int k = 0; k < 6; ++k) {
    ACC(seen[k], "no canonical instance lands in C" << k + 1);
  }

  for (const auto& [s, q] : instances) {
    const double exact = worst_case_value(s, q).first;
    // The slack bands let the LP move the value by up to the slack
    // times the 1-norm of the dual multipliers, which the certificate
    // coefficients bound. Below that floor the discretization has
    // converged to the width of the slack polytope, where the
    // ordering between grids is noise; monotonicity only binds above.
    double dual_norm = 0.0;
    try {
      for (double zi : dual_certificate(s, q).z) dual_norm += std::abs(zi);
    } catch (const degenerate_error&) {
    }
    double prev_err = 1e300;
    for (int n : {100, 200, 400}) {
      GridConfig grid;
      grid.n_per_axis = n;
      const OracleResult res = lp_worst_case(s, q, grid);
      const double err = std::abs(res.value - exact) /
                         std::max(std::abs(exact), 1e-12);
      ACC(res.value <= exact + 100.0 * res.slack * (1.0 + exact),
          "oracle exceeds the closed form by " << res.value - exact
                                                << " at " << describe(s, q));
      const double floor_err = 3.0 * res.slack * (1.0 + dual_norm) /
                               std::max(std::abs(exact), 1e-12);
      ACC(err <= std::max(prev_err * 1.001 + 1e-9, floor_err),
          "error grew from " << prev_err << " to " << err << " at n=" << n
                             << ", " << describe(s, q));
      prev_err = err;
      if (n == 400) {
        ACC(err <= 0.01, "oracle error " << err << " at n=400, "
                                         << describe(s, q));
      }
    }
  }
}

// Criterion 6: deep-tail instances collapse onto the pooled bound.
void criterion_6() {
  std::mt19937_64 rng(20240821);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ratio(0.05, 0.95);
  int found = 0;
  while (found < 200) {
    const MomentSpec s = random_spec(rng);
    const ConditionReport at0 = classify_condition(s, 0.0);
    const QInterval& six = at0.interval_table[5];
    if (six.empty) continue;
    double q;
    if (std::isfinite(six.hi)) {
      q = six.lo + (0.2 + 0.6 * unit(rng)) * (six.hi - six.lo);
    } else {
      q = six.lo * (1.05 + unit(rng)) + 0.25;
    }
    const auto [v, rep] = worst_case_value(s, q);
    if (rep.condition != Condition::C6 || rep.boundary_case) continue;
    ++found;
    const double pooled = pooled_scarf(s, q);
    ACC(std::abs(v - pooled) <= 1e-10 * std::max(1.0, std::abs(v)),
        "C6 value " << v << " vs pooled " << pooled << " at "
                    << describe(s, q));

    const double eta = ratio(rng);
    const NewsvendorSolution ucm = solve_ucm(s, eta);
    const auto [mu_bar, sigma_bar] = pooled_moments(s);
    const double q_ref = scarf_order({mu_bar, sigma_bar}, eta);
    const double v_ref =
        scarf_bound({mu_bar, sigma_bar}, q_ref).value + (1.0 - eta) * q_ref;
    ACC(std::abs(ucm.q_star[0] - q_ref) <= 1e-12 * std::max(1.0, q_ref),
        "UCM order " << ucm.q_star[0] << " vs " << q_ref);
    ACC(std::abs(ucm.objective - v_ref) <= 1e-12 * std::max(1.0, v_ref),
        "UCM objective " << ucm.objective << " vs " << v_ref);
  }
}

// Criterion 7: centralization dominates, yet can order more.
void criterion_7() {
  std::mt19937_64 rng(20240822);
  std::uniform_real_distribution<double> ratio(0.05, 0.95);
  bool negative_gap = false;
  for (int i = 0; i < 500; ++i) {
    MomentSpec s{};
    double eta;
    if (i == 0) {
      s = from_correlation(1.0, 1.0, 2.0, 6.0, 0.3);
      eta = 0.7;
    } else {
      s = random_spec(rng);
      eta = ratio(rng);
    }
    const double bcm = solve_bcm(s, eta).objective;
    const NewsvendorSolution bdm = solve_bdm(s, eta);
    const NewsvendorSolution ucm = solve_ucm(s, eta);
    ACC(bcm <= bdm.objective + 1e-9,
        "V_BCM " << bcm << " > V_BDM " << bdm.objective << " at "
                 << describe(s) << ", eta=" << eta);
    ACC(bcm <= ucm.objective + 1e-9,
        "V_BCM " << bcm << " > V_UCM " << ucm.objective << " at "
                 << describe(s) << ", eta=" << eta);
    if (order_gap(s, eta) < -1e-9) negative_gap = true;
  }
  ACC(negative_gap, "no instance ordered more when centralized");
}

// Criterion 8: high positive correlation lifts the support floor.
void criterion_8() {
  GridConfig grid;
  grid.n_per_axis = 300;
  const MomentSpec tight =
      from_correlation(1.0, 1.0, 2.0, 6.0, 1.0 - 1e-6);
  const double p_tight = max_prob_below(tight, 0.5, grid);
  ACC(p_tight <= 0.02, "P(X1 <= 0.5) = " << p_tight
                                         << " under near-perfect "
                                            "correlation");
  const MomentSpec loose = from_correlation(1.0, 1.0, 2.0, 6.0, 0.0);
  const double p_loose = max_prob_below(loose, 0.5, grid);
  ACC(p_loose >= 0.1, "P(X1 <= 0.5) = " << p_loose
                                        << " without correlation");
  const double bound = shifting_bound({1.0, 1.0, 2.0, 6.0, 1.0});
  ACC(std::abs(bound - (1.0 - std::sqrt(0.2))) <= 1e-12,
      "support floor " << bound << ", expected 1 - sqrt(0.2)");
}

// Criterion 9: two-piece losses reduce to the shortfall kernel.
void criterion_9() {
  std::mt19937_64 rng(20240823);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double u1 = -2.0 + 4.0 * unit(rng);
    const double u2 = u1 + 0.05 + 3.0 * unit(rng);
    const double v1 = -3.0 + 6.0 * unit(rng);
    const double v2 = -3.0 + 6.0 * unit(rng);
    const double t = 10.0 * unit(rng);
    const double r = -(v2 - v1) / (u2 - u1);
    const double direct = std::max(u1 * t + v1, u2 * t + v2);
    const double reduced =
        (u2 - u1) * std::max(t - r, 0.0) + u1 * t + v1;
    ACC(std::abs(direct - reduced) <=
            1e-12 * std::max(1.0, std::abs(direct)),
        "pointwise identity off by " << direct - reduced << " at t=" << t);
  }

  const std::vector<std::array<double, 6>> cases = {
      // u1, u2, v1, v2, w1, w2
      {0.0, 1.0, 0.6, 0.0, 1.0, 1.0},
      {-0.3, 0.8, 1.0, -0.5, 0.7, 1.4},
      {0.2, 1.5, 0.1, -1.2, 1.2, 0.5},
  };
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  for (const auto& cs : cases) {
    const std::array<double, 2> w{cs[4], cs[5]};
    const ReducedLoss red = reduce_loss(cs[0], cs[1], cs[2], cs[3], w, s);
    const double exact = red.evaluate_worst_case();

    std::vector<std::array<double, 2>> extra = {{0.0, 0.0}};
    try {
      const DiscreteDistribution d =
          worst_case_distribution(red.reduced_spec, red.reduced_q);
      for (const auto& p : d.points) {
        extra.push_back({p[0] / w[0], p[1] / w[1]});
      }
    } catch (const degenerate_error&) {
    } catch (const infeasible_error&) {
    }
    GridConfig grid;
    grid.n_per_axis = 300;
    const auto loss = [&cs, &w](double x1, double x2) {
      const double t = w[0] * x1 + w[1] * x2;
      return std::max(cs[0] * t + cs[2], cs[1] * t + cs[3]);
    };
    const OracleResult res = lp_maximize(s, loss, grid, extra);
    const double err =
        std::abs(res.value - exact) / std::max(std::abs(exact), 1e-12);
    ACC(err <= 0.01, "reduced bound " << exact << " vs oracle "
                                      << res.value << " (err " << err
                                      << ")");
  }
}

// Criterion 10: the lifted PSD formulation certifies the closed forms.
void criterion_10() {
  const std::array<double, 6> zt{2.0, 3.0, 5.0, 7.0, 11.0, 13.0};
  const std::array<double, 3> g{17.0, 19.0, 23.0};
  const std::array<double, 3> h{29.0, 31.0, 37.0};
  const Mat6 m = sos_matrix(zt, g, h);
  const Mat6 expect{{
      {{7.0, 0.0, -17.0, 0.0, -29.0, -19.0}},
      {{0.0, 47.0, 0.0, 29.0, -31.0, -37.0}},
      {{-17.0, 0.0, 11.0, 31.0, 0.0, -23.0}},
      {{0.0, 29.0, 31.0, 41.0, 37.0, 0.0}},
      {{-29.0, -31.0, 0.0, 37.0, 51.0, 0.0}},
      {{-19.0, -37.0, -23.0, 0.0, 0.0, 2.0}},
  }};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      ACC(m[i][j] == expect[i][j],
          "pattern entry (" << i << "," << j << ") is " << m[i][j]
                            << ", expected " << expect[i][j]);
    }
  }

  const MomentSpec rt{1.0, 1.0, 2.0, 6.0, 1.3};
  const SdpProblem prt = build_sdp(rt, PiecewiseQuadratic::shortfall(1.5));
  const SdpaFile before = sdpa_data(prt);
  const std::string path = "acceptance_roundtrip.dat-s";
  export_sdpa(prt, path);
  const SdpaFile after = parse_sdpa(path);
  std::remove(path.c_str());
  ACC(before.n_vars == after.n_vars && before.objective == after.objective &&
          before.block_sizes == after.block_sizes &&
          before.entries == after.entries,
      "SDPA export does not round-trip bit-exactly");

  const auto instances = canonical_instances(20);
  int success = 0, attempted = 0;
  for (const auto& [s, q] : instances) {
    ++attempted;
    const double value = worst_case_value(s, q).first;
    const PiecewiseQuadratic pw = PiecewiseQuadratic::shortfall(q);
    bool ok = false;
    try {
      const DualCertificate cert = dual_certificate(s, q);
      const auto witness = find_sos_witness(s, pw, cert.z);
      if (witness) {
        const CertificateCheck check =
            verify_certificate(s, pw, cert.z, witness->G, witness->H);
        ok = check.psd_ok &&
             std::abs(check.upper_bound - value) <=
                 1e-7 * std::max(1.0, std::abs(value));
      }
    } catch (const degenerate_error&) {
    }
    if (ok) {
      ++success;
    } else {
      std::cout << "    no certificate at " << describe(s, q) << "\n";
    }
  }
  ACC(attempted == 20, "expected 20 certificate instances");
  ACC(success * 100 >= attempted * 95,
      "certificates found for only " << success << "/" << attempted);
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "pooling curve of the running example", 1.0, criterion_1},
      {2, "order-quantity anchors", 1.0, criterion_2},
      {3, "six-condition partition on 1e4 instances", 5.0, criterion_3},
      {4, "primal/dual zero gap on 1e4 instances", 60.0, criterion_4},
      {5, "LP oracle agreement across six conditions", 120.0, criterion_5},
      {6, "pooling collapse on 200 deep-tail instances", 60.0, criterion_6},
      {7, "dominance and the negative order gap", 60.0, criterion_7},
      {8, "support shifting under high correlation", 60.0, criterion_8},
      {9, "two-piece reduction against the oracle", 120.0, criterion_9},
      {10, "lifted PSD certificates", 60.0, criterion_10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const acceptance_failure& f) {
      error = f.message;
    } catch (const std::exception& e) {
      error = std::string("unexpected exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start)
            .count();
    if (error.empty() && elapsed > c.budget_seconds) {
      std::ostringstream os;
      os << "runtime " << elapsed << " s exceeds the " << c.budget_seconds
         << " s budget";
      error = os.str();
    }
    if (error.empty()) {
      std::printf("[PASS] %2d. %s (%.2f s)\n", c.id, c.name, elapsed);
    } else {
      std::printf("[FAIL] %2d. %s (%.2f s): %s\n", c.id, c.name, elapsed,
                  error.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures != 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
