#include "momentdro/bivariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace momentdro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double theta_tol(double x, double y) {
  return 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
}

double q_tol(const MomentSpec& s, double q) {
  return 1e-10 * std::max({1.0, q, s.mu1 + s.mu2});
}

// Everything the six branches consume, computed once.
struct Derived {
  double psd;       // (a-1)(b-1) - (c-1)^2, clamped at 0
  double ab_c2;     // a*b - c^2
  double mu_bar;    // mu1 + mu2
  double sigma_bar; // E[(X1+X2)^2]
  double var_sum;   // Var(X1+X2)
  double Qa, Qb, Qc;
  double zeta_a, zeta_b;
  double A_bar, A_under, B_bar, B_under;
  double C_bar, C_under, D_bar, D_under, E;
  double det_m;     // determinant of the covariance matrix
};

Derived derive(const MomentSpec& s, double q) {
  Derived d;
  const double a = s.a, b = s.b, c = s.c, mu1 = s.mu1, mu2 = s.mu2;
  d.psd = std::max((a - 1.0) * (b - 1.0) - (c - 1.0) * (c - 1.0), 0.0);
  d.ab_c2 = a * b - c * c;
  d.mu_bar = mu1 + mu2;
  d.sigma_bar = a * mu1 * mu1 + b * mu2 * mu2 + 2.0 * c * mu1 * mu2;
  const double m11 = (a - 1.0) * mu1 * mu1;
  const double m22 = (b - 1.0) * mu2 * mu2;
  const double m12 = (c - 1.0) * mu1 * mu2;
  d.var_sum = m11 + 2.0 * m12 + m22;
  d.det_m = m11 * m22 - m12 * m12;

  // Q^2 radicands are (q - vertex)^2 + residual with residual >= 0 for
  // feasible specs, so the hypot form never sees a negative radicand.
  const double vert_a = (a - c) / (a - 1.0) * mu2;
  const double res_a = mu2 * std::sqrt(a * d.psd) / (a - 1.0);
  d.Qa = std::hypot(q - vert_a, res_a);
  const double vert_b = (b - c) / (b - 1.0) * mu1;
  const double res_b = mu1 * std::sqrt(b * d.psd) / (b - 1.0);
  d.Qb = std::hypot(q - vert_b, res_b);
  d.Qc = std::hypot(q - d.mu_bar, std::sqrt(std::max(d.var_sum, 0.0)));

  d.zeta_a = a * mu1 + c * mu2 - q;
  d.zeta_b = c * mu1 + b * mu2 - q;

  d.C_bar = (a - 1.0) * mu1 + (c - 1.0) * mu2;
  d.C_under = (c - 1.0) * mu1 + (b - 1.0) * mu2;
  d.D_bar = (a - 1.0) * (a * mu1 + c * mu2);
  d.D_under = (b - 1.0) * (c * mu1 + b * mu2);
  d.E = (a - 1.0) * c * mu1 * mu1 + (a * b - a - b + c * c) * mu1 * mu2 +
        (b - 1.0) * c * mu2 * mu2;

  d.A_bar = (a == c) ? kInf : d.ab_c2 / (2.0 * (a - c)) * mu2;
  d.A_under = (b == c) ? kInf : d.ab_c2 / (2.0 * (b - c)) * mu1;
  d.B_bar = (a == c || d.C_bar == 0.0)
                ? kInf
                : d.A_bar + d.D_bar * (d.C_bar - d.C_under) /
                                (2.0 * (a - c) * d.C_bar);
  d.B_under = (b == c || d.C_under == 0.0)
                  ? kInf
                  : d.A_under + d.D_under * (d.C_under - d.C_bar) /
                                    (2.0 * (b - c) * d.C_under);
  return d;
}

bool all_moments_equal(const MomentSpec& s) {
  const double t = 1e-12 * std::max({1.0, s.a, s.b, s.c});
  return std::abs(s.a - s.b) <= t && std::abs(s.a - s.c) <= t &&
         std::abs(s.b - s.c) <= t;
}

QInterval closed(double lo, double hi) { return {lo, hi, true, true, false}; }
QInterval half_open(double lo, double hi) { return {lo, hi, false, true, false}; }
QInterval open_tail(double lo) { return {lo, kInf, false, false, false}; }
QInterval closed_tail(double lo) { return {lo, kInf, true, false, false}; }
QInterval open_both(double lo, double hi) { return {lo, hi, false, false, false}; }

// Fills the interval table for the columns routed through the a-side
// breakpoints (conditions 1, 3, 6) or their b-side mirrors.
void fill_a_side(std::array<QInterval, 6>& t, double A, double B) {
  t[0] = closed(0.0, A);
  t[2] = half_open(A, B);
  t[5] = open_tail(B);
}

void fill_b_side(std::array<QInterval, 6>& t, double A, double B) {
  t[0] = closed(0.0, A);
  t[1] = half_open(A, B);
  t[5] = open_tail(B);
}

Condition route_three(double q, double A, double B, Condition mid,
                      double tol) {
  if (q <= A + tol) return Condition::C1;
  if (q <= B + tol) return mid;
  return Condition::C6;
}

struct DirectConditions {
  // Relaxed truth values of the six condition predicates: true when
  // the predicate holds within tolerance.
  std::array<bool, 6> relaxed;
};

DirectConditions direct_conditions(const MomentSpec& s, const Derived& d,
                                   double q) {
  const double tol = q_tol(s, q);
  // Q_a >= q rewritten as 2q(a-c) <= (ab-c^2) mu2 (and b-side mirror).
  const double la = 2.0 * q * (s.a - s.c), ra = d.ab_c2 * s.mu2;
  const double lb = 2.0 * q * (s.b - s.c), rb = d.ab_c2 * s.mu1;
  const double ta = 1e-10 * std::max({1.0, std::abs(la), std::abs(ra)});
  const double tb = 1e-10 * std::max({1.0, std::abs(lb), std::abs(rb)});
  const bool pa_hi = la <= ra + ta;   // Q_a >= q possibly holds
  const bool pa_lo = la < ra - ta;    // Q_a >= q holds strictly
  const bool pb_hi = lb <= rb + tb;
  const bool pb_lo = lb < rb - tb;
  const bool Ta_hi = d.Qa <= std::abs(d.zeta_a) + tol;
  const bool Ta_lo = d.Qa < std::abs(d.zeta_a) - tol;
  const bool Tb_hi = d.Qb <= std::abs(d.zeta_b) + tol;
  const bool Tb_lo = d.Qb < std::abs(d.zeta_b) - tol;

  DirectConditions out;
  out.relaxed[0] = pa_hi && pb_hi;
  out.relaxed[1] = !pb_lo && Tb_hi && d.zeta_b >= -tol;
  out.relaxed[2] = !pa_lo && Ta_hi && d.zeta_a >= -tol;
  out.relaxed[3] = !pb_lo && Tb_hi && d.zeta_b <= tol;
  out.relaxed[4] = !pa_lo && Ta_hi && d.zeta_a <= tol;
  out.relaxed[5] = !Ta_lo && !Tb_lo;
  return out;
}

ScarfResult pooled_scarf(const MomentSpec& s, double q) {
  const auto [mu_bar, sigma_bar] = pooled_moments(s);
  return scarf_bound(UnivariateSpec{mu_bar, sigma_bar}, q);
}

}  // namespace

const char* to_string(Condition c) {
  switch (c) {
    case Condition::C1: return "C1";
    case Condition::C2: return "C2";
    case Condition::C3: return "C3";
    case Condition::C4: return "C4";
    case Condition::C5: return "C5";
    case Condition::C6: return "C6";
  }
  return "?";
}

const char* to_string(CaseLabel l) {
  switch (l) {
    case CaseLabel::AGtCGtB: return "a>c>b";
    case CaseLabel::BGtCGtA: return "b>c>a";
    case CaseLabel::InteriorUnderPos: return "a>c,b>c,Cbar>=Cunder,Cunder>0";
    case CaseLabel::InteriorUnderNeg: return "a>c,b>c,Cbar>=Cunder,Cunder<0";
    case CaseLabel::InteriorBarPos: return "a>c,b>c,Cbar<Cunder,Cbar>0";
    case CaseLabel::InteriorBarNeg: return "a>c,b>c,Cbar<Cunder,Cbar<0";
    case CaseLabel::Pooled: return "a=b=c";
  }
  return "?";
}

bool QInterval::contains(double q, double tol) const {
  if (empty) return false;
  const bool above = lo_closed ? q >= lo - tol : q > lo + tol;
  const bool below = hi_closed ? q <= hi + tol : q < hi - tol;
  return above && below;
}

double DualCertificate::h1(double x1, double x2) const {
  return z[0] + z[1] * x1 + z[2] * x2 + z[3] * x1 * x1 + z[4] * x2 * x2 +
         z[5] * x1 * x2;
}

double DualCertificate::h2(double x1, double x2) const {
  return h1(x1, x2) + q - x1 - x2;
}

double DualCertificate::objective(const MomentSpec& s) const {
  return z[0] + z[1] * s.mu1 + z[2] * s.mu2 + z[3] * s.a * s.mu1 * s.mu1 +
         z[4] * s.b * s.mu2 * s.mu2 + z[5] * s.c * s.mu1 * s.mu2;
}

ConditionReport classify_condition(const MomentSpec& spec, double q) {
  require_valid(spec);
  if (!(q >= 0.0)) throw infeasible_error("q >= 0 violated");

  const Derived d = derive(spec, q);
  ConditionReport r;
  r.q_a = d.Qa;
  r.q_b = d.Qb;
  r.q_c = d.Qc;
  r.zeta_a = d.zeta_a;
  r.zeta_b = d.zeta_b;
  r.aux = {d.A_bar, d.A_under, d.B_bar, d.B_under,
           d.C_bar, d.C_under, d.D_bar, d.D_under, d.E};
  for (auto& iv : r.interval_table) iv = QInterval{};

  if (all_moments_equal(spec)) {
    r.pooled = true;
    r.case_label = CaseLabel::Pooled;
    const auto [mu_bar, sigma_bar] = pooled_moments(spec);
    const double split = sigma_bar / (2.0 * mu_bar);
    r.interval_table[0] = closed(0.0, split);
    r.interval_table[5] = open_tail(split);
    r.condition = (q <= split) ? Condition::C1 : Condition::C6;
    return r;
  }

  const double a = spec.a, b = spec.b, c = spec.c;
  const double tol = q_tol(spec, q);
  const double tq0 = theta_tol(0.0, std::max(std::abs(d.C_bar),
                                             std::abs(d.C_under)));

  if (c >= b - theta_tol(c, b)) {
    // Feasibility forces a > c here (c < max(a,b) unless all equal).
    r.case_label = CaseLabel::AGtCGtB;
    r.boundary_case = c <= b + theta_tol(c, b);
    fill_a_side(r.interval_table, d.A_bar, d.B_bar);
    r.condition = route_three(q, d.A_bar, d.B_bar, Condition::C3, tol);
  } else if (c >= a - theta_tol(c, a)) {
    r.case_label = CaseLabel::BGtCGtA;
    r.boundary_case = c <= a + theta_tol(c, a);
    fill_b_side(r.interval_table, d.A_under, d.B_under);
    r.condition = route_three(q, d.A_under, d.B_under, Condition::C2, tol);
  } else if (std::abs(d.C_bar) <= tq0 && std::abs(d.C_under) <= tq0) {
    // Fully degenerate corner (rho = -1 with matched variances): the
    // breakpoint formulas are 0/0, so the direct predicates decide.
    r.boundary_case = true;
    r.case_label = d.C_bar >= d.C_under ? CaseLabel::InteriorUnderPos
                                        : CaseLabel::InteriorBarPos;
    const DirectConditions dc = direct_conditions(spec, d, q);
    r.condition = Condition::C1;
    for (int i = 0; i < 6; ++i) {
      if (dc.relaxed[i]) {
        r.condition = static_cast<Condition>(i + 1);
        break;
      }
    }
    return r;
  } else if (d.C_bar >= d.C_under) {
    if (d.C_under > tq0) {
      r.case_label = CaseLabel::InteriorUnderPos;
      fill_a_side(r.interval_table, d.A_bar, d.B_bar);
      r.condition = route_three(q, d.A_bar, d.B_bar, Condition::C3, tol);
    } else if (d.C_under >= -tq0) {
      // C_under = 0: condition 4 recedes to infinity, column 3 routing.
      r.boundary_case = true;
      r.case_label = CaseLabel::InteriorUnderPos;
      fill_a_side(r.interval_table, d.A_bar, d.B_bar);
      r.condition = route_three(q, d.A_bar, d.B_bar, Condition::C3, tol);
    } else {
      r.case_label = CaseLabel::InteriorUnderNeg;
      r.interval_table[0] = closed(0.0, d.A_bar);
      r.interval_table[2] = half_open(d.A_bar, d.B_bar);
      r.interval_table[5] = open_both(d.B_bar, d.B_under);
      r.interval_table[3] = closed_tail(d.B_under);
      if (q <= d.A_bar + tol) {
        r.condition = Condition::C1;
      } else if (q <= d.B_bar + tol) {
        r.condition = Condition::C3;
      } else if (q < d.B_under - tol) {
        r.condition = Condition::C6;
      } else {
        r.condition = Condition::C4;
      }
    }
  } else {
    if (d.C_bar > tq0 || (d.C_bar >= -tq0)) {
      r.boundary_case = d.C_bar <= tq0;
      r.case_label = CaseLabel::InteriorBarPos;
      fill_b_side(r.interval_table, d.A_under, d.B_under);
      r.condition = route_three(q, d.A_under, d.B_under, Condition::C2, tol);
    } else {
      r.case_label = CaseLabel::InteriorBarNeg;
      r.interval_table[0] = closed(0.0, d.A_under);
      r.interval_table[1] = half_open(d.A_under, d.B_under);
      r.interval_table[5] = open_both(d.B_under, d.B_bar);
      r.interval_table[4] = closed_tail(d.B_bar);
      if (q <= d.A_under + tol) {
        r.condition = Condition::C1;
      } else if (q <= d.B_under + tol) {
        r.condition = Condition::C2;
      } else if (q < d.B_bar - tol) {
        r.condition = Condition::C6;
      } else {
        r.condition = Condition::C5;
      }
    }
  }

  if (!r.boundary_case) {
    const DirectConditions dc = direct_conditions(spec, d, q);
    const int idx = static_cast<int>(r.condition) - 1;
    if (!dc.relaxed[idx]) {
      std::ostringstream msg;
      msg << "interval routing selected " << to_string(r.condition)
          << " but the direct inequalities exclude it (case "
          << to_string(r.case_label) << ", q=" << q << ")";
      throw consistency_error(msg.str());
    }
  }
  return r;
}

std::pair<double, ConditionReport> worst_case_value(const MomentSpec& spec,
                                                    double q) {
  ConditionReport rep = classify_condition(spec, q);
  const Derived d = derive(spec, q);
  const double a = spec.a, b = spec.b, c = spec.c;
  const double mu1 = spec.mu1, mu2 = spec.mu2;

  if (rep.pooled) {
    return {pooled_scarf(spec, q).value, rep};
  }

  double v = 0.0;
  switch (rep.condition) {
    case Condition::C1:
      v = d.mu_bar - q * (a + b - 2.0 * c) / d.ab_c2;
      break;
    case Condition::C2:
      v = (b - 1.0) / (2.0 * b) * (q + d.Qb - (b - c) / (b - 1.0) * mu1) +
          d.mu_bar - q;
      break;
    case Condition::C3:
      v = (a - 1.0) / (2.0 * a) * (q + d.Qa - (a - c) / (a - 1.0) * mu2) +
          d.mu_bar - q;
      break;
    case Condition::C4:
      v = (b - 1.0) / (2.0 * b) * ((b - c) / (b - 1.0) * mu1 - (q - d.Qb));
      break;
    case Condition::C5:
      v = (a - 1.0) / (2.0 * a) * ((a - c) / (a - 1.0) * mu2 - (q - d.Qa));
      break;
    case Condition::C6:
      // Stable evaluation of (Q_c - q + mu_bar)/2 when q is large.
      if (q > d.mu_bar) {
        v = 0.5 * d.var_sum / (d.Qc + q - d.mu_bar);
      } else {
        v = 0.5 * (d.Qc - q + d.mu_bar);
      }
      break;
  }
  return {v, rep};
}

DiscreteDistribution worst_case_distribution(const MomentSpec& spec,
                                             double q) {
  const ConditionReport rep = classify_condition(spec, q);
  const Derived d = derive(spec, q);
  const double a = spec.a, b = spec.b, c = spec.c;
  const double mu1 = spec.mu1, mu2 = spec.mu2;
  const double dtol = 1e-12 * std::max({1.0, q, d.mu_bar});

  DiscreteDistribution out;

  if (rep.pooled) {
    // Perfectly correlated marginals: lift the pooled support onto the
    // ray through (mu1, mu2).
    const ScarfResult sr = pooled_scarf(spec, q);
    for (std::size_t i = 0; i < sr.distribution.points.size(); ++i) {
      const double s = sr.distribution.points[i][0];
      out.points.push_back({s * mu1 / d.mu_bar, s * mu2 / d.mu_bar});
      out.probs.push_back(sr.distribution.probs[i]);
    }
    return out;
  }

  switch (rep.condition) {
    case Condition::C1: {
      const double p1 = d.psd / d.ab_c2;
      if (b - c >= a - c) {
        out.points = {{0.0, 0.0}, {d.ab_c2 / (b - c) * mu1, 0.0},
                      {c * mu1, b * mu2}};
        out.probs = {p1, (b - c) * (b - c) / (d.ab_c2 * b), 1.0 / b};
      } else {
        out.points = {{0.0, 0.0}, {0.0, d.ab_c2 / (a - c) * mu2},
                      {a * mu1, c * mu2}};
        out.probs = {p1, (a - c) * (a - c) / (d.ab_c2 * a), 1.0 / a};
      }
      break;
    }
    case Condition::C2:
    case Condition::C4: {
      if (d.Qb <= dtol) {
        // Merged line support: limit of the three-point form.
        out.points = {{q, 0.0}, {c * mu1, b * mu2}};
        out.probs = {(b - 1.0) / b, 1.0 / b};
        break;
      }
      const double shift = (q * (b - 1.0) + mu1 * (c - b)) / (2.0 * b * d.Qb);
      out.points = {{q - d.Qb, 0.0}, {q + d.Qb, 0.0}, {c * mu1, b * mu2}};
      out.probs = {(b - 1.0) / (2.0 * b) + shift,
                   (b - 1.0) / (2.0 * b) - shift, 1.0 / b};
      break;
    }
    case Condition::C3:
    case Condition::C5: {
      if (d.Qa <= dtol) {
        out.points = {{0.0, q}, {a * mu1, c * mu2}};
        out.probs = {(a - 1.0) / a, 1.0 / a};
        break;
      }
      const double shift = (q * (a - 1.0) + mu2 * (c - a)) / (2.0 * a * d.Qa);
      out.points = {{0.0, q - d.Qa}, {0.0, q + d.Qa}, {a * mu1, c * mu2}};
      out.probs = {(a - 1.0) / (2.0 * a) + shift,
                   (a - 1.0) / (2.0 * a) - shift, 1.0 / a};
      break;
    }
    case Condition::C6: {
      if (d.Qc <= dtol) {
        throw degenerate_error("condition 6 with Q_c ~ 0");
      }
      const double Ua = (q + d.Qc) - (a * mu1 + c * mu2);
      const double Va = (a * mu1 + c * mu2) - (q - d.Qc);
      const double Ub = (q + d.Qc) - (c * mu1 + b * mu2);
      const double Vb = (c * mu1 + b * mu2) - (q - d.Qc);
      const double Uc = (q + d.Qc) - d.mu_bar;
      const double Vc = d.mu_bar - (q - d.Qc);
      if (Uc <= dtol || Vc <= dtol) {
        throw degenerate_error("condition 6 with U_c or V_c ~ 0");
      }
      const double sigma12 = c * mu1 * mu2;
      const double t0 = d.det_m / (d.det_m + sigma12 * Uc * Vc);
      const double t1 = Ub / Uc * mu2 + t0 * Ua / Uc * mu1;
      const double t2 = Va / Vc * mu1 + t0 * Vb / Vc * mu2;
      if (t1 <= dtol || t2 <= dtol) {
        throw degenerate_error("condition 6 with t1 or t2 ~ 0");
      }
      out.points = {{(1.0 - t0) * Ua / Uc * mu1, t1},
                    {q - d.Qc, 0.0},
                    {0.0, q + d.Qc},
                    {t2, (1.0 - t0) * Vb / Vc * mu2}};
      out.probs = {Ub * mu2 / (2.0 * d.Qc * t1),
                   t0 * Ua * mu1 / (2.0 * d.Qc * t1),
                   t0 * Vb * mu2 / (2.0 * d.Qc * t2),
                   Va * mu1 / (2.0 * d.Qc * t2)};
      break;
    }
  }

  // Interval-boundary routing can leave coordinates or masses a hair
  // negative; clamp rounding noise, reject anything larger.
  for (auto& pt : out.points) {
    for (double& x : pt) {
      if (x < 0.0) {
        if (x < -1e-9 * std::max(1.0, q + d.mu_bar)) {
          throw degenerate_error("negative support coordinate");
        }
        x = 0.0;
      }
    }
  }
  double mass = 0.0;
  for (double& p : out.probs) {
    if (p < 0.0) {
      if (p < -1e-9) throw degenerate_error("negative probability");
      p = 0.0;
    }
    mass += p;
  }
  for (double& p : out.probs) p /= mass;
  return out;
}

DualCertificate dual_certificate(const MomentSpec& spec, double q) {
  const ConditionReport rep = classify_condition(spec, q);
  const Derived d = derive(spec, q);
  const double a = spec.a, b = spec.b, c = spec.c;
  const double mu1 = spec.mu1, mu2 = spec.mu2;
  const double dtol = 1e-12 * std::max({1.0, q, d.mu_bar});

  DualCertificate cert;
  cert.q = q;

  if (rep.pooled) {
    const auto [mu_bar, sigma_bar] = pooled_moments(spec);
    if (q <= sigma_bar / (2.0 * mu_bar)) {
      const double alpha = q * mu_bar * mu_bar / (sigma_bar * sigma_bar);
      const double beta = 1.0 - 2.0 * q * mu_bar / sigma_bar;
      cert.z = {0.0, beta, beta, alpha, alpha, 2.0 * alpha};
    } else {
      if (d.Qc <= dtol) throw degenerate_error("pooled with Q_c ~ 0");
      const double Qc = d.Qc;
      cert.z = {(Qc - q) * (Qc - q) / (4.0 * Qc), (Qc - q) / (2.0 * Qc),
                (Qc - q) / (2.0 * Qc), 1.0 / (4.0 * Qc), 1.0 / (4.0 * Qc),
                1.0 / (2.0 * Qc)};
    }
    return cert;
  }

  switch (rep.condition) {
    case Condition::C1: {
      cert.z = {0.0,
                1.0 - 2.0 * q * (b - c) / (mu1 * d.ab_c2),
                1.0 - 2.0 * q * (a - c) / (mu2 * d.ab_c2),
                q * (b - c) * (b - c) / (d.ab_c2 * d.ab_c2 * mu1 * mu1),
                q * (a - c) * (a - c) / (d.ab_c2 * d.ab_c2 * mu2 * mu2),
                2.0 * q * (a - c) * (b - c) / (d.ab_c2 * d.ab_c2 * mu1 * mu2)};
      break;
    }
    case Condition::C2: {
      if (d.Qb <= dtol) throw degenerate_error("condition 2 with Q_b ~ 0");
      const double Qb = d.Qb;
      const double w = Qb + q - c * mu1;
      cert.z = {(Qb - q) * (Qb - q) / (4.0 * Qb),
                (Qb - q) / (2.0 * Qb),
                1.0 - (Qb + q) * w / (2.0 * Qb * b * mu2),
                1.0 / (4.0 * Qb),
                w * w / (4.0 * b * b * mu2 * mu2 * Qb),
                w / (2.0 * b * mu2 * Qb)};
      break;
    }
    case Condition::C3: {
      if (d.Qa <= dtol) throw degenerate_error("condition 3 with Q_a ~ 0");
      const double Qa = d.Qa;
      const double w = Qa + q - c * mu2;
      cert.z = {(Qa - q) * (Qa - q) / (4.0 * Qa),
                1.0 - (Qa + q) * w / (2.0 * Qa * a * mu1),
                (Qa - q) / (2.0 * Qa),
                w * w / (4.0 * a * a * mu1 * mu1 * Qa),
                1.0 / (4.0 * Qa),
                w / (2.0 * a * mu1 * Qa)};
      break;
    }
    case Condition::C4: {
      if (d.Qb <= dtol) throw degenerate_error("condition 4 with Q_b ~ 0");
      const double Qb = d.Qb;
      const double w = q - Qb - c * mu1;
      cert.z = {(Qb - q) * (Qb - q) / (4.0 * Qb),
                (Qb - q) / (2.0 * Qb),
                (Qb - q) * w / (2.0 * b * Qb * mu2),
                1.0 / (4.0 * Qb),
                w * w / (4.0 * b * b * mu2 * mu2 * Qb),
                w / (2.0 * b * Qb * mu2)};
      break;
    }
    case Condition::C5: {
      if (d.Qa <= dtol) throw degenerate_error("condition 5 with Q_a ~ 0");
      const double Qa = d.Qa;
      const double w = q - Qa - c * mu2;
      cert.z = {(Qa - q) * (Qa - q) / (4.0 * Qa),
                (Qa - q) * w / (2.0 * a * Qa * mu1),
                (Qa - q) / (2.0 * Qa),
                w * w / (4.0 * a * a * mu1 * mu1 * Qa),
                1.0 / (4.0 * Qa),
                w / (2.0 * a * Qa * mu1)};
      break;
    }
    case Condition::C6: {
      if (d.Qc <= dtol) throw degenerate_error("condition 6 with Q_c ~ 0");
      const double Qc = d.Qc;
      cert.z = {(Qc - q) * (Qc - q) / (4.0 * Qc), (Qc - q) / (2.0 * Qc),
                (Qc - q) / (2.0 * Qc), 1.0 / (4.0 * Qc), 1.0 / (4.0 * Qc),
                1.0 / (2.0 * Qc)};
      break;
    }
  }
  return cert;
}

namespace {

// Exact minimum of the quadratic x -> z1 + z2 x1 + z3 x2 + z4 x1^2 +
// z5 x2^2 + z6 x1 x2 over the nonnegative quadrant. Requires a PSD
// Hessian; with z6 >= 0 the minimum sits at a corner, on an edge, or
// at the interior stationary point, all enumerated here. Returns
// -infinity when an edge escapes linearly.
double quadrant_min(const std::array<double, 6>& z) {
  const double z1 = z[0], z2 = z[1], z3 = z[2];
  const double z4 = z[3], z5 = z[4], z6 = z[5];

  double best = z1;  // corner (0,0)

  auto edge_min = [](double c0, double c1, double c2) {
    if (c2 > 0.0) {
      const double t = -c1 / (2.0 * c2);
      return t > 0.0 ? c0 - c1 * c1 / (4.0 * c2) : c0;
    }
    if (c1 < 0.0) return -kInf;
    return c0;
  };
  best = std::min(best, edge_min(z1, z2, z4));  // x2 = 0
  best = std::min(best, edge_min(z1, z3, z5));  // x1 = 0

  // Rank-one certificates leave det at rounding level, where the
  // solved candidate is meaningless; evaluating the quadratic at the
  // candidate (instead of the stationary-value shortcut) keeps any
  // such point from reporting less than the function attains.
  const double det = 4.0 * z4 * z5 - z6 * z6;
  if (det > 0.0) {
    const double x1 = (-2.0 * z5 * z2 + z6 * z3) / det;
    const double x2 = (-2.0 * z4 * z3 + z6 * z2) / det;
    if (std::isfinite(x1) && std::isfinite(x2) && x1 > 0.0 && x2 > 0.0) {
      best = std::min(best, z1 + z2 * x1 + z3 * x2 + z4 * x1 * x1 +
                                z5 * x2 * x2 + z6 * x1 * x2);
    }
  }
  return best;
}

bool hessian_psd(const std::array<double, 6>& z, double tol) {
  return z[3] >= -tol && z[4] >= -tol &&
         4.0 * z[3] * z[4] - z[5] * z[5] >= -tol;
}

}  // namespace

GapReport verify_duality(const MomentSpec& spec, double q) {
  GapReport rep;
  const double value = worst_case_value(spec, q).first;
  rep.primal = value;

  const double vtol = 1e-9 * std::max(1.0, std::abs(value));
  try {
    const DiscreteDistribution dist = worst_case_distribution(spec, q);
    const auto m = dist.moments();
    const std::array<double, 5> want = {
        spec.mu1, spec.mu2, spec.a * spec.mu1 * spec.mu1,
        spec.b * spec.mu2 * spec.mu2, spec.c * spec.mu1 * spec.mu2};
    bool ok = std::abs(dist.total_mass() - 1.0) <= 1e-12;
    for (int i = 0; i < 5; ++i) {
      ok = ok && std::abs(m[i] - want[i]) <=
                     1e-9 * std::max(1.0, std::abs(want[i]));
    }
    ok = ok && std::abs(dist.expected_shortfall(q) - value) <= vtol;
    rep.feasible_primal = ok;
  } catch (const degenerate_error& e) {
    rep.feasible_primal = false;
    rep.skip_reason = std::string("primal: ") + e.what();
  }

  try {
    const DualCertificate cert = dual_certificate(spec, q);
    rep.dual = cert.objective(spec);
    rep.gap = std::abs(rep.primal - rep.dual) / (1.0 + std::abs(rep.primal));

    bool ok = hessian_psd(cert.z, 1e-12);
    // h2 coefficients differ from h1 only in the affine part.
    std::array<double, 6> z2 = cert.z;
    z2[0] += q;
    z2[1] -= 1.0;
    z2[2] -= 1.0;
    ok = ok && quadrant_min(cert.z) >= -1e-9;
    ok = ok && quadrant_min(z2) >= -1e-9;

    const double box = std::max(10.0 * (spec.mu1 + spec.mu2),
                                2.0 * q + 2.0 * derive(spec, q).Qc);
    const int n = 200;
    for (int i = 0; i <= n && ok; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double x1 = box * i / n;
        const double x2 = box * j / n;
        if (cert.h1(x1, x2) < -1e-9 || cert.h2(x1, x2) < -1e-9) {
          ok = false;
          break;
        }
      }
    }
    rep.feasible_dual = ok;
  } catch (const degenerate_error& e) {
    rep.dual_skipped = true;
    if (!rep.skip_reason.empty()) rep.skip_reason += "; ";
    rep.skip_reason += e.what();
    rep.dual = std::numeric_limits<double>::quiet_NaN();
    rep.gap = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

ReducedLoss reduce_loss(double u1, double u2, double v1, double v2,
                        const std::array<double, 2>& w,
                        const MomentSpec& spec) {
  if (!(u1 < u2)) {
    throw infeasible_error("u1 < u2 violated (linear losses are trivial)");
  }
  if (w[0] < 0.0 || w[1] < 0.0) {
    throw infeasible_error("w >= 0 violated");
  }
  ReducedLoss r;
  r.scale = u2 - u1;
  r.offset = u1 * (w[0] * spec.mu1 + w[1] * spec.mu2) + v1;
  r.reduced_q = -(v2 - v1) / (u2 - u1);
  r.reduced_spec = MomentSpec{w[0] * spec.mu1, w[1] * spec.mu2, spec.a,
                              spec.b, spec.c};
  r.w = w;
  return r;
}

double ReducedLoss::evaluate_worst_case() const {
  const MomentSpec& s = reduced_spec;
  const double mu_r = s.mu1 + s.mu2;
  double inner;
  if (w[0] > 0.0 && w[1] > 0.0) {
    if (reduced_q >= 0.0) {
      inner = worst_case_value(s, reduced_q).first;
    } else {
      // (S - q)+ = S - q surely for q < 0 and S >= 0.
      inner = mu_r - reduced_q;
    }
  } else if (w[0] > 0.0 || w[1] > 0.0) {
    const bool first = w[0] > 0.0;
    const double mu = first ? s.mu1 : s.mu2;
    const double scale2 = first ? s.a : s.b;
    const UnivariateSpec u{mu, scale2 * mu * mu};
    inner = (reduced_q >= 0.0) ? scarf_bound(u, reduced_q).value
                               : mu - reduced_q;
  } else {
    inner = std::max(-reduced_q, 0.0);
  }
  return scale * inner + offset;
}

}  // namespace momentdro
