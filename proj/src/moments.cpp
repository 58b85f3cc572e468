#include "momentdro/moments.hpp"

#include <algorithm>
#include <cmath>

namespace momentdro {

double DiscreteDistribution::expected_shortfall(double q) const {
  double v = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    v += probs[i] * std::max(points[i][0] + points[i][1] - q, 0.0);
  }
  return v;
}

std::array<double, 5> DiscreteDistribution::moments() const {
  std::array<double, 5> m{0.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x1 = points[i][0];
    const double x2 = points[i][1];
    const double p = probs[i];
    m[0] += p * x1;
    m[1] += p * x2;
    m[2] += p * x1 * x1;
    m[3] += p * x2 * x2;
    m[4] += p * x1 * x2;
  }
  return m;
}

double DiscreteDistribution::total_mass() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

namespace {

double feas_tol(double lhs, double rhs) {
  return 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// Soft inequality lhs >= rhs: the boundary itself is a meaningful
// input (e.g. rho = +-1), so within-tolerance values pass with the
// boundary flag set.
void check_ge(double lhs, double rhs, const std::string& name,
              ValidationResult& out) {
  const double tol = feas_tol(lhs, rhs);
  if (lhs < rhs - tol) {
    out.violations.push_back({name, rhs - lhs});
  } else if (lhs < rhs + tol) {
    out.boundary = true;
  }
}

// Strict inequality lhs > rhs: the boundary is rejected because
// downstream formulas divide by lhs - rhs.
void check_gt(double lhs, double rhs, const std::string& name,
              ValidationResult& out) {
  const double tol = feas_tol(lhs, rhs);
  if (lhs <= rhs + tol) {
    out.violations.push_back({name, rhs - lhs});
  }
}

}  // namespace

ValidationResult validate(const MomentSpec& spec) {
  ValidationResult r;
  if (!(std::isfinite(spec.mu1) && std::isfinite(spec.mu2) &&
        std::isfinite(spec.a) && std::isfinite(spec.b) &&
        std::isfinite(spec.c))) {
    r.violations.push_back({"finite inputs", std::nan("")});
    r.ok = false;
    return r;
  }
  check_gt(spec.mu1, 0.0, "mu1 > 0", r);
  check_gt(spec.mu2, 0.0, "mu2 > 0", r);
  check_gt(spec.a, 1.0, "a > 1", r);
  check_gt(spec.b, 1.0, "b > 1", r);
  check_ge(spec.c, 0.0, "c >= 0", r);
  const double psd_lhs = (spec.a - 1.0) * (spec.b - 1.0);
  const double psd_rhs = (spec.c - 1.0) * (spec.c - 1.0);
  check_ge(psd_lhs, psd_rhs, "(a-1)(b-1) >= (c-1)^2", r);
  check_ge(spec.a * spec.b, spec.c * spec.c, "c^2 <= a*b", r);
  r.ok = r.violations.empty();
  return r;
}

void require_valid(const MomentSpec& spec) {
  const ValidationResult r = validate(spec);
  if (!r.ok) {
    std::string msg = "infeasible moment spec: ";
    msg += r.violations.front().inequality;
    msg += " violated";
    throw infeasible_error(msg);
  }
}

CovarianceView covariance_view(const MomentSpec& spec) {
  CovarianceView v;
  v.m11 = (spec.a - 1.0) * spec.mu1 * spec.mu1;
  v.m22 = (spec.b - 1.0) * spec.mu2 * spec.mu2;
  v.m12 = (spec.c - 1.0) * spec.mu1 * spec.mu2;
  v.rho = (spec.c - 1.0) / std::sqrt((spec.a - 1.0) * (spec.b - 1.0));
  return v;
}

MomentSpec from_correlation(double mu1, double mu2, double a, double b,
                            double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw infeasible_error("rho must lie in [-1, 1]");
  }
  if (!(a > 1.0) || !(b > 1.0)) {
    throw infeasible_error(!(a > 1.0) ? "a > 1 violated" : "b > 1 violated");
  }
  double c = 1.0 + rho * std::sqrt((a - 1.0) * (b - 1.0));
  // A rho sitting exactly on the c = 0 boundary can round to a tiny
  // negative c; snap that to zero instead of rejecting it.
  if (c < 0.0 && c >= -1e-12 * std::max({1.0, a, b})) c = 0.0;
  if (c < 0.0) {
    throw infeasible_error(
        "requested rho breaks c >= 0 (c = " + std::to_string(c) + ")");
  }
  return MomentSpec{mu1, mu2, a, b, c};
}

std::pair<double, double> pooled_moments(const MomentSpec& spec) {
  const double mu_bar = spec.mu1 + spec.mu2;
  const double sigma_bar = spec.a * spec.mu1 * spec.mu1 +
                           spec.b * spec.mu2 * spec.mu2 +
                           2.0 * spec.c * spec.mu1 * spec.mu2;
  return {mu_bar, sigma_bar};
}

}  // namespace momentdro
