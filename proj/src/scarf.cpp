#include "momentdro/scarf.hpp"

#include <algorithm>
#include <cmath>

namespace momentdro {

namespace {

void require_valid_univariate(const UnivariateSpec& u) {
  if (!(std::isfinite(u.mu) && std::isfinite(u.sigma2))) {
    throw infeasible_error("univariate spec must be finite");
  }
  if (!(u.mu > 0.0)) {
    throw infeasible_error("mu > 0 violated");
  }
  const double tol = 1e-12 * std::max({1.0, u.sigma2, u.mu * u.mu});
  if (u.sigma2 < u.mu * u.mu - tol) {
    throw infeasible_error("sigma2 >= mu^2 violated");
  }
}

bool is_degenerate(const UnivariateSpec& u) {
  const double tol = 1e-12 * std::max({1.0, u.sigma2, u.mu * u.mu});
  return u.sigma2 <= u.mu * u.mu + tol;
}

}  // namespace

ScarfResult scarf_bound(const UnivariateSpec& uspec, double q) {
  require_valid_univariate(uspec);
  if (q < 0.0) {
    throw infeasible_error("q >= 0 violated");
  }
  const double mu = uspec.mu;
  const double sigma2 = uspec.sigma2;

  ScarfResult r;
  if (is_degenerate(uspec)) {
    r.regime = ScarfRegime::Degenerate;
    r.value = std::max(mu - q, 0.0);
    r.distribution.points = {{mu, 0.0}};
    r.distribution.probs = {1.0};
    return r;
  }

  if (q <= sigma2 / (2.0 * mu)) {
    r.regime = ScarfRegime::SmallQ;
    r.value = mu - q * mu * mu / sigma2;
    const double p_hi = mu * mu / sigma2;
    r.distribution.points = {{0.0, 0.0}, {sigma2 / mu, 0.0}};
    r.distribution.probs = {1.0 - p_hi, p_hi};
  } else {
    r.regime = ScarfRegime::LargeQ;
    const double rad = std::max(q * q - 2.0 * mu * q + sigma2, 0.0);
    const double Q = std::sqrt(rad);
    r.value = 0.5 * (Q - q + mu);
    const double shift = (q - mu) / (2.0 * Q);
    r.distribution.points = {{q - Q, 0.0}, {q + Q, 0.0}};
    r.distribution.probs = {0.5 + shift, 0.5 - shift};
  }
  // q > sigma2/(2 mu) > mu/2 guarantees q^2 - 2 mu q + sigma2 > 0 and
  // q - Q > 0, so the LargeQ support is strictly positive.
  return r;
}

double scarf_order(const UnivariateSpec& uspec, double eta) {
  require_valid_univariate(uspec);
  if (!(eta > 0.0 && eta < 1.0)) {
    throw infeasible_error("eta in (0, 1) violated");
  }
  const double mu = uspec.mu;
  const double sigma2 = uspec.sigma2;
  if (is_degenerate(uspec)) {
    // Point mass at mu: any order in [0, mu] costs (1-eta)q + (mu-q)+;
    // ordering exactly mu is optimal for every eta.
    return mu;
  }
  const double variance = sigma2 - mu * mu;
  if (!(eta > variance / sigma2)) {
    return 0.0;
  }
  return mu + 0.5 * std::sqrt(variance) * (2.0 * eta - 1.0) /
                 std::sqrt(eta * (1.0 - eta));
}

}  // namespace momentdro
