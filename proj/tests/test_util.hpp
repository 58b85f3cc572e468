#pragma once

#include <cmath>
#include <random>

#include "momentdro/moments.hpp"

namespace testutil {

/// Draws a feasible spec with shapes in (1.05, 8) and correlation in
/// (-0.95, 0.95), rejecting the rare draws where c turns negative.
inline momentdro::MomentSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(0.2, 5.0);
  std::uniform_real_distribution<double> shape(1.05, 8.0);
  std::uniform_real_distribution<double> corr(-0.95, 0.95);
  for (;;) {
    momentdro::MomentSpec s{mean(rng), mean(rng), shape(rng), shape(rng),
                            0.0};
    s.c = 1.0 + corr(rng) * std::sqrt((s.a - 1.0) * (s.b - 1.0));
    if (s.c < 0.0) continue;
    if (momentdro::validate(s).ok) return s;
  }
}

/// Order quantities spanning all regimes: zero, below the mean, around
/// the mean, and deep in the tail.
inline double random_q(std::mt19937_64& rng, const momentdro::MomentSpec& s) {
  const double mu_bar = s.mu1 + s.mu2;
  const double second = s.a * s.mu1 * s.mu1 + s.b * s.mu2 * s.mu2 +
                        2.0 * s.c * s.mu1 * s.mu2;
  const double sigma = std::sqrt(std::max(second - mu_bar * mu_bar, 0.0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (r < 0.05) return 0.0;
  return u(rng) * (mu_bar + 3.0 * sigma);
}

inline bool close_rel(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace testutil
