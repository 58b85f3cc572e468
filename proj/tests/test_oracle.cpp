#include <doctest.h>

#include <cmath>

#include "momentdro/bivariate.hpp"
#include "momentdro/oracle.hpp"
#include "test_util.hpp"

using namespace momentdro;

TEST_SUITE("oracle") {

TEST_CASE("grid restriction brackets the closed form") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  for (double q : {0.5, 1.5, 3.0, 6.0}) {
    const double exact = worst_case_value(s, q).first;
    GridConfig grid;
    grid.n_per_axis = 150;
    const OracleResult res = lp_worst_case(s, q, grid);
    CHECK(res.value <= exact + 1e-3);
    CHECK(res.value >= exact * (1.0 - 0.02) - 1e-6);
  }
}

TEST_CASE("augmented support attains the exact value") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  for (double q : {0.8, 2.5}) {
    const double exact = worst_case_value(s, q).first;
    GridConfig grid;
    grid.n_per_axis = 60;
    const OracleResult res = lp_worst_case(s, q, grid);
    CHECK(testutil::close_rel(res.value, exact, 1e-4));
  }
}

TEST_CASE("refining the grid improves the bound") {
  const MomentSpec s{1.0, 2.0, 3.0, 2.0, 0.7};
  const double q = 2.0;
  const double exact = worst_case_value(s, q).first;
  GridConfig grid;
  grid.augment = false;
  double prev = -1.0;
  for (int n : {50, 100, 200}) {
    grid.n_per_axis = n;
    const OracleResult res = lp_worst_case(s, q, grid);
    CHECK(res.value >= prev - 1e-9);
    CHECK(res.value <= exact + 1e-3);
    prev = res.value;
  }
  CHECK(testutil::close_rel(prev, exact, 0.02));
}

TEST_CASE("solution is a distribution with the right moments") {
  const MomentSpec s{0.8, 1.4, 2.5, 4.0, 1.1};
  GridConfig grid;
  grid.n_per_axis = 80;
  const OracleResult res = lp_worst_case(s, 1.7, grid);
  CHECK(testutil::close_rel(res.distribution.total_mass(), 1.0, 1e-7));
  const auto m = res.distribution.moments();
  const std::array<double, 5> target{s.mu1, s.mu2, s.a * s.mu1 * s.mu1,
                                     s.b * s.mu2 * s.mu2,
                                     s.c * s.mu1 * s.mu2};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(m[i] - target[i]) <= res.slack + 1e-7);
  }
  CHECK(testutil::close_rel(res.distribution.expected_shortfall(1.7),
                            res.value, 1e-7));
}

TEST_CASE("repeated solves are identical") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 0.6};
  GridConfig grid;
  grid.n_per_axis = 60;
  const OracleResult r1 = lp_worst_case(s, 1.2, grid);
  const OracleResult r2 = lp_worst_case(s, 1.2, grid);
  CHECK(r1.value == r2.value);
  CHECK(r1.distribution.probs == r2.distribution.probs);
}

TEST_CASE("a box too small for the second moments is reported") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.0};
  GridConfig grid;
  grid.n_per_axis = 40;
  grid.box_scale = 0.2;
  grid.augment = false;
  CHECK_THROWS_AS(lp_worst_case(s, 1.0, grid), lp_infeasible_error);
  try {
    lp_worst_case(s, 1.0, grid);
  } catch (const lp_infeasible_error& e) {
    CHECK(std::string(e.what()).find("slack") != std::string::npos);
  }
}

TEST_CASE("high correlation empties the left tail of the tighter margin") {
  GridConfig grid;
  grid.n_per_axis = 150;
  const MomentSpec tight = from_correlation(1.0, 1.0, 2.0, 6.0, 0.999999);
  CHECK(max_prob_below(tight, 0.5, grid) <= 0.05);
  const MomentSpec loose = from_correlation(1.0, 1.0, 2.0, 6.0, 0.0);
  CHECK(max_prob_below(loose, 0.5, grid) >= 0.1);
}

TEST_CASE("support floor under perfect positive correlation") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.0};
  CHECK(shifting_bound(s) ==
        doctest::Approx(1.0 - std::sqrt(0.2)).epsilon(1e-12));
  const MomentSpec m{1.0, 1.0, 6.0, 2.0, 1.0};
  CHECK(shifting_bound(m) ==
        doctest::Approx(1.0 - std::sqrt(0.2)).epsilon(1e-12));
}

TEST_CASE("custom losses run through the same oracle") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  GridConfig grid;
  grid.n_per_axis = 60;
  const auto loss = [](double x1, double x2) {
    return std::max(0.5 * (x1 + x2) - 0.3, 0.2 * (x1 + x2) + 0.1);
  };
  const OracleResult res = lp_maximize(s, loss, grid, {});
  const ReducedLoss red =
      reduce_loss(0.2, 0.5, 0.1, -0.3, {1.0, 1.0}, s);
  CHECK(res.value <= red.evaluate_worst_case() + 1e-3);
  CHECK(res.value >= red.evaluate_worst_case() * 0.97 - 1e-6);
}

}  // TEST_SUITE
