#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <ios>
#include <random>

#include "momentdro/bivariate.hpp"
#include "momentdro/sdp.hpp"
#include "test_util.hpp"

using namespace momentdro;

namespace {

double basis_quadratic(const std::array<double, 6>& zt, double x1,
                       double x2) {
  return zt[0] + zt[1] * x1 + zt[2] * x2 + zt[3] * x1 * x1 +
         zt[4] * x2 * x2 + zt[5] * x1 * x2;
}

double quad_form(const Mat6& m, double y1, double y2) {
  const std::array<double, 6> v{y1 * y1, y1 * y2, y2 * y2, y1, y2, 1.0};
  double out = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) out += v[i] * m[i][j] * v[j];
  }
  return out;
}

}  // namespace

TEST_SUITE("sdp") {

TEST_CASE("shortfall pieces evaluate to the positive part") {
  const PiecewiseQuadratic pw = PiecewiseQuadratic::shortfall(1.5);
  REQUIRE(pw.pieces.size() == 2);
  CHECK(pw.evaluate(0.4, 0.3) == doctest::Approx(0.0));
  CHECK(pw.evaluate(1.0, 2.0) == doctest::Approx(1.5));
}

TEST_CASE("lifted matrix entries follow the displayed pattern") {
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
      CHECK(m[i][j] == expect[i][j]);
      CHECK(m[i][j] == m[j][i]);
    }
  }
}

TEST_CASE("free entries cancel in the induced polynomial") {
  std::mt19937_64 rng(401);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 6> zt;
    std::array<double, 3> g1, g2, h1, h2;
    for (auto& v : zt) v = coeff(rng);
    for (int i = 0; i < 3; ++i) {
      g1[i] = coeff(rng);
      g2[i] = coeff(rng);
      h1[i] = coeff(rng);
      h2[i] = coeff(rng);
    }
    const Mat6 ma = sos_matrix(zt, g1, h1);
    const Mat6 mb = sos_matrix(zt, g2, h2);
    for (int k = 0; k < 5; ++k) {
      const double y1 = coeff(rng), y2 = coeff(rng);
      const double qa = quad_form(ma, y1, y2);
      const double qb = quad_form(mb, y1, y2);
      const double direct = basis_quadratic(zt, y1 * y1, y2 * y2);
      CHECK(std::abs(qa - direct) <= 1e-10 * (1.0 + std::abs(direct)));
      CHECK(std::abs(qb - direct) <= 1e-10 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("objective carries the moment vector") {
  const MomentSpec s{1.0, 2.0, 2.0, 3.0, 1.2};
  const SdpProblem p = build_sdp(s, PiecewiseQuadratic::shortfall(1.0));
  CHECK(p.objective[0] == 1.0);
  CHECK(p.objective[1] == s.mu1);
  CHECK(p.objective[2] == s.mu2);
  CHECK(p.objective[3] == doctest::Approx(s.a * s.mu1 * s.mu1));
  CHECK(p.objective[4] == doctest::Approx(s.b * s.mu2 * s.mu2));
  CHECK(p.objective[5] == doctest::Approx(s.c * s.mu1 * s.mu2));
  const std::array<double, 6> z{1.0, 0.5, 0.25, 0.1, 0.2, 0.3};
  double dot = 0.0;
  for (int i = 0; i < 6; ++i) dot += z[i] * p.objective[i];
  CHECK(p.bound(z) == doctest::Approx(dot));
}

TEST_CASE("sdpa export round-trips exactly") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  const SdpProblem p = build_sdp(s, PiecewiseQuadratic::shortfall(1.5));
  const SdpaFile before = sdpa_data(p);
  const std::string path = "sdp_roundtrip_test.dat-s";
  export_sdpa(p, path);
  const SdpaFile after = parse_sdpa(path);
  std::remove(path.c_str());

  CHECK(before.n_vars == after.n_vars);
  CHECK(before.block_sizes == after.block_sizes);
  REQUIRE(before.objective.size() == after.objective.size());
  for (std::size_t i = 0; i < before.objective.size(); ++i) {
    CHECK(before.objective[i] == after.objective[i]);
  }
  REQUIRE(before.entries.size() == after.entries.size());
  for (std::size_t i = 0; i < before.entries.size(); ++i) {
    CHECK(before.entries[i] == after.entries[i]);
  }
}

TEST_CASE("scalar variable count scales with the pieces") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  PiecewiseQuadratic pw;
  pw.pieces = {{0, 0, 0, 0, 0, 0},
               {-1.0, 1.0, 1.0, 0.0, 0.0, 0.0},
               {0.5, 0.2, 0.1, 0.0, 0.0, 0.0}};
  const SdpaFile f = sdpa_data(build_sdp(s, pw));
  CHECK(f.n_vars == 6 + 6 * 3);
  CHECK(f.block_sizes == std::vector<int>{6, 6, 6});
}

TEST_CASE("closed-form duals admit a lifted certificate") {
  const MomentSpec s = from_correlation(1.0, 1.0, 2.0, 6.0, 0.3);
  for (double q : {0.4, 1.2, 3.0, 6.0}) {
    const auto [value, rep] = worst_case_value(s, q);
    DualCertificate cert;
    try {
      cert = dual_certificate(s, q);
    } catch (const degenerate_error&) {
      continue;
    }
    const PiecewiseQuadratic pw = PiecewiseQuadratic::shortfall(q);
    const auto witness = find_sos_witness(s, pw, cert.z);
    REQUIRE_MESSAGE(witness.has_value(), "q=", q);
    const CertificateCheck check =
        verify_certificate(s, pw, cert.z, witness->G, witness->H);
    CHECK(check.psd_ok);
    CHECK(testutil::close_rel(check.upper_bound, value, 1e-7));
  }
}

TEST_CASE("broken paths surface as stream failures") {
  const MomentSpec s{1.0, 1.0, 2.0, 6.0, 1.3};
  const SdpProblem p = build_sdp(s, PiecewiseQuadratic::shortfall(1.0));
  CHECK_THROWS_AS(export_sdpa(p, "/nonexistent_dir/x.dat-s"),
                  std::ios_base::failure);
  CHECK_THROWS_AS(parse_sdpa("/nonexistent_dir/x.dat-s"),
                  std::ios_base::failure);
}

}  // TEST_SUITE
