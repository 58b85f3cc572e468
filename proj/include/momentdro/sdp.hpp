#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "momentdro/moments.hpp"

namespace momentdro {

/// Piecewise-quadratic loss max_k { w1 + w2 x1 + w3 x2 + w4 x1^2 +
/// w5 x2^2 + w6 x1 x2 }; one coefficient vector per piece.
struct PiecewiseQuadratic {
  std::vector<std::array<double, 6>> pieces;

  double evaluate(double x1, double x2) const;

  /// The two-piece encoding of max(0, x1 + x2 - q).
  static PiecewiseQuadratic shortfall(double q);
};

using Mat6 = std::array<std::array<double, 6>, 6>;

/// The symmetric matrix certifying nonnegativity of the quadratic zt
/// over the nonnegative quadrant through the substitution x = y^2,
/// in the monomial basis (y1^2, y1 y2, y2^2, y1, y2, 1). The free
/// entries (g, h) cancel in the induced polynomial identity.
Mat6 sos_matrix(const std::array<double, 6>& zt,
                const std::array<double, 3>& g,
                const std::array<double, 3>& h);

/// Upper-bound SDP for a piecewise-quadratic loss: minimize the moment
/// functional of z subject to one PSD block per piece.
struct SdpProblem {
  MomentSpec spec;
  PiecewiseQuadratic pw;
  std::array<double, 6> objective{};  // coefficients on z

  double bound(const std::array<double, 6>& z) const;
};

SdpProblem build_sdp(const MomentSpec& spec, const PiecewiseQuadratic& pw);

/// Sparse SDPA content: scalar variables are z (6 entries) followed by
/// (g, h) per piece; one size-6 PSD block per piece.
struct SdpaEntry {
  int matno = 0;  // 0 is the constant matrix
  int block = 1;
  int row = 1;    // 1-based, row <= col
  int col = 1;
  double value = 0.0;

  bool operator==(const SdpaEntry&) const = default;
};

struct SdpaFile {
  int n_vars = 0;
  std::vector<int> block_sizes;
  std::vector<double> objective;
  std::vector<SdpaEntry> entries;
};

SdpaFile sdpa_data(const SdpProblem& problem);
void export_sdpa(const SdpProblem& problem, const std::string& path);
SdpaFile parse_sdpa(const std::string& path);

struct CertificateCheck {
  double upper_bound = 0.0;
  bool psd_ok = false;
  std::vector<double> min_eigs;  // per piece, after prescaling
};

/// Checks that every piece's block is PSD for the given multipliers
/// and reports the certified bound on the worst-case expectation.
CertificateCheck verify_certificate(
    const MomentSpec& spec, const PiecewiseQuadratic& pw,
    const std::array<double, 6>& z,
    const std::vector<std::array<double, 3>>& G,
    const std::vector<std::array<double, 3>>& H);

struct SosWitness {
  std::vector<std::array<double, 3>> G;
  std::vector<std::array<double, 3>> H;
  std::vector<double> min_eigs;
};

/// Searches for (g, h) making every piece's block PSD: closed-form
/// square-completion starts first, then projected subgradient ascent
/// on the smallest eigenvalue within a 1e4-evaluation budget. Returns
/// nothing when the budget runs out.
std::optional<SosWitness> find_sos_witness(const MomentSpec& spec,
                                           const PiecewiseQuadratic& pw,
                                           const std::array<double, 6>& z);

}  // namespace momentdro
