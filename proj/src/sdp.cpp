#include "momentdro/sdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace momentdro {

double PiecewiseQuadratic::evaluate(double x1, double x2) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& w : pieces) {
    best = std::max(best, w[0] + w[1] * x1 + w[2] * x2 + w[3] * x1 * x1 +
                              w[4] * x2 * x2 + w[5] * x1 * x2);
  }
  return best;
}

PiecewiseQuadratic PiecewiseQuadratic::shortfall(double q) {
  PiecewiseQuadratic pw;
  pw.pieces.push_back({0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  pw.pieces.push_back({-q, 1.0, 1.0, 0.0, 0.0, 0.0});
  return pw;
}

Mat6 sos_matrix(const std::array<double, 6>& zt,
                const std::array<double, 3>& g,
                const std::array<double, 3>& h) {
  Mat6 m{};
  m[0] = {zt[3], 0.0, -g[0], 0.0, -h[0], -g[1]};
  m[1] = {0.0, zt[5] + 2.0 * g[0], 0.0, h[0], -h[1], -h[2]};
  m[2] = {-g[0], 0.0, zt[4], h[1], 0.0, -g[2]};
  m[3] = {0.0, h[0], h[1], zt[1] + 2.0 * g[1], h[2], 0.0};
  m[4] = {-h[0], -h[1], 0.0, h[2], zt[2] + 2.0 * g[2], 0.0};
  m[5] = {-g[1], -h[2], -g[2], 0.0, 0.0, zt[0]};
  return m;
}

double SdpProblem::bound(const std::array<double, 6>& z) const {
  double v = 0.0;
  for (int i = 0; i < 6; ++i) v += objective[i] * z[i];
  return v;
}

SdpProblem build_sdp(const MomentSpec& spec, const PiecewiseQuadratic& pw) {
  require_valid(spec);
  if (pw.pieces.empty()) throw infeasible_error("K >= 1 violated");
  for (const auto& w : pw.pieces) {
    for (double v : w) {
      if (!std::isfinite(v)) throw infeasible_error("finite pieces violated");
    }
  }
  SdpProblem p;
  p.spec = spec;
  p.pw = pw;
  p.objective = {1.0,
                 spec.mu1,
                 spec.mu2,
                 spec.a * spec.mu1 * spec.mu1,
                 spec.b * spec.mu2 * spec.mu2,
                 spec.c * spec.mu1 * spec.mu2};
  return p;
}

namespace {

// Upper-triangle sparse entries of the variable patterns inside one
// block. Variable order per block: z1..z6 globally, then g1 g2 g3
// h1 h2 h3 for that block.
struct Pattern {
  int row, col;  // 1-based, row <= col
  double value;
};

const std::vector<Pattern>& z_pattern(int i) {
  static const std::vector<Pattern> p[6] = {
      {{6, 6, 1.0}}, {{4, 4, 1.0}}, {{5, 5, 1.0}},
      {{1, 1, 1.0}}, {{3, 3, 1.0}}, {{2, 2, 1.0}}};
  return p[i];
}

const std::vector<Pattern>& g_pattern(int j) {
  static const std::vector<Pattern> p[3] = {
      {{2, 2, 2.0}, {1, 3, -1.0}},
      {{4, 4, 2.0}, {1, 6, -1.0}},
      {{5, 5, 2.0}, {3, 6, -1.0}}};
  return p[j];
}

const std::vector<Pattern>& h_pattern(int j) {
  static const std::vector<Pattern> p[3] = {
      {{2, 4, 1.0}, {1, 5, -1.0}},
      {{3, 4, 1.0}, {2, 5, -1.0}},
      {{4, 5, 1.0}, {2, 6, -1.0}}};
  return p[j];
}

}  // namespace

SdpaFile sdpa_data(const SdpProblem& problem) {
  const int K = static_cast<int>(problem.pw.pieces.size());
  SdpaFile f;
  f.n_vars = 6 + 6 * K;
  f.block_sizes.assign(K, 6);
  f.objective.assign(f.n_vars, 0.0);
  for (int i = 0; i < 6; ++i) f.objective[i] = problem.objective[i];

  for (int k = 0; k < K; ++k) {
    const int blk = k + 1;
    // Constant matrix: the piece coefficients on the diagonal.
    const auto& w = problem.pw.pieces[k];
    const int diag_of[6] = {6, 4, 5, 1, 3, 2};
    for (int i = 0; i < 6; ++i) {
      if (w[i] != 0.0) {
        f.entries.push_back({0, blk, diag_of[i], diag_of[i], w[i]});
      }
    }
    for (int i = 0; i < 6; ++i) {
      for (const Pattern& p : z_pattern(i)) {
        f.entries.push_back({i + 1, blk, p.row, p.col, p.value});
      }
    }
    const int base = 6 + 6 * k;
    for (int j = 0; j < 3; ++j) {
      for (const Pattern& p : g_pattern(j)) {
        f.entries.push_back({base + 1 + j, blk, p.row, p.col, p.value});
      }
      for (const Pattern& p : h_pattern(j)) {
        f.entries.push_back({base + 4 + j, blk, p.row, p.col, p.value});
      }
    }
  }
  return f;
}

void export_sdpa(const SdpProblem& problem, const std::string& path) {
  const SdpaFile f = sdpa_data(problem);
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path);
  char buf[64];
  out << f.n_vars << "\n";
  out << f.block_sizes.size() << "\n";
  for (std::size_t i = 0; i < f.block_sizes.size(); ++i) {
    out << (i ? " " : "") << f.block_sizes[i];
  }
  out << "\n";
  for (std::size_t i = 0; i < f.objective.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f.objective[i]);
    out << (i ? " " : "") << buf;
  }
  out << "\n";
  for (const SdpaEntry& e : f.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.matno << " " << e.block << " " << e.row << " " << e.col << " "
        << buf << "\n";
  }
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

SdpaFile parse_sdpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  SdpaFile f;
  int nblocks = 0;
  in >> f.n_vars >> nblocks;
  f.block_sizes.resize(nblocks);
  for (int& s : f.block_sizes) in >> s;
  f.objective.resize(f.n_vars);
  for (double& c : f.objective) in >> c;
  SdpaEntry e;
  while (in >> e.matno >> e.block >> e.row >> e.col >> e.value) {
    f.entries.push_back(e);
  }
  if (!in.eof()) throw std::ios_base::failure("malformed SDPA file: " + path);
  return f;
}

namespace {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

Matrix6 to_eigen(const Mat6& m) {
  Matrix6 out;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) out(i, j) = m[i][j];
  }
  return out;
}

// Smallest eigenvalue after prescaling the matrix to unit max-abs
// entry, so the -1e-9 tolerance is scale-free.
double scaled_min_eig(const Mat6& m, Eigen::Matrix<double, 6, 1>* vec) {
  Matrix6 em = to_eigen(m);
  const double mx = std::max(em.cwiseAbs().maxCoeff(), 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix6> es(em / mx);
  if (vec) *vec = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

std::array<double, 6> piece_residual(const std::array<double, 6>& z,
                                     const std::array<double, 6>& w) {
  std::array<double, 6> zt;
  for (int i = 0; i < 6; ++i) zt[i] = z[i] - w[i];
  return zt;
}

// Square-completion starting points for one piece: when the quadratic
// part of zt is (near) rank one, the lifted polynomial is a single
// square plus diagonal leftovers, and g can be read off directly.
std::vector<std::array<double, 3>> completion_starts(
    const std::array<double, 6>& zt) {
  std::vector<std::array<double, 3>> starts;
  starts.push_back({0.0, 0.0, 0.0});
  if (zt[3] >= 0.0 && zt[4] >= 0.0) {
    const double alpha = std::sqrt(zt[3]);
    const double beta = (zt[5] >= 0.0 ? 1.0 : -1.0) * std::sqrt(zt[4]);
    std::vector<double> gammas = {0.0};
    if (alpha > 0.0) gammas.push_back(zt[1] / (2.0 * alpha));
    if (beta != 0.0) gammas.push_back(zt[2] / (2.0 * beta));
    for (double gamma : gammas) {
      starts.push_back({-alpha * beta, -alpha * gamma, -beta * gamma});
    }
  }
  return starts;
}

}  // namespace

CertificateCheck verify_certificate(
    const MomentSpec& spec, const PiecewiseQuadratic& pw,
    const std::array<double, 6>& z,
    const std::vector<std::array<double, 3>>& G,
    const std::vector<std::array<double, 3>>& H) {
  if (G.size() != pw.pieces.size() || H.size() != pw.pieces.size()) {
    throw infeasible_error("multiplier count does not match piece count");
  }
  const SdpProblem p = build_sdp(spec, pw);
  CertificateCheck check;
  check.upper_bound = p.bound(z);
  check.psd_ok = true;
  for (std::size_t k = 0; k < pw.pieces.size(); ++k) {
    const Mat6 m = sos_matrix(piece_residual(z, pw.pieces[k]), G[k], H[k]);
    const double eig = scaled_min_eig(m, nullptr);
    check.min_eigs.push_back(eig);
    if (eig < -1e-9) check.psd_ok = false;
  }
  return check;
}

std::optional<SosWitness> find_sos_witness(const MomentSpec& spec,
                                           const PiecewiseQuadratic& pw,
                                           const std::array<double, 6>& z) {
  require_valid(spec);
  if (pw.pieces.empty()) throw infeasible_error("K >= 1 violated");

  SosWitness w;
  w.G.resize(pw.pieces.size());
  w.H.resize(pw.pieces.size());
  w.min_eigs.resize(pw.pieces.size());

  for (std::size_t k = 0; k < pw.pieces.size(); ++k) {
    const std::array<double, 6> zt = piece_residual(z, pw.pieces[k]);
    bool found = false;
    int budget = 10000;

    double best_eig = -std::numeric_limits<double>::infinity();
    std::array<double, 3> best_g{}, best_h{};

    auto consider = [&](const std::array<double, 3>& g,
                        const std::array<double, 3>& h) {
      if (budget <= 0) return;
      --budget;
      const double eig = scaled_min_eig(sos_matrix(zt, g, h), nullptr);
      if (eig > best_eig) {
        best_eig = eig;
        best_g = g;
        best_h = h;
      }
      if (eig >= -1e-9) found = true;
    };

    for (const auto& g : completion_starts(zt)) {
      consider(g, {0.0, 0.0, 0.0});
      if (found) break;
    }

    if (!found) {
      // Projected subgradient ascent on the smallest eigenvalue of the
      // affine matrix map over the six free entries.
      std::array<double, 3> g = best_g, h = best_h;
      double scale = 1.0;
      for (double v : zt) scale = std::max(scale, std::abs(v));
      for (int it = 0; it < 4000 && budget > 0 && !found; ++it) {
        Eigen::Matrix<double, 6, 1> v;
        --budget;
        const double eig = scaled_min_eig(sos_matrix(zt, g, h), &v);
        if (eig > best_eig) {
          best_eig = eig;
          best_g = g;
          best_h = h;
        }
        if (eig >= -1e-9) {
          found = true;
          break;
        }
        // d lambda / d g_j and d h_j via the eigenvector outer product.
        std::array<double, 6> grad{};
        grad[0] = 2.0 * v(1) * v(1) - 2.0 * v(0) * v(2);
        grad[1] = 2.0 * v(3) * v(3) - 2.0 * v(0) * v(5);
        grad[2] = 2.0 * v(4) * v(4) - 2.0 * v(2) * v(5);
        grad[3] = 2.0 * v(1) * v(3) - 2.0 * v(0) * v(4);
        grad[4] = 2.0 * v(2) * v(3) - 2.0 * v(1) * v(4);
        grad[5] = 2.0 * v(3) * v(4) - 2.0 * v(1) * v(5);
        double norm = 0.0;
        for (double d : grad) norm += d * d;
        norm = std::sqrt(norm);
        if (norm < 1e-14) break;
        const double step = scale * 0.5 / std::sqrt(1.0 + it);
        g[0] += step * grad[0] / norm;
        g[1] += step * grad[1] / norm;
        g[2] += step * grad[2] / norm;
        h[0] += step * grad[3] / norm;
        h[1] += step * grad[4] / norm;
        h[2] += step * grad[5] / norm;
      }
    }

    if (found) {
      w.G[k] = best_g;
      w.H[k] = best_h;
      w.min_eigs[k] = best_eig;
    } else {
      return std::nullopt;
    }
  }
  return w;
}

}  // namespace momentdro
