#include "momentdro/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace momentdro {

std::size_t LpProblem::add_column(double objective,
                                  const std::vector<double>& coeffs) {
  if (coeffs.size() != rows_.size()) {
    throw std::invalid_argument("column height does not match row count");
  }
  obj_.push_back(objective);
  cols_.insert(cols_.end(), coeffs.begin(), coeffs.end());
  return obj_.size() - 1;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration limit";
    case LpStatus::NumericalFailure: return "numerical failure";
  }
  return "?";
}

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kRcTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Working storage for the augmented problem: structural columns first,
// then one slack or surplus per inequality row, then artificials.
struct Tableau {
  std::size_t m = 0;
  std::size_t n_struct = 0;
  std::size_t n_total = 0;
  std::size_t first_artificial = 0;
  std::vector<double> cols;       // column-major, height m
  std::vector<double> cost;       // phase II cost
  std::vector<double> rhs;        // scaled, nonnegative
  std::vector<int> basis;         // column index per row

  double* col(std::size_t j) { return cols.data() + j * m; }
  const double* col(std::size_t j) const { return cols.data() + j * m; }
};

class Simplex {
 public:
  explicit Simplex(const LpProblem& lp) : lp_(lp) { build(); }

  LpSolution run();

 private:
  void build();
  void factorize();
  void compute_xb();
  // One simplex phase; phase1 selects the artificial objective.
  LpStatus iterate(bool phase1);
  double objective(bool phase1) const;
  // Pivots zero-level artificials out of the basis where possible.
  // Any artificial that cannot leave sits on a dependent row and stays
  // pinned at zero for the rest of the solve.
  void drive_out_artificials();

  const LpProblem& lp_;
  Tableau t_;
  std::vector<double> binv_;  // m x m row-major
  std::vector<double> xb_;
  std::vector<double> y_;     // duals of the working objective
  std::vector<double> dir_;

  double* binv_row(std::size_t r) { return binv_.data() + r * t_.m; }
};

void Simplex::build() {
  const std::size_t m = lp_.n_rows();
  const std::size_t n = lp_.n_cols();
  t_.m = m;
  t_.n_struct = n;

  // Row scaling by the largest structural coefficient keeps the pivot
  // tolerances meaningful across very different moment magnitudes.
  std::vector<double> scale(m, 1.0);
  for (std::size_t r = 0; r < m; ++r) {
    double mx = std::abs(lp_.rows()[r].rhs);
    for (std::size_t j = 0; j < n; ++j) {
      mx = std::max(mx, std::abs(lp_.columns()[j * m + r]));
    }
    scale[r] = mx > 1e-300 ? 1.0 / mx : 1.0;
  }

  std::vector<int> flip(m, 1);
  std::vector<RowSense> sense(m);
  t_.rhs.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    double rhs = lp_.rows()[r].rhs * scale[r];
    sense[r] = lp_.rows()[r].sense;
    if (rhs < 0.0) {
      rhs = -rhs;
      flip[r] = -1;
      if (sense[r] == RowSense::LE) sense[r] = RowSense::GE;
      else if (sense[r] == RowSense::GE) sense[r] = RowSense::LE;
    }
    t_.rhs[r] = rhs;
  }

  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (sense[r] != RowSense::EQ) ++n_slack;
    if (sense[r] != RowSense::LE) ++n_art;
  }
  t_.first_artificial = n + n_slack;
  t_.n_total = n + n_slack + n_art;
  t_.cols.assign(t_.n_total * m, 0.0);
  t_.cost.assign(t_.n_total, 0.0);
  t_.basis.assign(m, -1);

  for (std::size_t j = 0; j < n; ++j) {
    double* c = t_.col(j);
    for (std::size_t r = 0; r < m; ++r) {
      c[r] = lp_.columns()[j * m + r] * scale[r] * flip[r];
    }
    t_.cost[j] = lp_.objectives()[j];
  }
  std::size_t next = n;
  for (std::size_t r = 0; r < m; ++r) {
    if (sense[r] == RowSense::LE) {
      t_.col(next)[r] = 1.0;
      t_.basis[r] = static_cast<int>(next);
      ++next;
    } else if (sense[r] == RowSense::GE) {
      t_.col(next)[r] = -1.0;
      ++next;
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (sense[r] != RowSense::LE) {
      t_.col(next)[r] = 1.0;
      t_.basis[r] = static_cast<int>(next);
      ++next;
    }
  }

  binv_.resize(m * m);
  xb_.resize(m);
  y_.resize(m);
  dir_.resize(m);
  factorize();
}

void Simplex::factorize() {
  const std::size_t m = t_.m;
  // Gauss-Jordan inversion of the basis matrix with partial pivoting.
  std::vector<double> a(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < m; ++k) {
      a[r * m + k] = t_.col(t_.basis[k])[r];
      binv_[r * m + k] = (r == k) ? 1.0 : 0.0;
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < m; ++r) {
      if (std::abs(a[r * m + p]) > std::abs(a[best * m + p])) best = r;
    }
    if (std::abs(a[best * m + p]) < 1e-13) {
      throw std::runtime_error("singular basis");
    }
    if (best != p) {
      for (std::size_t k = 0; k < m; ++k) {
        std::swap(a[p * m + k], a[best * m + k]);
        std::swap(binv_[p * m + k], binv_[best * m + k]);
      }
    }
    const double piv = a[p * m + p];
    for (std::size_t k = 0; k < m; ++k) {
      a[p * m + k] /= piv;
      binv_[p * m + k] /= piv;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == p) continue;
      const double f = a[r * m + p];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        a[r * m + k] -= f * a[p * m + k];
        binv_[r * m + k] -= f * binv_[p * m + k];
      }
    }
  }
  compute_xb();
}

void Simplex::compute_xb() {
  const std::size_t m = t_.m;
  for (std::size_t r = 0; r < m; ++r) {
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) v += binv_row(r)[k] * t_.rhs[k];
    xb_[r] = v;
  }
}

double Simplex::objective(bool phase1) const {
  double v = 0.0;
  for (std::size_t r = 0; r < t_.m; ++r) {
    const std::size_t j = static_cast<std::size_t>(t_.basis[r]);
    const double c =
        phase1 ? (j >= t_.first_artificial ? -1.0 : 0.0) : t_.cost[j];
    v += c * xb_[r];
  }
  return v;
}

LpStatus Simplex::iterate(bool phase1) {
  const std::size_t m = t_.m;
  const std::size_t limit = 20000 + 50 * (t_.n_total + m);
  bool bland = false;
  std::size_t stall = 0;
  std::size_t since_refactor = 0;
  double last_obj = objective(phase1);

  std::vector<char> is_basic(t_.n_total, 0);
  for (std::size_t r = 0; r < m; ++r) is_basic[t_.basis[r]] = 1;

  for (std::size_t iter = 0; iter < limit; ++iter) {
    // Duals of the working objective.
    for (std::size_t r = 0; r < m; ++r) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = static_cast<std::size_t>(t_.basis[k]);
        const double c =
            phase1 ? (j >= t_.first_artificial ? -1.0 : 0.0) : t_.cost[j];
        v += c * binv_[k * m + r];
      }
      y_[r] = v;
    }

    // Pricing. Artificials never re-enter; in phase II they are
    // ignored entirely.
    std::size_t entering = t_.n_total;
    double best_rc = kRcTol;
    const std::size_t scan_end = t_.first_artificial;
    for (std::size_t j = 0; j < scan_end; ++j) {
      if (is_basic[j]) continue;
      const double cj =
          phase1 ? 0.0 : t_.cost[j];
      const double* a = t_.col(j);
      double rc = cj;
      for (std::size_t r = 0; r < m; ++r) rc -= y_[r] * a[r];
      if (rc > best_rc) {
        entering = j;
        best_rc = rc;
        if (bland) break;
      }
    }
    if (entering == t_.n_total) {
      return LpStatus::Optimal;
    }

    const double* a = t_.col(entering);
    for (std::size_t r = 0; r < m; ++r) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) v += binv_row(r)[k] * a[k];
      dir_[r] = v;
    }

    // Ratio test; ties prefer kicking artificials out, then the lowest
    // basic column index, which keeps runs reproducible.
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      if (dir_[r] <= kPivTol) continue;
      const double ratio = std::max(xb_[r], 0.0) / dir_[r];
      bool better = ratio < best_ratio - 1e-12;
      if (!better && ratio < best_ratio + 1e-12 && leave < m) {
        const bool cand_art =
            static_cast<std::size_t>(t_.basis[r]) >= t_.first_artificial;
        const bool cur_art =
            static_cast<std::size_t>(t_.basis[leave]) >= t_.first_artificial;
        if (cand_art && !cur_art) better = true;
        else if (cand_art == cur_art && t_.basis[r] < t_.basis[leave])
          better = true;
      }
      if (better) {
        leave = r;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    if (leave == m) {
      return phase1 ? LpStatus::NumericalFailure : LpStatus::Unbounded;
    }

    // Basis change with a product-form inverse update.
    const double piv = dir_[leave];
    is_basic[t_.basis[leave]] = 0;
    is_basic[entering] = 1;
    t_.basis[leave] = static_cast<int>(entering);
    for (std::size_t k = 0; k < m; ++k) binv_row(leave)[k] /= piv;
    xb_[leave] /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double f = dir_[r];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        binv_row(r)[k] -= f * binv_row(leave)[k];
      }
      xb_[r] -= f * xb_[leave];
    }

    if (++since_refactor >= 64) {
      factorize();
      since_refactor = 0;
    }

    const double obj = objective(phase1);
    if (obj <= last_obj + 1e-12 * (1.0 + std::abs(last_obj))) {
      if (++stall > 5 * m && !bland) bland = true;
    } else {
      stall = 0;
    }
    last_obj = obj;
  }
  return LpStatus::IterationLimit;
}

void Simplex::drive_out_artificials() {
  const std::size_t m = t_.m;
  std::vector<char> is_basic(t_.n_total, 0);
  for (std::size_t r = 0; r < m; ++r) is_basic[t_.basis[r]] = 1;
  for (std::size_t r = 0; r < m; ++r) {
    if (static_cast<std::size_t>(t_.basis[r]) < t_.first_artificial) continue;
    for (std::size_t j = 0; j < t_.first_artificial; ++j) {
      if (is_basic[j]) continue;
      const double* a = t_.col(j);
      double d = 0.0;
      for (std::size_t k = 0; k < m; ++k) d += binv_row(r)[k] * a[k];
      if (std::abs(d) <= 1e-7) continue;
      for (std::size_t rr = 0; rr < m; ++rr) {
        double v = 0.0;
        for (std::size_t k = 0; k < m; ++k) v += binv_row(rr)[k] * a[k];
        dir_[rr] = v;
      }
      is_basic[t_.basis[r]] = 0;
      is_basic[j] = 1;
      t_.basis[r] = static_cast<int>(j);
      const double piv = dir_[r];
      for (std::size_t k = 0; k < m; ++k) binv_row(r)[k] /= piv;
      xb_[r] /= piv;
      for (std::size_t rr = 0; rr < m; ++rr) {
        if (rr == r) continue;
        const double f = dir_[rr];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          binv_row(rr)[k] -= f * binv_row(r)[k];
        }
        xb_[rr] -= f * xb_[r];
      }
      break;
    }
  }
}

LpSolution Simplex::run() {
  LpSolution sol;
  try {
    bool need_phase1 = false;
    for (std::size_t r = 0; r < t_.m; ++r) {
      if (static_cast<std::size_t>(t_.basis[r]) >= t_.first_artificial) {
        need_phase1 = true;
        break;
      }
    }
    if (need_phase1) {
      const LpStatus st = iterate(true);
      if (st != LpStatus::Optimal) {
        sol.status = st == LpStatus::Unbounded ? LpStatus::NumericalFailure
                                               : st;
        sol.message = "phase I did not converge";
        return sol;
      }
      factorize();
      if (objective(true) < -kFeasTol) {
        sol.status = LpStatus::Infeasible;
        sol.message = "phase I optimum below zero";
        for (std::size_t r = 0; r < t_.m; ++r) {
          if (static_cast<std::size_t>(t_.basis[r]) >= t_.first_artificial &&
              xb_[r] > kFeasTol) {
            sol.infeasible_rows.push_back(r);
          }
        }
        return sol;
      }
      drive_out_artificials();
    }
    const LpStatus st = iterate(false);
    factorize();
    sol.status = st;
    if (st != LpStatus::Optimal) {
      sol.message = to_string(st);
      return sol;
    }
  } catch (const std::runtime_error& e) {
    sol.status = LpStatus::NumericalFailure;
    sol.message = e.what();
    return sol;
  }

  sol.x.assign(t_.n_struct, 0.0);
  for (std::size_t r = 0; r < t_.m; ++r) {
    const std::size_t j = static_cast<std::size_t>(t_.basis[r]);
    if (j < t_.n_struct) sol.x[j] = std::max(xb_[r], 0.0);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < t_.n_struct; ++j) {
    sol.objective += lp_.objectives()[j] * sol.x[j];
  }
  sol.row_activity.assign(t_.m, 0.0);
  for (std::size_t j = 0; j < t_.n_struct; ++j) {
    if (sol.x[j] == 0.0) continue;
    for (std::size_t r = 0; r < t_.m; ++r) {
      sol.row_activity[r] += lp_.columns()[j * t_.m + r] * sol.x[j];
    }
  }
  return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  Simplex s(lp);
  return s.run();
}

}  // namespace momentdro
