#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace momentdro {

enum class RowSense { LE, GE, EQ };

/// Dense linear program in column form: maximize obj . x subject to
/// per-row linear constraints and x >= 0. Rows are declared first,
/// then columns are appended with their coefficients for every row.
/// Row counts stay small (a dozen or so); column counts can reach the
/// hundreds of thousands.
class LpProblem {
 public:
  struct Row {
    RowSense sense = RowSense::EQ;
    double rhs = 0.0;
  };

  explicit LpProblem(std::vector<Row> rows) : rows_(std::move(rows)) {}

  /// Appends a column; coeffs must have one entry per row. Returns the
  /// column index.
  std::size_t add_column(double objective, const std::vector<double>& coeffs);

  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return obj_.size(); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objectives() const { return obj_; }
  /// Column-major coefficient storage, n_rows entries per column.
  const std::vector<double>& columns() const { return cols_; }

 private:
  std::vector<Row> rows_;
  std::vector<double> obj_;
  std::vector<double> cols_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit,
                      NumericalFailure };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;             // structural variables only
  std::vector<double> row_activity;  // A x on the original rows
  /// Rows whose artificials stayed positive when status is Infeasible.
  std::vector<std::size_t> infeasible_rows;
  std::string message;
};

/// Two-phase revised simplex with Dantzig pricing, a Bland fallback
/// against stalling, periodic refactorization, and deterministic tie
/// breaking. Identical inputs produce identical outputs.
LpSolution solve_lp(const LpProblem& lp);

}  // namespace momentdro
