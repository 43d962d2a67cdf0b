#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace peakbandit {

/// maximize  objective . x
/// s.t.      sum_j a_ij x_j <= rhs_i   for every row
///           lower_j <= x_j <= upper_j (lower finite, upper may be +inf)
struct LinearProgram {
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    double rhs = 0.0;
  };

  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  std::size_t add_variable(double lo, double hi, double cost);
  void add_row(std::vector<std::pair<std::size_t, double>> terms, double rhs);
  std::size_t num_vars() const { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

struct LpOptions {
  // Phase-one infeasibility above this is reported as infeasible.
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-11;
  std::size_t max_iterations = 1'000'000;
};

/// Dense two-phase primal simplex for bounded variables. Nonbasic variables
/// sit at one of their bounds; Bland's rule picks entering and leaving
/// variables, so degenerate problems terminate. Meant for small problems
/// (hundreds of rows).
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Largest violation of any row or bound by `x`.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace peakbandit
