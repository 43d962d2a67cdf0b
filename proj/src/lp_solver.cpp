#include "peakbandit/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace peakbandit {

std::size_t LinearProgram::add_variable(double lo, double hi, double cost) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(cost);
  return objective.size() - 1;
}

void LinearProgram::add_row(std::vector<std::pair<std::size_t, double>> terms, double rhs) {
  rows.push_back({std::move(terms), rhs});
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (const auto& [j, a] : row.terms) lhs += a * x[j];
    worst = std::max(worst, lhs - row.rhs);
  }
  return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const LpOptions& opt) : opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.rows.size();
    for (std::size_t j = 0; j < n_; ++j) {
      if (!std::isfinite(lp.lower[j])) {
        throw std::invalid_argument("solve_lp requires finite lower bounds (variable " +
                                    std::to_string(j) + ")");
      }
    }

    // Which rows start infeasible at x = lower and need an artificial.
    std::vector<double> residual(m_);
    std::size_t num_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      double lhs = 0.0;
      for (const auto& [j, a] : lp.rows[i].terms) lhs += a * lp.lower[j];
      residual[i] = lp.rows[i].rhs - lhs;
      if (residual[i] < 0.0) ++num_art;
    }

    cols_ = n_ + m_ + num_art;
    tab_.assign(m_ * cols_, 0.0);
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, kInf);
    value_.assign(cols_, 0.0);
    at_upper_.assign(cols_, false);
    basis_.assign(m_, 0);
    is_basic_.assign(cols_, false);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
      value_[j] = lo_[j];
    }

    std::size_t art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = residual[i] < 0.0 ? -1.0 : 1.0;
      for (const auto& [j, a] : lp.rows[i].terms) at(i, j) += sign * a;
      at(i, n_ + i) = sign;
      if (sign > 0.0) {
        set_basic(i, n_ + i);
        value_[n_ + i] = residual[i];
      } else {
        at(i, art) = 1.0;
        set_basic(i, art);
        value_[art] = -residual[i];
        ++art;
      }
    }
    first_art_ = n_ + m_;
  }

  bool bounds_consistent() const {
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] > hi_[j] + opt_.feasibility_tol) return false;
    }
    return true;
  }

  // Returns false when the phase ended unbounded.
  bool optimize(const std::vector<double>& cost) {
    cost_ = cost;
    reduced_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_basic_[j]) continue;
      double d = cost_[j];
      for (std::size_t i = 0; i < m_; ++i) d -= cost_[basis_[i]] * at(i, j);
      reduced_[j] = d;
    }
    while (true) {
      if (++iterations_ > opt_.max_iterations) {
        throw std::runtime_error("simplex iteration limit reached");
      }
      const std::size_t enter = choose_entering();
      if (enter == cols_) return true;
      const double dir = at_upper_[enter] ? -1.0 : 1.0;

      double theta = hi_[enter] - lo_[enter];
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double rate = -dir * at(i, enter);  // d(basic_i)/d(theta)
        const std::size_t b = basis_[i];
        double room;
        bool to_upper;
        if (rate < -opt_.pivot_tol) {
          room = std::max(0.0, value_[b] - lo_[b]) / -rate;
          to_upper = false;
        } else if (rate > opt_.pivot_tol && std::isfinite(hi_[b])) {
          room = std::max(0.0, hi_[b] - value_[b]) / rate;
          to_upper = true;
        } else {
          continue;
        }
        const bool better = room < theta - 1e-12 ||
                            (leave_row != m_ && room <= theta + 1e-12 && b < basis_[leave_row]);
        if (better || (leave_row == m_ && room < theta)) {
          theta = room;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(theta)) return false;

      for (std::size_t i = 0; i < m_; ++i) value_[basis_[i]] -= dir * at(i, enter) * theta;
      value_[enter] += dir * theta;

      if (leave_row == m_) {
        at_upper_[enter] = !at_upper_[enter];
        value_[enter] = at_upper_[enter] ? hi_[enter] : lo_[enter];
        continue;
      }
      const std::size_t leave = basis_[leave_row];
      pivot(leave_row, enter);
      at_upper_[leave] = leave_to_upper;
      value_[leave] = leave_to_upper ? hi_[leave] : lo_[leave];
    }
  }

  double artificial_total() const {
    double s = 0.0;
    for (std::size_t j = first_art_; j < cols_; ++j) s += std::max(0.0, value_[j]);
    return s;
  }

  void retire_artificials() {
    for (std::size_t j = first_art_; j < cols_; ++j) {
      hi_[j] = 0.0;
      value_[j] = 0.0;
      at_upper_[j] = false;
    }
  }

  std::vector<double> phase_one_cost() const {
    std::vector<double> c(cols_, 0.0);
    for (std::size_t j = first_art_; j < cols_; ++j) c[j] = -1.0;
    return c;
  }

  std::vector<double> phase_two_cost(const LinearProgram& lp) const {
    std::vector<double> c(cols_, 0.0);
    std::copy(lp.objective.begin(), lp.objective.end(), c.begin());
    return c;
  }

  std::vector<double> solution() const {
    std::vector<double> x(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) x[j] = std::clamp(x[j], lo_[j], std::max(lo_[j], hi_[j]));
    return x;
  }

  std::size_t iterations() const { return iterations_; }

 private:
  double& at(std::size_t i, std::size_t j) { return tab_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tab_[i * cols_ + j]; }

  void set_basic(std::size_t row, std::size_t col) {
    basis_[row] = col;
    is_basic_[col] = true;
  }

  std::size_t choose_entering() const {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_basic_[j] || hi_[j] - lo_[j] <= 0.0) continue;
      if (!at_upper_[j] && reduced_[j] > opt_.optimality_tol) return j;
      if (at_upper_[j] && reduced_[j] < -opt_.optimality_tol) return j;
    }
    return cols_;
  }

  void pivot(std::size_t r, std::size_t enter) {
    double* prow = &tab_[r * cols_];
    const double inv = 1.0 / prow[enter];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * cols_];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    const double f = reduced_[enter];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= f * prow[j];
    }
    reduced_[enter] = 0.0;
    is_basic_[basis_[r]] = false;
    set_basic(r, enter);
  }

  LpOptions opt_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_art_ = 0;
  std::vector<double> tab_;
  std::vector<double> lo_, hi_, value_, cost_, reduced_;
  std::vector<bool> at_upper_, is_basic_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  if (lp.lower.size() != lp.num_vars() || lp.upper.size() != lp.num_vars()) {
    throw std::invalid_argument("linear program bound vectors do not match objective size");
  }
  for (const auto& row : lp.rows) {
    for (const auto& [j, a] : row.terms) {
      if (j >= lp.num_vars()) throw std::invalid_argument("row references unknown variable");
    }
  }

  LpSolution out;
  Tableau tab(lp, options);
  if (!tab.bounds_consistent()) {
    out.status = LpStatus::infeasible;
    return out;
  }
  tab.optimize(tab.phase_one_cost());
  if (tab.artificial_total() > options.feasibility_tol) {
    out.status = LpStatus::infeasible;
    out.iterations = tab.iterations();
    return out;
  }
  tab.retire_artificials();
  const bool bounded = tab.optimize(tab.phase_two_cost(lp));
  out.iterations = tab.iterations();
  if (!bounded) {
    out.status = LpStatus::unbounded;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x = tab.solution();
  for (std::size_t j = 0; j < lp.num_vars(); ++j) out.objective += lp.objective[j] * out.x[j];
  return out;
}

}  // namespace peakbandit
