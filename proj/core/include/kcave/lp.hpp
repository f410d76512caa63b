#ifndef KCAVE_LP_HPP
#define KCAVE_LP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kcave/lattice.hpp"

namespace kcave {

enum class RowKind : std::uint8_t { Occupation, Dynamics, Initial };

struct RowTag {
  RowKind kind;
  int j;           // level
  std::int64_t t;  // time column (Dynamics t >= 2, Initial t == 1, Occupation -1)
};

/// The discretised embedding problem as a sparse LP:
///
///   maximize  c0 + c'p   subject to   A p <= b,  p >= 0,
///
/// with one column per continuation probability p_{j,t} (interior level j,
/// 1 <= t <= T_max) and rows
///   - occupation:  sum_t p_{j,t} <= U_j - 1{j == j*}      (one per interior level)
///   - dynamics:    p_{j,t} - u p_{j-1,t-1} - d p_{j+1,t-1} <= 0   (t >= 2)
///   - initial:     p_{j*+1,1} <= u,  p_{j*-1,1} <= d.
///
/// Columns that are structurally zero (wrong parity, unreachable, first column
/// away from the start's children, forced absorption at T_max) are kept in the
/// logical index but excluded from the solver.
class LPInstance {
public:
  int num_cols() const { return static_cast<int>(col_j_.size()); }
  int num_free_cols() const { return num_free_cols_; }
  int num_rows() const { return static_cast<int>(row_tags_.size()); }
  std::size_t num_nonzeros() const { return values_.size(); }

  bool col_fixed(int c) const { return solver_col_[c] < 0; }
  int col_level(int c) const { return col_j_[c]; }
  std::int64_t col_time(int c) const { return col_t_[c]; }
  int col_index(int j, std::int64_t t) const {  // -1 if out of range
    if (j < 1 || j > num_interior_ || t < 1 || t > t_max_) return -1;
    return static_cast<int>((t - 1) * num_interior_) + (j - 1);
  }
  int solver_col(int c) const { return solver_col_[c]; }

  const RowTag& row_tag(int r) const { return row_tags_[r]; }
  double rhs(int r) const { return b_[r]; }
  double cost(int c) const { return c_[c]; }
  double constant() const { return c0_; }
  std::int64_t t_max() const { return t_max_; }
  int num_interior() const { return num_interior_; }

  // CSC over free columns, in solver-column order
  const std::vector<int>& col_starts() const { return col_start_; }
  const std::vector<int>& row_indices() const { return row_index_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& solver_costs() const { return solver_cost_; }
  const std::vector<double>& rhs_vector() const { return b_; }
  int free_to_logical(int sc) const { return free_cols_[sc]; }

  /// Row index of the occupation row for interior level j (offset 0 = level 1).
  int occupation_row(int j) const { return j - 1; }

  std::string to_mps(const std::string& name = "KCAVE") const;

  friend LPInstance assemble(const Lattice& lat, const std::vector<double>& potential_bound,
                             std::int64_t t_max, std::size_t max_nonzeros);

private:
  int num_interior_ = 0;
  std::int64_t t_max_ = 0;
  double c0_ = 0.0;
  int num_free_cols_ = 0;
  std::vector<int> col_j_;
  std::vector<std::int64_t> col_t_;
  std::vector<double> c_;         // logical objective (0 on fixed cols)
  std::vector<int> solver_col_;   // logical -> solver column, -1 when fixed
  std::vector<int> free_cols_;    // solver column -> logical
  std::vector<RowTag> row_tags_;
  std::vector<double> b_;
  std::vector<int> col_start_;    // size num_free_cols + 1
  std::vector<int> row_index_;
  std::vector<double> values_;
  std::vector<double> solver_cost_;
};

LPInstance assemble(const Lattice& lat, const std::vector<double>& potential_bound,
                    std::int64_t t_max = -1, std::size_t max_nonzeros = 5'000'000);

}  // namespace kcave

#endif
