#ifndef KCAVE_SIMPLEX_HPP
#define KCAVE_SIMPLEX_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kcave/errors.hpp"

namespace kcave {

enum class PivotRule { Bland, Dantzig, Devex };

PivotRule pivot_rule_from_string(const std::string& s);
std::string to_string(PivotRule rule);

struct SimplexOptions {
  PivotRule pivot = PivotRule::Bland;
  double tol = 1e-9;               // feasibility / optimality tolerance
  std::int64_t max_iterations = 0; // 0: choose from problem size
  int refactor_interval = 100;
  bool exact_certificate = false;  // rational re-verification of the final basis
  std::size_t exact_certificate_max_dim = 600;
};

/// maximize c'x  subject to  A x <= b, x >= 0, with b >= 0 (all-slack start).
struct StandardLP {
  int m = 0;
  int n = 0;
  std::vector<int> col_start;  // size n+1
  std::vector<int> row_index;
  std::vector<double> values;
  std::vector<double> b;
  std::vector<double> c;
};

struct SimplexResult {
  std::vector<double> x;        // primal solution, size n
  std::vector<double> y;        // row multipliers, size m, >= -tol
  std::vector<double> reduced;  // c_j - y'A_j, size n
  double objective = 0.0;
  double dual_objective = 0.0;
  std::int64_t iterations = 0;
  int refactorizations = 0;
  std::int64_t degenerate_pivots = 0;
  bool bland_fallback_used = false;
  bool exact_attempted = false;
  bool exact_certified = false;
  double exact_max_violation = 0.0;
};

SimplexResult solve_standard(const StandardLP& lp, const SimplexOptions& opts = {});

}  // namespace kcave

#endif
