#ifndef KCAVE_SOLVE_HPP
#define KCAVE_SOLVE_HPP

#include <cstdint>
#include <vector>

#include "kcave/lattice.hpp"
#include "kcave/lp.hpp"
#include "kcave/measures.hpp"
#include "kcave/simplex.hpp"

namespace kcave {

/// Dense space-time grid, indexed [level][time], time = 0..t_max.
using Grid = std::vector<std::vector<double>>;

Grid make_grid(const Lattice& lat, double fill = 0.0);

/// Primal optimum as a randomised stopping rule of the walk:
/// p = probability of occupying a node and continuing, q = stopping mass.
/// p[j_star][0] = 1 by construction (the first step is forced), except for the
/// trivial point-mass target which stops at once.
struct StoppingLaw {
  Grid p;
  Grid q;
  double value = 0.0;          // primal objective
  double mass_error = 0.0;     // |sum q - 1|
  double mean_error = 0.0;     // |sum x dq - start|
  double max_q_clamp = 0.0;    // largest negative q clipped to zero
  bool trivial = false;        // stop-at-once law for a point mass at the start
};

struct DualCertificate {
  std::vector<double> nu;      // occupation multipliers, zero at the boundaries
  Grid eta;                    // dynamics/initial multipliers, zero where no row exists
  double value = 0.0;          // dual objective including the forced-first-step constant
  double max_dual_infeasibility = 0.0;  // positive reduced cost left at the optimum
  double max_multiplier_clamp = 0.0;    // magnitude of negative duals clipped
  bool exact_attempted = false;
  bool exact_certified = false;
  double exact_max_violation = 0.0;
};

struct SlacknessReport {
  // FCS1: p > 0 forces the dual constraint tight (reduced cost zero)
  double fcs1_max = 0.0;
  int fcs1_level = -1;
  std::int64_t fcs1_time = -1;
  // FCS2: q > 0 forces eta = 0
  double fcs2_max = 0.0;
  int fcs2_level = -1;
  std::int64_t fcs2_time = -1;
  // FCS3: nu > 0 forces the occupation bound tight
  double fcs3_max = 0.0;
  int fcs3_level = -1;

  double worst() const { return std::max(fcs1_max, std::max(fcs2_max, fcs3_max)); }
  bool pass(double tol) const { return worst() <= tol; }
};

struct ValueBounds {
  double lower = 0.0;  // stop immediately
  double upper = 0.0;  // static call price of the target
};

struct SolveOptions {
  SimplexOptions simplex;
  double tol = 1e-9;
};

struct SolveResult {
  StoppingLaw law;
  DualCertificate cert;
  std::vector<double> potential_bound;  // U_j used in the occupation rows
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  ValueBounds bounds;
  SlacknessReport slackness;
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
  bool bland_fallback_used = false;
  std::string pivot_rule;
};

/// Assemble and solve the embedding LP for the discretised target.
SolveResult solve_embedding(const Lattice& lat, const DiscreteMeasure& dm,
                            const SolveOptions& opts = {});

/// Stopping mass from the continuation grid via the kernel flow identity.
/// Small negatives (down to -10*tol) are clipped and recorded; anything worse
/// throws NegativeMassError.
Grid derive_q(const Grid& p, const Lattice& lat, double tol, double* max_clamp = nullptr);

SlacknessReport check_complementary_slackness(const StoppingLaw& law, const DualCertificate& cert,
                                              const Lattice& lat,
                                              const std::vector<double>& potential_bound,
                                              double tol);

/// Largest violation of the dual feasibility inequality across grid nodes,
/// recomputed from the exported certificate (independent of solver internals).
double dual_feasibility_violation(const DualCertificate& cert, const Lattice& lat,
                                  int* level = nullptr, std::int64_t* time = nullptr);

double duality_gap(double primal, double dual);
ValueBounds value_bounds(const Lattice& lat, const DiscreteMeasure& dm);

}  // namespace kcave

#endif
