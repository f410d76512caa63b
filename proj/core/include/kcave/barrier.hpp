#ifndef KCAVE_BARRIER_HPP
#define KCAVE_BARRIER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kcave/lattice.hpp"
#include "kcave/measures.hpp"
#include "kcave/solve.hpp"

namespace kcave {

/// Stopping region of the optimal law: per level, an inverse barrier
/// {t <= l_idx} and a barrier {t >= r_idx} separated by the strike curve,
/// with at most one partially-stopped column per side.  Boundary levels are
/// absorbing and encoded l = K = r.  l_idx is only meaningful for t >= 1;
/// the forced first step means nothing stops at the start node unless the
/// whole target sits there (stop_at_start).
struct KCaveBarrier {
  std::vector<std::int64_t> l_idx;
  std::vector<std::int64_t> r_idx;
  std::vector<std::int64_t> k_idx;
  std::vector<double> frac_left;             // stop fraction at frac_left_t, 0 when none
  std::vector<double> frac_right;
  std::vector<std::int64_t> frac_left_t;     // -1 when none
  std::vector<std::int64_t> frac_right_t;
  bool stop_at_start = false;

  int num_levels() const { return static_cast<int>(l_idx.size()); }
};

struct ShapeViolation {
  int level;
  std::int64_t stop_time;
  std::int64_t alive_time;
  double p_value;
  bool left;  // which implication failed
};

struct ShapeReport {
  std::vector<ShapeViolation> violations;
  double worst_p = 0.0;
  bool pass() const { return violations.empty(); }
};

struct EmbeddedLawAudit {
  std::vector<double> mu_hat;  // stopped mass per level
  std::vector<double> mu_l;    // stopped at t <= K_idx
  std::vector<double> mu_r;    // stopped at t >  K_idx
  double max_levelwise_dev = 0.0;
  int max_dev_level = -1;
  double w1_distance = 0.0;
  bool supp_r_matches_supp = true;  // supp(mu_r) == supp(mu_hat) within tolerance
  double mass_tol = 0.0;            // threshold used for the support tests
};

KCaveBarrier extract_barrier(const StoppingLaw& law, const Lattice& lat, double tol_p = 1e-10);

ShapeReport verify_shape(const StoppingLaw& law, const Lattice& lat, double tol_q = 5e-8,
                         double tol_p = 1e-10);

EmbeddedLawAudit embedded_measure(const StoppingLaw& law, const Lattice& lat,
                                  const DiscreteMeasure& target, double mass_tol = 5e-8);

/// Canonical representative: l is pushed up to its running maximum on levels
/// the stopped law never touches (never into the occupied columns, so the
/// embedded law is unchanged), and levels outside the target support get the
/// degenerate barrier.  Verified by re-propagating the rule.
KCaveBarrier regularize(const KCaveBarrier& b, const EmbeddedLawAudit& audit,
                        const StoppingLaw& law, const Lattice& lat, const DiscreteMeasure& target,
                        double tol_p = 1e-10);

/// Exact forward propagation of the walk against a barrier rule.
StoppingLaw propagate(const KCaveBarrier& b, const Lattice& lat);

/// Plot-ready export, one row per level.
std::string barrier_csv(const KCaveBarrier& b, const Lattice& lat);

}  // namespace kcave

#endif
