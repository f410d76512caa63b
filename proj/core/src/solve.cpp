#include "kcave/solve.hpp"

#include <algorithm>
#include <cmath>

namespace kcave {

Grid make_grid(const Lattice& lat, double fill) {
  return Grid(static_cast<std::size_t>(lat.num_levels()),
              std::vector<double>(static_cast<std::size_t>(lat.t_max()) + 1, fill));
}

Grid derive_q(const Grid& p, const Lattice& lat, double tol, double* max_clamp) {
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  const double u = lat.up_prob(), d = lat.down_prob();
  Grid q = make_grid(lat);
  double clamp = 0.0;
  for (std::int64_t t = 1; t <= tm; ++t) {
    for (int j = 0; j < nl; ++j) {
      double inflow = 0.0;
      if (j > 0) inflow += u * p[j - 1][t - 1];
      if (j + 1 < nl) inflow += d * p[j + 1][t - 1];
      double val = inflow - p[j][t];
      if (val < 0.0) {
        if (val < -10.0 * tol) {
          throw NegativeMassError("q(" + std::to_string(j) + "," + std::to_string(t) +
                                  ") = " + std::to_string(val));
        }
        clamp = std::max(clamp, -val);
        val = 0.0;
      }
      q[j][t] = val;
    }
  }
  if (max_clamp) *max_clamp = clamp;
  return q;
}

namespace {

StoppingLaw trivial_law(const Lattice& lat) {
  StoppingLaw law;
  law.p = make_grid(lat);
  law.q = make_grid(lat);
  law.q[lat.j_star()][0] = 1.0;
  law.value = lat.payoff(lat.j_star(), 0);
  law.trivial = true;
  return law;
}

void law_conservation(StoppingLaw& law, const Lattice& lat) {
  double mass = 0.0, mean = 0.0;
  for (int j = 0; j < lat.num_levels(); ++j) {
    for (std::int64_t t = 0; t <= lat.t_max(); ++t) {
      mass += law.q[j][t];
      mean += law.q[j][t] * lat.x(j);
    }
  }
  law.mass_error = std::abs(mass - 1.0);
  law.mean_error = std::abs(mean - lat.start());
}

}  // namespace

SolveResult solve_embedding(const Lattice& lat, const DiscreteMeasure& dm,
                            const SolveOptions& opts) {
  SolveResult out;
  out.pivot_rule = to_string(opts.simplex.pivot);
  out.potential_bound = potential(dm, lat);
  out.bounds = value_bounds(lat, dm);

  if (dm.trivial_embedding(lat)) {
    out.law = trivial_law(lat);
    law_conservation(out.law, lat);
    out.cert.nu.assign(lat.num_levels(), 0.0);
    out.cert.eta = make_grid(lat);
    out.cert.value = out.law.value;
    out.primal_value = out.law.value;
    out.dual_value = out.law.value;
    out.gap = 0.0;
    return out;
  }

  const int js = lat.j_star();
  if (out.potential_bound[js] < 1.0 - 1e-9) {
    throw InfeasibleError(
        "occupation budget at the start level is " + std::to_string(out.potential_bound[js]) +
        " < 1: the forced first step cannot be embedded; increase N");
  }

  LPInstance lp = assemble(lat, out.potential_bound);

  StandardLP std_lp;
  std_lp.m = lp.num_rows();
  std_lp.n = lp.num_free_cols();
  std_lp.col_start = lp.col_starts();
  std_lp.row_index = lp.row_indices();
  std_lp.values = lp.values();
  std_lp.c = lp.solver_costs();
  std_lp.b = lp.rhs_vector();
  for (double& v : std_lp.b) {
    if (v < 0.0) v = 0.0;  // occupation budget exactly at the feasibility edge
  }

  SimplexResult sol = solve_standard(std_lp, opts.simplex);

  // map the solution back onto the space-time grids
  out.law.p = make_grid(lat);
  out.law.p[js][0] = 1.0;
  for (int sc = 0; sc < lp.num_free_cols(); ++sc) {
    const int logical = lp.free_to_logical(sc);
    out.law.p[lp.col_level(logical)][lp.col_time(logical)] = sol.x[sc];
  }
  out.law.q = derive_q(out.law.p, lat, opts.tol, &out.law.max_q_clamp);
  out.law.value = lp.constant() + sol.objective;
  law_conservation(out.law, lat);

  out.cert.nu.assign(lat.num_levels(), 0.0);
  out.cert.eta = make_grid(lat);
  double clamp = 0.0;
  for (int r = 0; r < lp.num_rows(); ++r) {
    double y = sol.y[r];
    if (y < 0.0) {
      clamp = std::max(clamp, -y);
      y = 0.0;
    }
    const RowTag& tag = lp.row_tag(r);
    switch (tag.kind) {
      case RowKind::Occupation: out.cert.nu[tag.j] = y; break;
      default: out.cert.eta[tag.j][tag.t] = y; break;
    }
  }
  out.cert.max_multiplier_clamp = clamp;
  double worst_rc = 0.0;
  for (double rc : sol.reduced) worst_rc = std::max(worst_rc, rc);
  out.cert.max_dual_infeasibility = worst_rc;
  out.cert.value = lp.constant() + sol.dual_objective;
  out.cert.exact_attempted = sol.exact_attempted;
  out.cert.exact_certified = sol.exact_certified;
  out.cert.exact_max_violation = sol.exact_max_violation;

  out.primal_value = out.law.value;
  out.dual_value = out.cert.value;
  out.gap = duality_gap(out.primal_value, out.dual_value);
  out.iterations = sol.iterations;
  out.degenerate_pivots = sol.degenerate_pivots;
  out.bland_fallback_used = sol.bland_fallback_used;
  out.slackness =
      check_complementary_slackness(out.law, out.cert, lat, out.potential_bound, opts.tol);
  return out;
}

SlacknessReport check_complementary_slackness(const StoppingLaw& law, const DualCertificate& cert,
                                              const Lattice& lat,
                                              const std::vector<double>& potential_bound,
                                              double tol) {
  SlacknessReport rep;
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  const double u = lat.up_prob(), d = lat.down_prob();

  // FCS1: at p > 0 the dual inequality must be tight
  for (int j = 1; j + 1 < nl; ++j) {
    for (std::int64_t t = 1; t < tm; ++t) {
      if (law.p[j][t] <= tol) continue;
      const double lhs = u * cert.eta[j + 1][t + 1] + d * cert.eta[j - 1][t + 1] -
                         cert.eta[j][t] - cert.nu[j];
      const double rhs = lat.payoff(j, t) - u * lat.payoff(j + 1, t + 1) -
                         d * lat.payoff(j - 1, t + 1);
      const double gap = std::abs(lhs - rhs);
      if (gap > rep.fcs1_max) {
        rep.fcs1_max = gap;
        rep.fcs1_level = j;
        rep.fcs1_time = t;
      }
    }
  }
  // FCS2: stopped mass kills eta
  for (int j = 0; j < nl; ++j) {
    for (std::int64_t t = 1; t <= tm; ++t) {
      if (law.q[j][t] <= tol) continue;
      const double e = cert.eta[j][t];
      if (e > rep.fcs2_max) {
        rep.fcs2_max = e;
        rep.fcs2_level = j;
        rep.fcs2_time = t;
      }
    }
  }
  // FCS3: a positive occupation multiplier forces the bound tight
  for (int j = 1; j + 1 < nl; ++j) {
    if (cert.nu[j] <= tol) continue;
    double occ = j == lat.j_star() ? 1.0 : 0.0;
    for (std::int64_t t = 1; t <= tm; ++t) occ += law.p[j][t];
    const double slack = std::abs(potential_bound[j] - occ);
    if (slack > rep.fcs3_max) {
      rep.fcs3_max = slack;
      rep.fcs3_level = j;
    }
  }
  return rep;
}

double dual_feasibility_violation(const DualCertificate& cert, const Lattice& lat, int* level,
                                  std::int64_t* time) {
  double worst = 0.0;
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  const double u = lat.up_prob(), d = lat.down_prob();
  const int js = lat.j_star();
  for (int j = 1; j + 1 < nl; ++j) {
    for (std::int64_t t = 1; t < tm; ++t) {
      if (!lat.reachable(j, t)) continue;
      if (t == 1 && j != js - 1 && j != js + 1) continue;
      const double lhs = u * cert.eta[j + 1][t + 1] + d * cert.eta[j - 1][t + 1] -
                         cert.eta[j][t] - cert.nu[j];
      const double rhs = lat.payoff(j, t) - u * lat.payoff(j + 1, t + 1) -
                         d * lat.payoff(j - 1, t + 1);
      if (lhs - rhs > worst) {
        worst = lhs - rhs;
        if (level) *level = j;
        if (time) *time = t;
      }
    }
  }
  return worst;
}

double duality_gap(double primal, double dual) { return std::abs(primal - dual); }

ValueBounds value_bounds(const Lattice& lat, const DiscreteMeasure& dm) {
  ValueBounds b;
  b.lower = lat.payoff(lat.j_star(), 0);
  b.upper = 0.0;
  for (int j = 0; j < lat.num_levels(); ++j) {
    b.upper += dm.weight(j) * lat.payoff(j, 0);
  }
  return b;
}

}  // namespace kcave
