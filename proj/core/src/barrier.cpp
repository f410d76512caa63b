#include "kcave/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kcave {

namespace {

// zero-prefix length of p over t in [1, t_max]
std::int64_t prefix_zero(const std::vector<double>& p_level, std::int64_t t_max, double tol_p) {
  std::int64_t t = 0;
  while (t + 1 <= t_max && p_level[t + 1] <= tol_p) ++t;
  return t;
}

std::int64_t suffix_zero_start(const std::vector<double>& p_level, std::int64_t t_max,
                               double tol_p) {
  std::int64_t t = t_max + 1;
  while (t - 1 >= 1 && p_level[t - 1] <= tol_p) --t;
  return t;  // smallest t with p == 0 for all s >= t (within [1, t_max])
}

}  // namespace

KCaveBarrier extract_barrier(const StoppingLaw& law, const Lattice& lat, double tol_p) {
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  KCaveBarrier b;
  b.l_idx.assign(nl, 0);
  b.r_idx.assign(nl, 0);
  b.k_idx.assign(nl, 0);
  b.frac_left.assign(nl, 0.0);
  b.frac_right.assign(nl, 0.0);
  b.frac_left_t.assign(nl, -1);
  b.frac_right_t.assign(nl, -1);
  b.stop_at_start = law.trivial;

  for (int j = 0; j < nl; ++j) {
    const std::int64_t k = lat.k_index(j);
    b.k_idx[j] = k;
    if (lat.is_boundary(j)) {
      b.l_idx[j] = k;
      b.r_idx[j] = k;
      continue;
    }
    const auto& p = law.p[j];
    const auto& q = law.q[j];
    const std::int64_t pre = prefix_zero(p, tm, tol_p);
    const std::int64_t suf = suffix_zero_start(p, tm, tol_p);

    // interior support must be one contiguous block of reachable columns
    for (std::int64_t t = pre + 1; t < suf; ++t) {
      if (lat.reachable(j, t) && p[t] <= tol_p) {
        throw ShapeError("continuing mass at level " + std::to_string(j) +
                         " is not a contiguous time interval (gap at t=" + std::to_string(t) +
                         "); degenerate optimum, retry with the Bland rule");
      }
    }

    b.l_idx[j] = std::min(pre, k > 0 ? k - 1 : 0);
    b.r_idx[j] = std::max(suf, k + 1);

    // partially stopped boundary columns: q and p positive at the same node
    const std::int64_t first_col = pre + 1, last_col = suf - 1;
    if (first_col <= last_col && first_col <= tm && p[first_col] > tol_p && first_col <= k &&
        q[first_col] > tol_p) {
      b.frac_left_t[j] = first_col;
      b.frac_left[j] = q[first_col] / (q[first_col] + p[first_col]);
    }
    if (last_col >= first_col && last_col >= 1 && p[last_col] > tol_p && last_col > k &&
        q[last_col] > tol_p) {
      b.frac_right_t[j] = last_col;
      b.frac_right[j] = q[last_col] / (q[last_col] + p[last_col]);
    }

    // every stopped node must be reproduced by the rule {t <= l} u {t >= r}
    // plus the two fractional columns; anything else (a stop exactly on the
    // strike curve with later resumption, a second partial column) signals a
    // degenerate optimum the rule cannot carry
    for (std::int64_t t = 1; t <= tm; ++t) {
      if (q[t] <= 10.0 * tol_p) continue;
      const bool covered = t >= b.r_idx[j] || t <= b.l_idx[j] || t == b.frac_left_t[j] ||
                           t == b.frac_right_t[j] || t == tm;
      if (!covered) {
        throw ShapeError("stopped mass at level " + std::to_string(j) + ", t=" +
                         std::to_string(t) +
                         " is not representable by a two-sided barrier rule; "
                         "degenerate optimum, retry with the Bland rule");
      }
    }
  }
  return b;
}

ShapeReport verify_shape(const StoppingLaw& law, const Lattice& lat, double tol_q, double tol_p) {
  ShapeReport rep;
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  for (int j = 0; j < nl; ++j) {
    if (lat.is_boundary(j)) continue;  // no continuation variables there
    const auto& p = law.p[j];
    const auto& q = law.q[j];
    std::int64_t first_p = tm + 1, last_p = 0;
    for (std::int64_t t = 1; t <= tm; ++t) {
      if (p[t] > tol_p) {
        first_p = std::min(first_p, t);
        last_p = std::max(last_p, t);
      }
    }
    const std::int64_t k = lat.k_index(j);
    for (std::int64_t t = 1; t <= tm; ++t) {
      if (q[t] <= tol_q) continue;
      if (t < k && first_p < t) {
        rep.violations.push_back({j, t, first_p, p[first_p], true});
        rep.worst_p = std::max(rep.worst_p, p[first_p]);
      }
      if (t > k && last_p > t) {
        rep.violations.push_back({j, t, last_p, p[last_p], false});
        rep.worst_p = std::max(rep.worst_p, p[last_p]);
      }
    }
  }
  return rep;
}

EmbeddedLawAudit embedded_measure(const StoppingLaw& law, const Lattice& lat,
                                  const DiscreteMeasure& target, double mass_tol) {
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  EmbeddedLawAudit audit;
  audit.mu_hat.assign(nl, 0.0);
  audit.mu_l.assign(nl, 0.0);
  audit.mu_r.assign(nl, 0.0);
  audit.mass_tol = mass_tol;
  for (int j = 0; j < nl; ++j) {
    const std::int64_t k = lat.k_index(j);
    for (std::int64_t t = 0; t <= tm; ++t) {
      const double m = law.q[j][t];
      if (m == 0.0) continue;
      audit.mu_hat[j] += m;
      if (t <= k) {
        audit.mu_l[j] += m;
      } else {
        audit.mu_r[j] += m;
      }
    }
  }
  double cdf_gap = 0.0, cdf_hat = 0.0, cdf_tgt = 0.0;
  for (int j = 0; j < nl; ++j) {
    const double dev = std::abs(audit.mu_hat[j] - target.weight(j));
    if (dev > audit.max_levelwise_dev) {
      audit.max_levelwise_dev = dev;
      audit.max_dev_level = j;
    }
    cdf_hat += audit.mu_hat[j];
    cdf_tgt += target.weight(j);
    if (j + 1 < nl) {
      cdf_gap += std::abs(cdf_hat - cdf_tgt) * (lat.x(j + 1) - lat.x(j));
    }
    if (audit.mu_hat[j] > mass_tol && audit.mu_r[j] <= mass_tol) {
      audit.supp_r_matches_supp = false;
    }
  }
  audit.w1_distance = cdf_gap;
  return audit;
}

StoppingLaw propagate(const KCaveBarrier& b, const Lattice& lat) {
  if (b.num_levels() != lat.num_levels()) {
    throw RuleMismatchError("barrier has " + std::to_string(b.num_levels()) +
                            " levels, lattice has " + std::to_string(lat.num_levels()));
  }
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();
  const double u = lat.up_prob(), d = lat.down_prob();
  StoppingLaw law;
  law.p = make_grid(lat);
  law.q = make_grid(lat);
  if (b.stop_at_start) {
    law.q[lat.j_star()][0] = 1.0;
    law.trivial = true;
  } else {
    law.p[lat.j_star()][0] = 1.0;
  }

  for (std::int64_t t = 1; t <= tm; ++t) {
    for (int j = 0; j < nl; ++j) {
      double inflow = 0.0;
      if (j > 0) inflow += u * law.p[j - 1][t - 1];
      if (j + 1 < nl) inflow += d * law.p[j + 1][t - 1];
      if (inflow == 0.0) continue;
      double stop = 0.0;
      if (lat.is_boundary(j) || t >= tm || t >= b.r_idx[j] || t <= b.l_idx[j]) {
        stop = inflow;
      } else if (t == b.frac_left_t[j]) {
        stop = inflow * b.frac_left[j];
      } else if (t == b.frac_right_t[j]) {
        stop = inflow * b.frac_right[j];
      }
      law.q[j][t] = stop;
      law.p[j][t] = inflow - stop;
    }
  }
  double mass = 0.0, mean = 0.0, value = 0.0;
  for (int j = 0; j < nl; ++j) {
    for (std::int64_t t = 0; t <= tm; ++t) {
      mass += law.q[j][t];
      mean += law.q[j][t] * lat.x(j);
      value += law.q[j][t] * lat.payoff(j, t);
    }
  }
  law.mass_error = std::abs(mass - 1.0);
  law.mean_error = std::abs(mean - lat.start());
  law.value = value;
  return law;
}

KCaveBarrier regularize(const KCaveBarrier& b, const EmbeddedLawAudit& audit,
                        const StoppingLaw& law, const Lattice& lat, const DiscreteMeasure& target,
                        double tol_p) {
  KCaveBarrier reg = b;
  const int nl = lat.num_levels();
  const std::int64_t tm = lat.t_max();

  int lo_supp = nl, hi_supp = -1;
  for (int j = 0; j < nl; ++j) {
    if (target.weight(j) > 0.0) {
      lo_supp = std::min(lo_supp, j);
      hi_supp = std::max(hi_supp, j);
    }
  }
  // cutoff below which the right barrier is the whole half-line
  const double x_curve = lat.model() == ModelKind::Arithmetic
                             ? (lat.strike() > 0.0 ? std::log(lat.strike()) / lat.beta()
                                                   : -std::numeric_limits<double>::infinity())
                             : std::pow(lat.strike(), 1.0 / lat.beta());
  const double cutoff = std::min(lat.x(lo_supp), x_curve);

  std::int64_t running_l = -1;
  for (int j = 0; j < nl; ++j) {
    const bool hit = audit.mu_hat[j] > audit.mass_tol;
    if (j < lo_supp || j > hi_supp) {
      reg.l_idx[j] = reg.k_idx[j];
      reg.r_idx[j] = reg.k_idx[j];
      reg.frac_left_t[j] = reg.frac_right_t[j] = -1;
      reg.frac_left[j] = reg.frac_right[j] = 0.0;
      if (lat.x(j) < cutoff) reg.r_idx[j] = 0;
      continue;
    }
    if (lat.x(j) < cutoff) reg.r_idx[j] = 0;
    if (lat.is_boundary(j)) {
      running_l = std::max(running_l, reg.l_idx[j]);
      continue;
    }
    if (hit) {
      running_l = std::max(running_l, reg.l_idx[j]);
      continue;
    }
    // never-hit level: raise l to the running maximum, but never into the
    // occupied columns and never across the strike curve
    const std::int64_t pre = prefix_zero(law.p[j], tm, tol_p);
    std::int64_t lifted = std::max(reg.l_idx[j], running_l);
    lifted = std::min(lifted, pre);
    if (reg.k_idx[j] > 0) lifted = std::min(lifted, reg.k_idx[j] - 1);
    reg.l_idx[j] = std::max(reg.l_idx[j], lifted);
    running_l = std::max(running_l, reg.l_idx[j]);
  }

  // the embedded law must be untouched
  StoppingLaw before = propagate(b, lat);
  StoppingLaw after = propagate(reg, lat);
  double worst = 0.0;
  for (int j = 0; j < nl; ++j) {
    double a = 0.0, c = 0.0;
    for (std::int64_t t = 0; t <= tm; ++t) {
      a += before.q[j][t];
      c += after.q[j][t];
    }
    worst = std::max(worst, std::abs(a - c));
  }
  if (worst > 100.0 * tol_p) {
    throw RegularizationChangedLawError("levelwise drift " + std::to_string(worst));
  }
  return reg;
}

std::string barrier_csv(const KCaveBarrier& b, const Lattice& lat) {
  std::ostringstream os;
  os.precision(17);
  os << "level,x,l_time,K_time,r_time,frac_stop_left,frac_stop_right\n";
  for (int j = 0; j < b.num_levels(); ++j) {
    os << j << "," << lat.x(j) << "," << b.l_idx[j] << "," << b.k_idx[j] << "," << b.r_idx[j]
       << "," << b.frac_left[j] << "," << b.frac_right[j] << "\n";
  }
  return os.str();
}

}  // namespace kcave
