#include "kcave/lattice.hpp"

#include <cmath>
#include <string>

namespace kcave {

namespace {

std::int64_t floor_index(double v) {
  return static_cast<std::int64_t>(std::floor(v + 1e-9));
}

std::int64_t ceil_index(double v) {
  return static_cast<std::int64_t>(std::ceil(v - 1e-9));
}

}  // namespace

Lattice Lattice::build(ModelKind model, std::int64_t n, double support_lo, double support_hi,
                       double start, double beta, double strike, HorizonPolicy policy) {
  if (n < 1) throw ValidationError("grid N must be >= 1, got " + std::to_string(n));
  if (!(support_lo < start && start < support_hi)) {
    throw ValidationError("support [" + std::to_string(support_lo) + ", " +
                          std::to_string(support_hi) + "] must bracket the start " +
                          std::to_string(start));
  }
  if (strike < 0.0) throw ValidationError("strike must be nonnegative");
  if (model == ModelKind::Arithmetic) {
    if (beta <= 0.0) throw ValidationError("beta must be positive for the arithmetic model");
  } else {
    if (beta <= 1.0) throw ValidationError("beta must exceed 1 for the geometric model");
    if (support_lo <= 0.0 || start <= 0.0) {
      throw ValidationError("geometric model requires positive support and start");
    }
  }

  Lattice lat;
  lat.model_ = model;
  lat.n_ = n;
  lat.beta_ = beta;
  lat.strike_ = strike;

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  // integer grid coordinates: g / sqrt(N) is the position (log-position for geometric)
  const double lo_coord = model == ModelKind::Arithmetic ? support_lo : std::log(support_lo);
  const double hi_coord = model == ModelKind::Arithmetic ? support_hi : std::log(support_hi);
  const double start_coord = model == ModelKind::Arithmetic ? start : std::log(start);

  const std::int64_t g_lo = floor_index(lo_coord * sqrt_n);
  const std::int64_t g_hi = ceil_index(hi_coord * sqrt_n);
  const std::int64_t g_star = std::llround(start_coord * sqrt_n);
  if (!(g_lo < g_star && g_star < g_hi)) {
    throw ValidationError("start level must be strictly interior to the lattice");
  }

  const int num_levels = static_cast<int>(g_hi - g_lo + 1);
  lat.j_star_ = static_cast<int>(g_star - g_lo);
  lat.x_.resize(num_levels);
  lat.base_.resize(num_levels);
  for (int i = 0; i < num_levels; ++i) {
    const double coord = static_cast<double>(g_lo + i) / sqrt_n;
    if (model == ModelKind::Arithmetic) {
      lat.x_[i] = coord;
      lat.base_[i] = std::exp(beta * coord);
    } else {
      lat.x_[i] = std::exp(coord);
      lat.base_[i] = std::exp(beta * coord);  // x^beta on the log grid
    }
  }

  const double grid_start = lat.x_[lat.j_star_];
  if (std::abs(grid_start - start) > 1e-9 * std::max(1.0, std::abs(start))) {
    throw ValidationError("start " + std::to_string(start) +
                          " does not lie on the lattice (nearest level " +
                          std::to_string(grid_start) + "); choose N so that the start is a grid point");
  }

  const double step = 1.0 / sqrt_n;
  if (model == ModelKind::Arithmetic) {
    lat.up_prob_ = 0.5;
    lat.rho_ = std::cosh(beta * step);
  } else {
    const double up = std::exp(step), down = std::exp(-step);
    lat.up_prob_ = (1.0 - down) / (up - down);
    lat.rho_ = lat.up_prob_ * std::exp(beta * step) + (1.0 - lat.up_prob_) * std::exp(-beta * step);
  }
  lat.log_rho_ = std::log(lat.rho_);

  // Payoff horizon: first column past which F-bar vanishes at every level.
  const double top_base = lat.base_.back();
  if (strike == 0.0) {
    if (!policy.explicit_t_max) {
      throw HorizonError("strike 0 keeps the payoff positive forever; pass an explicit horizon");
    }
    lat.t_max_ = *policy.explicit_t_max;
    lat.t_star_ = lat.t_max_;
    lat.payoff_truncated_ = true;
  } else {
    std::int64_t t_star = 0;
    if (top_base > strike) {
      t_star = static_cast<std::int64_t>(
          std::ceil((std::log(top_base) - std::log(strike)) / lat.log_rho_ - 1e-12));
    }
    lat.t_star_ = t_star;
    if (policy.explicit_t_max) {
      lat.t_max_ = *policy.explicit_t_max;
      lat.payoff_truncated_ = lat.t_max_ < t_star;
      if (lat.payoff_truncated_) lat.t_star_ = lat.t_max_;
    } else {
      lat.t_max_ = t_star + static_cast<std::int64_t>(std::ceil(sqrt_n));
    }
  }
  if (lat.t_max_ < 1) throw HorizonError("horizon must allow at least one step");

  lat.rho_pow_.resize(static_cast<std::size_t>(lat.t_max_) + 2);
  for (std::size_t t = 0; t < lat.rho_pow_.size(); ++t) {
    lat.rho_pow_[t] = std::exp(-static_cast<double>(t) * lat.log_rho_);
  }

  lat.k_idx_.resize(num_levels);
  for (int j = 0; j < num_levels; ++j) {
    if (strike == 0.0) {
      lat.k_idx_[j] = lat.t_max_;  // never crosses
    } else if (lat.base_[j] <= strike) {
      lat.k_idx_[j] = 0;
    } else {
      lat.k_idx_[j] = static_cast<std::int64_t>(
          std::ceil((std::log(lat.base_[j]) - std::log(strike)) / lat.log_rho_ - 1e-12));
    }
  }
  return lat;
}

double Lattice::kappa(int j) const {
  if (is_boundary(j)) return 0.0;
  return up_prob_ * (x_[j + 1] - x_[j]) + (1.0 - up_prob_) * (x_[j] - x_[j - 1]);
}

}  // namespace kcave
