#ifndef KCAVE_LATTICE_HPP
#define KCAVE_LATTICE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "kcave/errors.hpp"

namespace kcave {

/// Payoff model for the discretised walk.
///  - Arithmetic: exponential-martingale payoff of a Brownian-type walk,
///    h(x,t) = exp(beta*x) * rho^{-t} on the grid x_j = j/sqrt(N).
///  - Geometric: LETF payoff of a geometric walk, h(x,t) = x^beta * rho^{-t}
///    on the grid x_j = exp(j/sqrt(N)).
enum class ModelKind { Arithmetic, Geometric };

/// Controls the truncation horizon T_max.  By default T_max = T* + ceil(sqrt(N))
/// where T* is the first column past which the payoff vanishes identically;
/// everything still alive at T_max is absorbed there.  A strike of zero never
/// lets the payoff vanish, so it requires an explicit horizon.
struct HorizonPolicy {
  std::optional<std::int64_t> explicit_t_max;
};

class Lattice {
public:
  static Lattice build(ModelKind model, std::int64_t n, double support_lo, double support_hi,
                       double start, double beta, double strike, HorizonPolicy policy = {});

  ModelKind model() const { return model_; }
  std::int64_t n() const { return n_; }
  double beta() const { return beta_; }
  double strike() const { return strike_; }
  double start() const { return x_[j_star_]; }

  int num_levels() const { return static_cast<int>(x_.size()); }
  int num_interior() const { return num_levels() - 2; }
  int j_star() const { return j_star_; }
  double x(int j) const { return x_[j]; }
  const std::vector<double>& levels() const { return x_; }
  bool is_boundary(int j) const { return j == 0 || j == num_levels() - 1; }
  bool is_interior(int j) const { return !is_boundary(j); }

  /// Up-step probability of the martingale walk out of level j.
  /// Constant 1/2 for the arithmetic model; for the geometric model the unique
  /// probability with up*x_{j+1} + down*x_{j-1} = x_j (also level-independent).
  double up_prob() const { return up_prob_; }
  double down_prob() const { return 1.0 - up_prob_; }

  /// One-step decay factor of the kernel: h(j,t) = base_j * rho^{-t} with
  /// rho = E[(step growth)^beta], so h is a one-step martingale by construction.
  double step_ratio() const { return rho_; }

  std::int64_t t_star() const { return t_star_; }
  std::int64_t t_max() const { return t_max_; }
  bool payoff_truncated() const { return payoff_truncated_; }

  double h(int j, std::int64_t t) const { return base_[j] * rho_pow_neg(t); }
  double payoff(int j, std::int64_t t) const {
    double v = h(j, t) - strike_;
    return v > 0.0 ? v : 0.0;
  }

  /// First time index at which h(j,.) has decayed to or below the strike
  /// (0 when the level is at/below the strike already).  Weak inequality:
  /// ties stop on the curve, where the payoff is exactly zero.
  std::int64_t k_index(int j) const { return k_idx_[j]; }

  /// Whether the walk started at j_star can occupy (j,t) at all.
  bool parity_ok(int j, std::int64_t t) const {
    return (((j - j_star_) + t) & 1) == 0;
  }
  bool reachable(int j, std::int64_t t) const {
    std::int64_t d = j > j_star_ ? j - j_star_ : j_star_ - j;
    return d <= t && parity_ok(j, t);
  }

  /// Expected one-step absolute displacement out of level j; converts the
  /// potential-difference of the target into an occupation bound.
  double kappa(int j) const;

private:
  Lattice() = default;

  double rho_pow_neg(std::int64_t t) const {
    if (t >= 0 && t < static_cast<std::int64_t>(rho_pow_.size())) {
      return rho_pow_[static_cast<std::size_t>(t)];
    }
    // off-table (only hit by diagnostics past T_max)
    return std::exp(-static_cast<double>(t) * log_rho_);
  }

  ModelKind model_ = ModelKind::Arithmetic;
  std::int64_t n_ = 1;
  double beta_ = 1.0;
  double strike_ = 1.0;
  double up_prob_ = 0.5;
  double rho_ = 1.0;
  double log_rho_ = 0.0;
  int j_star_ = 0;
  std::int64_t t_star_ = 0;
  std::int64_t t_max_ = 0;
  bool payoff_truncated_ = false;
  std::vector<double> x_;        // level positions (prices for the geometric model)
  std::vector<double> base_;     // h(j,0)
  std::vector<std::int64_t> k_idx_;
  std::vector<double> rho_pow_;  // rho^{-t}, t = 0..t_max+1
};

}  // namespace kcave

#endif
