#ifndef KCAVE_MEASURES_HPP
#define KCAVE_MEASURES_HPP

#include <string>
#include <vector>

#include "kcave/errors.hpp"
#include "kcave/lattice.hpp"

namespace kcave {

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

struct MeasureOptions {
  double centering_tol = 1e-8;  // |mean - start| beyond this is an error unless recentering
  bool recenter = false;        // shift positions affinely so the mean matches the start
};

/// Atomic target marginal: the law the stopped walk must reproduce.
/// Invariants enforced at construction: positive weights summing to one,
/// strictly increasing positions, mean equal to the start (the martingale
/// centering condition).
class TargetMeasure {
public:
  TargetMeasure(std::vector<Atom> atoms, double start, std::string label = "",
                const MeasureOptions& opts = {});

  const std::vector<Atom>& atoms() const { return atoms_; }
  double start() const { return start_; }
  const std::string& label() const { return label_; }

  double mass() const;
  double mean() const;
  double min_position() const { return atoms_.front().position; }
  double max_position() const { return atoms_.back().position; }

  /// Point mass sitting exactly on the start: the embedding is "stop at once"
  /// and the LP pipeline short-circuits.
  bool trivial_embedding() const;
  bool recentered() const { return recentered_; }
  double applied_shift() const { return applied_shift_; }

private:
  std::vector<Atom> atoms_;
  double start_ = 0.0;
  std::string label_;
  bool recentered_ = false;
  double applied_shift_ = 0.0;
};

struct CallQuote {
  double strike = 0.0;
  double price = 0.0;
};

/// Call quotes for one maturity. Construction rejects arbitrageable inputs:
/// strikes must increase strictly, prices must be nonnegative, non-increasing
/// and convex in strike (tolerance 1e-9).
class CallQuoteSurface {
public:
  explicit CallQuoteSurface(std::vector<CallQuote> quotes, std::string maturity = "");

  const std::vector<CallQuote>& quotes() const { return quotes_; }
  const std::string& maturity() const { return maturity_; }

private:
  std::vector<CallQuote> quotes_;
  std::string maturity_;
};

/// Target measure pushed onto the lattice levels.  Off-grid atoms are split
/// between the two neighbouring levels preserving mass and mean exactly.
class DiscreteMeasure {
public:
  DiscreteMeasure(const Lattice& lat, std::vector<double> weights);

  const std::vector<double>& weights() const { return weights_; }
  double weight(int j) const { return weights_[j]; }
  int num_levels() const { return static_cast<int>(weights_.size()); }

  /// True when all mass sits on the start level.
  bool trivial_embedding(const Lattice& lat) const;

private:
  std::vector<double> weights_;
};

struct ValidationReport {
  double mass = 0.0;
  double mean = 0.0;
  double support_lo = 0.0;
  double support_hi = 0.0;
  double centering_error = 0.0;
  std::vector<std::string> errors;
  bool passed() const { return errors.empty(); }
};

TargetMeasure load_atomic_measure(const std::string& path, double start,
                                  const MeasureOptions& opts = {});
CallQuoteSurface load_call_quotes(const std::string& path, std::string maturity = "");

/// Breeden-Litzenberger inversion: atoms at interior strikes carry the second
/// divided difference of the call curve; tail mass is assigned to the extreme
/// quoted strikes so the measure has unit mass.
TargetMeasure from_call_prices(const CallQuoteSurface& surface, double start,
                               const MeasureOptions& opts = {});

/// Forward price map, the test oracle for the inversion round trip.
std::vector<CallQuote> call_prices_of(const TargetMeasure& mu, const std::vector<double>& strikes);

DiscreteMeasure discretize(const TargetMeasure& mu, const Lattice& lat);

/// Occupation bound per level: the scaled potential difference between the
/// start and the target, divided by the expected one-step displacement.
/// Zero outside the convex hull of the target support.
std::vector<double> potential(const DiscreteMeasure& dm, const Lattice& lat);

ValidationReport validate(const TargetMeasure& mu, ModelKind model);

}  // namespace kcave

#endif
