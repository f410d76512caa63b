#include "kcave/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kcave {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kStrictCenteringTol = 1e-10;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& path, std::size_t line_no) {
  const std::string t = trim(field);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric field '" + field + "'");
  }
  return v;
}

std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path,
                                                           const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!saw_header) {
      std::string compact;
      for (char c : t) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != expected_header) {
        throw ParseError(path + ": expected header '" + expected_header + "', got '" + t + "'");
      }
      saw_header = true;
      continue;
    }
    auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'a,b', got '" + t + "'");
    }
    rows.emplace_back(parse_double(t.substr(0, comma), path, line_no),
                      parse_double(t.substr(comma + 1), path, line_no));
  }
  if (!saw_header) throw ParseError(path + ": missing header '" + expected_header + "'");
  return rows;
}

}  // namespace

TargetMeasure::TargetMeasure(std::vector<Atom> atoms, double start, std::string label,
                             const MeasureOptions& opts)
    : atoms_(std::move(atoms)), start_(start), label_(std::move(label)) {
  if (atoms_.empty()) throw ValidationError("measure has no atoms");
  double mass = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].weight > 0.0)) {
      throw ValidationError("atom " + std::to_string(i) + " has nonpositive weight");
    }
    if (!std::isfinite(atoms_[i].position)) {
      throw ValidationError("atom " + std::to_string(i) + " has non-finite position");
    }
    if (i > 0 && !(atoms_[i].position > atoms_[i - 1].position)) {
      throw ValidationError("positions must be strictly increasing");
    }
    mass += atoms_[i].weight;
  }
  if (std::abs(mass - 1.0) > kMassTol) {
    throw ValidationError("mass " + std::to_string(mass) + " != 1");
  }
  const double m = mean();
  const double err = std::abs(m - start_);
  if (err > kStrictCenteringTol) {
    if (!opts.recenter) {
      throw ValidationError("mean " + std::to_string(m) + " != start " + std::to_string(start_) +
                            " (deviation " + std::to_string(err) + "; recentering is off)");
    }
    const double shift = start_ - m;
    for (auto& a : atoms_) a.position += shift;
    recentered_ = true;
    applied_shift_ = shift;
  }
}

double TargetMeasure::mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

double TargetMeasure::mean() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.position * a.weight;
  return s;
}

bool TargetMeasure::trivial_embedding() const {
  return atoms_.size() == 1 && std::abs(atoms_[0].position - start_) <= kStrictCenteringTol;
}

CallQuoteSurface::CallQuoteSurface(std::vector<CallQuote> quotes, std::string maturity)
    : quotes_(std::move(quotes)), maturity_(std::move(maturity)) {
  if (quotes_.size() < 2) throw ValidationError("need at least two call quotes");
  constexpr double kArbTol = 1e-9;
  for (std::size_t i = 0; i < quotes_.size(); ++i) {
    if (quotes_[i].strike < 0.0) throw ValidationError("strikes must be nonnegative");
    if (quotes_[i].price < -kArbTol) throw ArbitrageError("negative call price");
    if (i > 0) {
      if (!(quotes_[i].strike > quotes_[i - 1].strike)) {
        throw ValidationError("strikes must be strictly increasing");
      }
      if (quotes_[i].price > quotes_[i - 1].price + kArbTol) {
        throw ArbitrageError("call prices increase between strikes " +
                             std::to_string(quotes_[i - 1].strike) + " and " +
                             std::to_string(quotes_[i].strike));
      }
    }
  }
  for (std::size_t i = 1; i + 1 < quotes_.size(); ++i) {
    const double dl = quotes_[i].strike - quotes_[i - 1].strike;
    const double dr = quotes_[i + 1].strike - quotes_[i].strike;
    const double chord = (dr * quotes_[i - 1].price + dl * quotes_[i + 1].price) / (dl + dr);
    if (quotes_[i].price > chord + kArbTol) {
      throw ArbitrageError("convexity violated at strike " + std::to_string(quotes_[i].strike));
    }
  }
}

TargetMeasure load_atomic_measure(const std::string& path, double start,
                                  const MeasureOptions& opts) {
  auto rows = read_two_column_csv(path, "position,weight");
  std::vector<Atom> atoms;
  atoms.reserve(rows.size());
  for (auto [pos, w] : rows) atoms.push_back({pos, w});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  return TargetMeasure(std::move(atoms), start, path, opts);
}

CallQuoteSurface load_call_quotes(const std::string& path, std::string maturity) {
  auto rows = read_two_column_csv(path, "strike,price");
  std::vector<CallQuote> quotes;
  quotes.reserve(rows.size());
  for (auto [k, p] : rows) quotes.push_back({k, p});
  std::sort(quotes.begin(), quotes.end(),
            [](const CallQuote& a, const CallQuote& b) { return a.strike < b.strike; });
  return CallQuoteSurface(std::move(quotes), std::move(maturity));
}

TargetMeasure from_call_prices(const CallQuoteSurface& surface, double start,
                               const MeasureOptions& opts) {
  const auto& q = surface.quotes();
  const std::size_t n = q.size();
  std::vector<double> w(n, 0.0);
  // interior atoms carry the jump in the call curve's slope
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sl = (q[i].price - q[i - 1].price) / (q[i].strike - q[i - 1].strike);
    const double sr = (q[i + 1].price - q[i].price) / (q[i + 1].strike - q[i].strike);
    w[i] = sr - sl;
    if (w[i] < 0.0) w[i] = 0.0;  // |.| below convexity tolerance
  }
  // centering check against the slope-implied tails before pinning them
  {
    const double first_slope = (q[1].price - q[0].price) / (q[1].strike - q[0].strike);
    const double last_slope = (q[n - 1].price - q[n - 2].price) / (q[n - 1].strike - q[n - 2].strike);
    double implied_mean = q[0].strike * (1.0 + first_slope) + q[n - 1].strike * (-last_slope);
    for (std::size_t i = 1; i + 1 < n; ++i) implied_mean += q[i].strike * w[i];
    if (std::abs(implied_mean - start) > opts.centering_tol && !opts.recenter) {
      throw CenteringError("implied mean " + std::to_string(implied_mean) +
                           " deviates from spot " + std::to_string(start) +
                           " beyond tolerance " + std::to_string(opts.centering_tol));
    }
  }
  // tail masses at the extreme strikes pin total mass to 1 and the mean to the spot
  double rest_mass = 1.0, rest_mean = start;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    rest_mass -= w[i];
    rest_mean -= q[i].strike * w[i];
  }
  const double span = q[n - 1].strike - q[0].strike;
  w[n - 1] = (rest_mean - q[0].strike * rest_mass) / span;
  w[0] = rest_mass - w[n - 1];
  if (w[0] < -1e-9 || w[n - 1] < -1e-9 || rest_mass < -1e-9) {
    throw ArbitrageError("quotes are inconsistent with unit mass centred at the spot");
  }
  if (w[0] < 0.0) w[0] = 0.0;
  if (w[n - 1] < 0.0) w[n - 1] = 0.0;

  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) atoms.push_back({q[i].strike, w[i]});
  }
  if (atoms.empty()) throw ValidationError("call curve implies no mass");
  MeasureOptions ctor_opts = opts;
  ctor_opts.recenter = true;  // absorb the clipped-roundoff residue, if any
  return TargetMeasure(std::move(atoms), start, "breeden-litzenberger:" + surface.maturity(),
                       ctor_opts);
}

std::vector<CallQuote> call_prices_of(const TargetMeasure& mu, const std::vector<double>& strikes) {
  std::vector<CallQuote> out;
  out.reserve(strikes.size());
  for (double k : strikes) {
    double c = 0.0;
    for (const auto& a : mu.atoms()) {
      if (a.position > k) c += (a.position - k) * a.weight;
    }
    out.push_back({k, c});
  }
  return out;
}

DiscreteMeasure::DiscreteMeasure(const Lattice& lat, std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (static_cast<int>(weights_.size()) != lat.num_levels()) {
    throw ValidationError("weight vector does not match the lattice");
  }
  double mass = 0.0, mean = 0.0;
  for (int j = 0; j < lat.num_levels(); ++j) {
    if (weights_[j] < 0.0) throw ValidationError("negative lattice weight");
    mass += weights_[j];
    mean += weights_[j] * lat.x(j);
  }
  if (std::abs(mass - 1.0) > kMassTol) {
    throw ValidationError("lattice mass " + std::to_string(mass) + " != 1");
  }
  if (std::abs(mean - lat.start()) > kStrictCenteringTol) {
    throw ValidationError("lattice mean " + std::to_string(mean) + " != start level " +
                          std::to_string(lat.start()));
  }
}

bool DiscreteMeasure::trivial_embedding(const Lattice& lat) const {
  return weights_[lat.j_star()] > 1.0 - kMassTol;
}

DiscreteMeasure discretize(const TargetMeasure& mu, const Lattice& lat) {
  const auto& x = lat.levels();
  std::vector<double> w(x.size(), 0.0);
  for (const auto& a : mu.atoms()) {
    if (a.position < x.front() - 1e-12 || a.position > x.back() + 1e-12) {
      throw CoverageError("atom at " + std::to_string(a.position) + " outside lattice [" +
                          std::to_string(x.front()) + ", " + std::to_string(x.back()) + "]");
    }
    auto it = std::lower_bound(x.begin(), x.end(), a.position);
    int hi = static_cast<int>(it - x.begin());
    if (hi >= static_cast<int>(x.size())) hi = static_cast<int>(x.size()) - 1;
    const double snap = 1e-9 * std::max(1.0, std::abs(a.position));
    if (std::abs(x[hi] - a.position) <= snap) {
      w[hi] += a.weight;
      continue;
    }
    if (hi > 0 && std::abs(x[hi - 1] - a.position) <= snap) {
      w[hi - 1] += a.weight;
      continue;
    }
    // mean-preserving two-point split between the bracketing levels
    const int lo = hi - 1;
    const double theta = (x[hi] - a.position) / (x[hi] - x[lo]);
    w[lo] += a.weight * theta;
    w[hi] += a.weight * (1.0 - theta);
  }
  return DiscreteMeasure(lat, std::move(w));
}

std::vector<double> potential(const DiscreteMeasure& dm, const Lattice& lat) {
  const int n = lat.num_levels();
  std::vector<double> u(n, 0.0);
  for (int j = 1; j + 1 < n; ++j) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      e += std::abs(lat.x(i) - lat.x(j)) * dm.weight(i);
    }
    e -= std::abs(lat.start() - lat.x(j));
    double v = e / lat.kappa(j);
    u[j] = v > 0.0 ? v : 0.0;  // clip roundoff outside the support hull
  }
  return u;
}

ValidationReport validate(const TargetMeasure& mu, ModelKind model) {
  ValidationReport rep;
  rep.mass = mu.mass();
  rep.mean = mu.mean();
  rep.support_lo = mu.min_position();
  rep.support_hi = mu.max_position();
  rep.centering_error = std::abs(rep.mean - mu.start());
  if (std::abs(rep.mass - 1.0) > kMassTol) rep.errors.push_back("mass != 1");
  if (rep.centering_error > kStrictCenteringTol) rep.errors.push_back("centering");
  if (model == ModelKind::Geometric && rep.support_lo <= 0.0) {
    rep.errors.push_back("nonpositive price in support under the geometric model");
  }
  return rep;
}

}  // namespace kcave
