#include "kcave/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(KCAVE_HAVE_GMPXX)
#include <gmpxx.h>
#endif

namespace kcave {

PivotRule pivot_rule_from_string(const std::string& s) {
  if (s == "bland") return PivotRule::Bland;
  if (s == "dantzig") return PivotRule::Dantzig;
  if (s == "devex") return PivotRule::Devex;
  throw ValidationError("unknown pivot rule '" + s + "' (expected bland|dantzig|devex)");
}

std::string to_string(PivotRule rule) {
  switch (rule) {
    case PivotRule::Bland: return "bland";
    case PivotRule::Dantzig: return "dantzig";
    default: return "devex";
  }
}

namespace {

constexpr double kPivotTol = 1e-11;  // smallest acceptable ratio-test pivot
constexpr double kDegenTol = 1e-13;  // step below this counts as degenerate
constexpr int kStallLimit = 4000;    // degenerate pivots before the Bland fallback kicks in

struct Entry {
  int index;
  double value;
};

/// Sparse LU of a basis matrix, right-looking.  Pivots come from column and
/// row singletons first; for the time-layered bases of these LPs that leaves
/// at most a small bump, which falls back to a Markowitz-style scan with
/// threshold pivoting.  Columns hold the authoritative values; the row index
/// only stores candidate columns (append-only, verified on use) so the two
/// orientations can never disagree.
class BasisLU {
public:
  void factor(int m, std::vector<std::vector<Entry>> wcols) {
    m_ = m;
    lcol_.assign(m, {});
    urow_.assign(m, {});
    diag_.assign(m, 0.0);
    prow_.assign(m, -1);
    pcol_.assign(m, -1);

    std::vector<std::vector<int>> rowcand(m);
    std::vector<int> col_count(m, 0), row_count(m, 0);
    std::vector<char> row_done(m, 0), col_done(m, 0);
    std::vector<std::int64_t> stamp(m, -1);
    std::int64_t scan_id = 0;

    for (int c = 0; c < m; ++c) {
      col_count[c] = static_cast<int>(wcols[c].size());
      for (const auto& e : wcols[c]) {
        rowcand[e.index].push_back(c);
        ++row_count[e.index];
      }
    }

    auto compact_col = [&](int c) {
      auto& v = wcols[c];
      std::size_t k = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!row_done[v[i].index] && v[i].value != 0.0) v[k++] = v[i];
      }
      v.resize(k);
      col_count[c] = static_cast<int>(k);
    };
    auto value_at = [&](int c, int r) -> double {
      for (const auto& e : wcols[c]) {
        if (e.index == r) return e.value;
      }
      return 0.0;
    };

    std::vector<int> scol, srow;
    for (int c = 0; c < m; ++c) {
      if (col_count[c] <= 1) scol.push_back(c);
    }
    for (int r = 0; r < m; ++r) {
      if (row_count[r] <= 1) srow.push_back(r);
    }

    for (int step = 0; step < m; ++step) {
      int r = -1, c = -1;
      // column singleton?
      while (!scol.empty()) {
        int cand = scol.back();
        scol.pop_back();
        if (col_done[cand]) continue;
        compact_col(cand);
        if (col_count[cand] == 0) throw UnboundedError("structurally singular basis");
        if (col_count[cand] == 1) {
          c = cand;
          r = wcols[cand][0].index;
          break;
        }
      }
      // row singleton?
      if (c < 0) {
        while (!srow.empty()) {
          int cand = srow.back();
          srow.pop_back();
          if (row_done[cand]) continue;
          int found_c = -1, live = 0;
          ++scan_id;
          for (int cc : rowcand[cand]) {
            if (col_done[cc] || stamp[cc] == scan_id) continue;
            stamp[cc] = scan_id;
            if (value_at(cc, cand) != 0.0) {
              ++live;
              found_c = cc;
              if (live > 1) break;
            }
          }
          row_count[cand] = live;
          if (live == 0) throw UnboundedError("structurally singular basis");
          if (live == 1) {
            r = cand;
            c = found_c;
            break;
          }
        }
      }
      // bump
      if (c < 0) {
        double best_score = std::numeric_limits<double>::infinity();
        double best_mag = 0.0;
        for (int cc = 0; cc < m; ++cc) {
          if (col_done[cc]) continue;
          compact_col(cc);
          if (col_count[cc] == 0) throw UnboundedError("structurally singular basis");
          double cmax = 0.0;
          for (const auto& e : wcols[cc]) cmax = std::max(cmax, std::abs(e.value));
          for (const auto& e : wcols[cc]) {
            const double mag = std::abs(e.value);
            if (mag < 0.01 * cmax) continue;
            const double score = static_cast<double>(col_count[cc] - 1) *
                                 static_cast<double>(std::max(0, row_count[e.index] - 1));
            if (score < best_score - 0.5 || (std::abs(score - best_score) <= 0.5 && mag > best_mag)) {
              best_score = score;
              best_mag = mag;
              c = cc;
              r = e.index;
            }
          }
        }
        if (c < 0) throw UnboundedError("singular basis (no pivot found)");
      }

      // eliminate on (r, c)
      compact_col(c);
      const double piv = value_at(c, r);
      if (piv == 0.0 || !std::isfinite(piv)) throw UnboundedError("zero pivot in basis");
      diag_[step] = piv;
      prow_[step] = r;
      pcol_[step] = c;
      auto& L = lcol_[step];
      for (const auto& e : wcols[c]) {
        if (e.index != r) L.push_back({e.index, e.value / piv});
      }
      auto& U = urow_[step];
      ++scan_id;
      for (int cc : rowcand[r]) {
        if (col_done[cc] || cc == c || stamp[cc] == scan_id) continue;
        stamp[cc] = scan_id;
        const double v = value_at(cc, r);
        if (v != 0.0) U.push_back({cc, v});
      }
      row_done[r] = 1;
      col_done[c] = 1;
      for (const auto& le : L) --row_count[le.index];

      // rank-one update of the active submatrix
      for (const auto& ue : U) {
        const int uc = ue.index;
        compact_col(uc);
        if (L.empty()) continue;
        auto& target = wcols[uc];
        for (const auto& le : L) {
          const double delta = le.value * ue.value;
          bool found = false;
          for (auto& e : target) {
            if (e.index == le.index) {
              e.value -= delta;
              found = true;
              break;
            }
          }
          if (!found) {
            target.push_back({le.index, -delta});
            rowcand[le.index].push_back(uc);
            ++row_count[le.index];
            ++col_count[uc];
          }
        }
      }

      // queue any fresh singletons
      for (const auto& ue : U) {
        compact_col(ue.index);
        if (col_count[ue.index] <= 1) scol.push_back(ue.index);
      }
      for (const auto& le : L) {
        if (row_count[le.index] <= 1) srow.push_back(le.index);
      }
    }
  }

  /// Solve B z = a; `work` is the dense right-hand side (destroyed),
  /// `out` is indexed by basis position (the LU's column ids).
  void ftran(std::vector<double>& work, std::vector<double>& out) const {
    for (int k = 0; k < m_; ++k) {
      const double s = work[prow_[k]];
      if (s != 0.0) {
        for (const auto& e : lcol_[k]) work[e.index] -= e.value * s;
      }
    }
    out.assign(m_, 0.0);
    for (int k = m_ - 1; k >= 0; --k) {
      double s = work[prow_[k]];
      for (const auto& e : urow_[k]) s -= e.value * out[e.index];
      out[pcol_[k]] = s / diag_[k];
    }
  }

  /// Solve B' y = cb; `work` indexed by basis position (destroyed), `y` by row.
  void btran(std::vector<double>& work, std::vector<double>& y) const {
    std::vector<double> v(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      const double s = work[pcol_[k]] / diag_[k];
      v[k] = s;
      if (s != 0.0) {
        for (const auto& e : urow_[k]) work[e.index] -= e.value * s;
      }
    }
    y.assign(m_, 0.0);
    for (int k = m_ - 1; k >= 0; --k) {
      double s = v[k];
      for (const auto& e : lcol_[k]) s -= e.value * y[e.index];
      y[prow_[k]] = s;
    }
  }

private:
  int m_ = 0;
  std::vector<std::vector<Entry>> lcol_;  // multipliers, row-indexed
  std::vector<std::vector<Entry>> urow_;  // U entries, column-indexed
  std::vector<double> diag_;
  std::vector<int> prow_, pcol_;
};

class RevisedSimplex {
public:
  RevisedSimplex(const StandardLP& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {}
  SimplexResult run();

private:
  int m() const { return lp_.m; }
  int n() const { return lp_.n; }
  int total_cols() const { return lp_.n + lp_.m; }

  template <typename F>
  void for_col(int j, F&& f) const {  // column j of [A | I]
    if (j < n()) {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        f(lp_.row_index[k], lp_.values[k]);
      }
    } else {
      f(j - n(), 1.0);
    }
  }
  double cost_of(int j) const { return j < n() ? lp_.c[j] : 0.0; }

  struct Eta {
    int q;
    double wq;
    std::vector<Entry> w;  // entries != q
  };

  void apply_etas_transposed(std::vector<double>& cb) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dot = 0.0;
      for (const auto& e : it->w) dot += e.value * cb[e.index];
      cb[it->q] = (cb[it->q] - dot) / it->wq;
    }
  }

  void refactor();
  void ftran(int col, std::vector<double>& out);
  void compute_duals(std::vector<double>& y);
  void btran_unit(int pos, std::vector<double>& rho);
  int price(const std::vector<double>& y, bool bland, double* best_d);
  void exact_certificate(SimplexResult& res);

  const StandardLP& lp_;
  SimplexOptions opts_;
  std::vector<int> basis_;
  std::vector<int> pos_in_basis_;
  std::vector<double> xb_;
  BasisLU lu_;
  std::vector<Eta> etas_;
  std::vector<double> devex_;
  std::int64_t iterations_ = 0;
  int refactorizations_ = 0;
  std::int64_t degenerate_ = 0;
  bool bland_fallback_ = false;
};

void RevisedSimplex::refactor() {
  std::vector<std::vector<Entry>> cols(m());
  for (int i = 0; i < m(); ++i) {
    for_col(basis_[i], [&](int r, double v) { cols[i].push_back({r, v}); });
  }
  lu_.factor(m(), std::move(cols));
  etas_.clear();
  ++refactorizations_;

  std::vector<double> work = lp_.b;
  lu_.ftran(work, xb_);
  // one iterative-refinement pass on the basic values
  std::vector<double> resid = lp_.b;
  for (int i = 0; i < m(); ++i) {
    if (xb_[i] != 0.0) {
      for_col(basis_[i], [&](int r, double v) { resid[r] -= v * xb_[i]; });
    }
  }
  double rmax = 0.0;
  for (double v : resid) rmax = std::max(rmax, std::abs(v));
  if (rmax > 1e-15) {
    std::vector<double> corr;
    lu_.ftran(resid, corr);
    for (int i = 0; i < m(); ++i) xb_[i] += corr[i];
  }
}

void RevisedSimplex::ftran(int col, std::vector<double>& out) {
  std::vector<double> work(m(), 0.0);
  for_col(col, [&](int r, double v) { work[r] += v; });
  lu_.ftran(work, out);
  for (const auto& eta : etas_) {
    const double t = out[eta.q] / eta.wq;
    out[eta.q] = t;
    if (t != 0.0) {
      for (const auto& e : eta.w) out[e.index] -= e.value * t;
    }
  }
}

void RevisedSimplex::compute_duals(std::vector<double>& y) {
  std::vector<double> cb(m());
  for (int i = 0; i < m(); ++i) cb[i] = cost_of(basis_[i]);
  apply_etas_transposed(cb);
  lu_.btran(cb, y);
}

void RevisedSimplex::btran_unit(int pos, std::vector<double>& rho) {
  std::vector<double> cb(m(), 0.0);
  cb[pos] = 1.0;
  apply_etas_transposed(cb);
  lu_.btran(cb, rho);
}

int RevisedSimplex::price(const std::vector<double>& y, bool bland, double* best_d) {
  int best_col = -1;
  double best_score = 0.0;
  *best_d = 0.0;
  const int tc = total_cols();
  for (int j = 0; j < tc; ++j) {
    if (pos_in_basis_[j] >= 0) continue;
    double d = cost_of(j);
    for_col(j, [&](int r, double v) { d -= y[r] * v; });
    if (d <= opts_.tol) continue;
    if (bland) {
      *best_d = d;
      return j;
    }
    const double score = opts_.pivot == PivotRule::Devex ? d * d / devex_[j] : d;
    if (best_col < 0 || score > best_score) {
      best_col = j;
      best_score = score;
      *best_d = d;
    }
  }
  return best_col;
}

SimplexResult RevisedSimplex::run() {
  for (double v : lp_.b) {
    if (v < 0.0) {
      throw InfeasibleError("negative row capacity: the target is not embeddable on this grid");
    }
  }
  basis_.resize(m());
  pos_in_basis_.assign(total_cols(), -1);
  for (int i = 0; i < m(); ++i) {
    basis_[i] = n() + i;
    pos_in_basis_[n() + i] = i;
  }
  if (opts_.pivot == PivotRule::Devex) devex_.assign(total_cols(), 1.0);
  refactor();

  const std::int64_t max_iter =
      opts_.max_iterations > 0 ? opts_.max_iterations
                               : 200'000 + 60LL * (static_cast<std::int64_t>(m()) + n());
  bool bland_now = opts_.pivot == PivotRule::Bland;
  int stall = 0;

  std::vector<double> y, w, rho;
  while (true) {
    if (iterations_ >= max_iter) {
      throw MaxIterationsError("simplex exceeded " + std::to_string(max_iter) + " iterations");
    }
    compute_duals(y);
    double d_enter = 0.0;
    int enter = price(y, bland_now, &d_enter);
    if (enter < 0) {
      if (!etas_.empty()) {  // confirm optimality on a fresh factorisation
        refactor();
        compute_duals(y);
        enter = price(y, bland_now, &d_enter);
        if (enter < 0) break;
      } else {
        break;
      }
    }
    ftran(enter, w);

    double theta = std::numeric_limits<double>::infinity();
    int leave_pos = -1;
    for (int i = 0; i < m(); ++i) {
      if (w[i] > kPivotTol) {
        const double xi = xb_[i] > 0.0 ? xb_[i] : 0.0;
        const double t = xi / w[i];
        if (leave_pos < 0 || t < theta - 1e-12 * (1.0 + theta)) {
          theta = t;
          leave_pos = i;
        } else if (t <= theta + 1e-12 * (1.0 + theta)) {
          if (bland_now) {
            if (basis_[i] < basis_[leave_pos]) leave_pos = i;
          } else if (std::abs(w[i]) > std::abs(w[leave_pos])) {
            leave_pos = i;
          }
        }
      }
    }
    if (leave_pos < 0) {
      throw UnboundedError("objective unbounded: occupation caps missing from the LP");
    }

    if (opts_.pivot == PivotRule::Devex) {
      btran_unit(leave_pos, rho);
      const double ref = std::max(devex_[enter], 1e-12);
      const double wq = w[leave_pos];
      const int tc = total_cols();
      for (int j2 = 0; j2 < tc; ++j2) {
        if (pos_in_basis_[j2] >= 0 || j2 == enter) continue;
        double alpha = 0.0;
        for_col(j2, [&](int r, double v) { alpha += rho[r] * v; });
        if (alpha != 0.0) {
          const double cand = (alpha / wq) * (alpha / wq) * ref;
          if (cand > devex_[j2]) devex_[j2] = cand;
        }
      }
      devex_[basis_[leave_pos]] = std::max(1.0, ref / (wq * wq));
    }

    const int leave_col = basis_[leave_pos];
    if (theta > kDegenTol) {
      for (int i = 0; i < m(); ++i) xb_[i] -= theta * w[i];
      stall = 0;
      if (bland_now && opts_.pivot != PivotRule::Bland) bland_now = false;
    } else {
      theta = 0.0;
      ++degenerate_;
      if (!bland_now && ++stall > kStallLimit) {
        bland_now = true;
        bland_fallback_ = true;
      }
    }
    xb_[leave_pos] = theta;
    basis_[leave_pos] = enter;
    pos_in_basis_[enter] = leave_pos;
    pos_in_basis_[leave_col] = -1;

    Eta eta;
    eta.q = leave_pos;
    eta.wq = w[leave_pos];
    for (int i = 0; i < m(); ++i) {
      if (i != leave_pos && w[i] != 0.0) eta.w.push_back({i, w[i]});
    }
    etas_.push_back(std::move(eta));
    if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) refactor();
    ++iterations_;
  }

  refactor();
  SimplexResult res;
  res.x.assign(n(), 0.0);
  for (int i = 0; i < m(); ++i) {
    if (basis_[i] < n()) res.x[basis_[i]] = std::max(0.0, xb_[i]);
  }
  compute_duals(res.y);
  res.reduced.assign(n(), 0.0);
  for (int j = 0; j < n(); ++j) {
    double d = lp_.c[j];
    for_col(j, [&](int r, double v) { d -= res.y[r] * v; });
    res.reduced[j] = d;
  }
  res.objective = 0.0;
  for (int j = 0; j < n(); ++j) res.objective += lp_.c[j] * res.x[j];
  res.dual_objective = 0.0;
  for (int r = 0; r < m(); ++r) res.dual_objective += res.y[r] * lp_.b[r];
  res.iterations = iterations_;
  res.refactorizations = refactorizations_;
  res.degenerate_pivots = degenerate_;
  res.bland_fallback_used = bland_fallback_;
  if (opts_.exact_certificate && m() <= static_cast<int>(opts_.exact_certificate_max_dim)) {
    exact_certificate(res);
  }
  return res;
}

void RevisedSimplex::exact_certificate(SimplexResult& res) {
#if defined(KCAVE_HAVE_GMPXX)
  res.exact_attempted = true;
  const int mm = m();
  std::vector<std::vector<mpq_class>> B(mm, std::vector<mpq_class>(mm, 0));
  for (int i = 0; i < mm; ++i) {
    for_col(basis_[i], [&](int r, double v) { B[r][i] = mpq_class(v); });
  }

  auto solve_dense = [&](std::vector<std::vector<mpq_class>> M,
                         std::vector<mpq_class> rhs) -> std::vector<mpq_class> {
    const int k_n = static_cast<int>(rhs.size());
    for (int k = 0; k < k_n; ++k) {
      int piv = -1;
      for (int r = k; r < k_n; ++r) {
        if (M[r][k] != 0) {
          piv = r;
          break;
        }
      }
      if (piv < 0) throw UnboundedError("singular basis in exact verification");
      std::swap(M[k], M[piv]);
      std::swap(rhs[k], rhs[piv]);
      for (int r = k + 1; r < k_n; ++r) {
        if (M[r][k] == 0) continue;
        mpq_class f = M[r][k] / M[k][k];
        for (int c2 = k; c2 < k_n; ++c2) M[r][c2] -= f * M[k][c2];
        rhs[r] -= f * rhs[k];
      }
    }
    for (int k = k_n - 1; k >= 0; --k) {
      for (int c2 = k + 1; c2 < k_n; ++c2) rhs[k] -= M[k][c2] * rhs[c2];
      rhs[k] /= M[k][k];
    }
    return rhs;
  };

  std::vector<mpq_class> rhs(mm), cb(mm);
  for (int r = 0; r < mm; ++r) rhs[r] = mpq_class(lp_.b[r]);
  for (int i = 0; i < mm; ++i) cb[i] = mpq_class(cost_of(basis_[i]));
  std::vector<mpq_class> xb = solve_dense(B, rhs);
  std::vector<std::vector<mpq_class>> Bt(mm, std::vector<mpq_class>(mm, 0));
  for (int r = 0; r < mm; ++r) {
    for (int c2 = 0; c2 < mm; ++c2) Bt[r][c2] = B[c2][r];
  }
  std::vector<mpq_class> yq = solve_dense(Bt, cb);

  mpq_class worst = 0;
  for (int i = 0; i < mm; ++i) {
    if (-xb[i] > worst) worst = -xb[i];
  }
  for (int r = 0; r < mm; ++r) {
    if (-yq[r] > worst) worst = -yq[r];
  }
  for (int j = 0; j < total_cols(); ++j) {
    if (pos_in_basis_[j] >= 0) continue;
    mpq_class d = mpq_class(cost_of(j));
    for_col(j, [&](int r, double v) { d -= yq[static_cast<std::size_t>(r)] * mpq_class(v); });
    if (d > worst) worst = d;
  }
  res.exact_max_violation = worst.get_d();
  res.exact_certified = worst <= mpq_class(opts_.tol);
#else
  (void)res;
  res.exact_attempted = false;
#endif
}

}  // namespace

SimplexResult solve_standard(const StandardLP& lp, const SimplexOptions& opts) {
  RevisedSimplex solver(lp, opts);
  return solver.run();
}

}  // namespace kcave
