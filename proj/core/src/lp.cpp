#include "kcave/lp.hpp"

#include <cmath>
#include <sstream>

namespace kcave {

namespace {
constexpr int kFreeUnnumbered = -2;
}

LPInstance assemble(const Lattice& lat, const std::vector<double>& potential_bound,
                    std::int64_t t_max, std::size_t max_nonzeros) {
  if (t_max < 0) t_max = lat.t_max();
  if (static_cast<int>(potential_bound.size()) != lat.num_levels()) {
    throw ValidationError("potential array does not match the lattice");
  }

  LPInstance lp;
  const int ni = lat.num_interior();
  const int js = lat.j_star();
  const double u = lat.up_prob(), d = lat.down_prob();
  lp.num_interior_ = ni;
  lp.t_max_ = t_max;

  const std::size_t n_logical = static_cast<std::size_t>(ni) * static_cast<std::size_t>(t_max);
  lp.col_j_.resize(n_logical);
  lp.col_t_.resize(n_logical);
  lp.c_.assign(n_logical, 0.0);
  lp.solver_col_.assign(n_logical, -1);

  auto is_free = [&](int j, std::int64_t t) {
    if (!lat.is_interior(j)) return false;
    if (t < 1 || t >= t_max) return false;  // T_max column is forced absorbing
    if (!lat.reachable(j, t)) return false;
    if (t == 1 && j != js - 1 && j != js + 1) return false;  // p_{j,1} = 0 away from the start
    return true;
  };

  // logical column layout: (t - 1) * ni + (j - 1)
  for (std::int64_t t = 1; t <= t_max; ++t) {
    for (int j = 1; j <= ni; ++j) {
      const std::size_t c = static_cast<std::size_t>((t - 1) * ni + (j - 1));
      lp.col_j_[c] = j;
      lp.col_t_[c] = t;
      lp.c_[c] = u * lat.payoff(j + 1, t + 1) + d * lat.payoff(j - 1, t + 1) - lat.payoff(j, t);
      if (is_free(j, t)) {
        lp.solver_col_[c] = kFreeUnnumbered;
      }
    }
  }
  lp.c0_ = u * lat.payoff(js + 1, 1) + d * lat.payoff(js - 1, 1);

  // rows: occupation per interior level, then initial/dynamics per free column
  for (int j = 1; j <= ni; ++j) {
    lp.row_tags_.push_back({RowKind::Occupation, j, -1});
    double cap = potential_bound[j] - (j == js ? 1.0 : 0.0);
    lp.b_.push_back(cap);
  }
  std::vector<int> dyn_row(n_logical, -1);
  for (std::int64_t t = 1; t <= t_max; ++t) {
    for (int j = 1; j <= ni; ++j) {
      const std::size_t c = static_cast<std::size_t>((t - 1) * ni + (j - 1));
      if (lp.solver_col_[c] != kFreeUnnumbered) continue;
      dyn_row[c] = static_cast<int>(lp.row_tags_.size());
      if (t == 1) {
        lp.row_tags_.push_back({RowKind::Initial, j, 1});
        lp.b_.push_back(j == js + 1 ? u : d);
      } else {
        lp.row_tags_.push_back({RowKind::Dynamics, j, t});
        lp.b_.push_back(0.0);
      }
    }
  }

  // CSC assembly, columns in (t, j) order
  lp.col_start_.push_back(0);
  for (std::int64_t t = 1; t <= t_max; ++t) {
    for (int j = 1; j <= ni; ++j) {
      const std::size_t c = static_cast<std::size_t>((t - 1) * ni + (j - 1));
      if (lp.solver_col_[c] != kFreeUnnumbered) continue;
      lp.solver_col_[c] = static_cast<int>(lp.free_cols_.size());
      lp.free_cols_.push_back(static_cast<int>(c));
      lp.solver_cost_.push_back(lp.c_[c]);

      // occupation row of this level
      lp.row_index_.push_back(lp.occupation_row(j));
      lp.values_.push_back(1.0);
      // own dynamics / initial row
      lp.row_index_.push_back(dyn_row[c]);
      lp.values_.push_back(1.0);
      // children's dynamics rows at t+1 (coefficient -kernel out of (j,t))
      if (t + 1 < t_max) {
        if (j + 1 <= ni) {
          const std::size_t up = static_cast<std::size_t>(t * ni + j);
          if (dyn_row[up] >= 0) {
            lp.row_index_.push_back(dyn_row[up]);
            lp.values_.push_back(-u);
          }
        }
        if (j - 1 >= 1) {
          const std::size_t dn = static_cast<std::size_t>(t * ni + (j - 2));
          if (dyn_row[dn] >= 0) {
            lp.row_index_.push_back(dyn_row[dn]);
            lp.values_.push_back(-d);
          }
        }
      }
      lp.col_start_.push_back(static_cast<int>(lp.row_index_.size()));
      if (lp.values_.size() > max_nonzeros) {
        throw SizeError("LP exceeds " + std::to_string(max_nonzeros) + " nonzeros; reduce N");
      }
    }
  }
  lp.num_free_cols_ = static_cast<int>(lp.free_cols_.size());
  return lp;
}

std::string LPInstance::to_mps(const std::string& name) const {
  std::ostringstream os;
  os.precision(17);
  auto row_name = [&](int r) {
    const RowTag& tag = row_tags_[r];
    switch (tag.kind) {
      case RowKind::Occupation: return "OCC_" + std::to_string(tag.j);
      case RowKind::Initial: return "INI_" + std::to_string(tag.j);
      default: return "DYN_" + std::to_string(tag.j) + "_" + std::to_string(tag.t);
    }
  };
  auto col_name = [&](int logical) {
    return "P_" + std::to_string(col_j_[logical]) + "_" + std::to_string(col_t_[logical]);
  };
  os << "* sense: maximize; objective constant " << c0_ << "\n";
  os << "NAME          " << name << "\n";
  os << "ROWS\n N  OBJ\n";
  for (int r = 0; r < num_rows(); ++r) os << " L  " << row_name(r) << "\n";
  os << "COLUMNS\n";
  for (int sc = 0; sc < num_free_cols_; ++sc) {
    const int logical = free_cols_[sc];
    const std::string cn = col_name(logical);
    if (solver_cost_[sc] != 0.0) os << "    " << cn << "  OBJ  " << solver_cost_[sc] << "\n";
    for (int k = col_start_[sc]; k < col_start_[sc + 1]; ++k) {
      os << "    " << cn << "  " << row_name(row_index_[k]) << "  " << values_[k] << "\n";
    }
  }
  os << "RHS\n";
  for (int r = 0; r < num_rows(); ++r) {
    if (b_[r] != 0.0) os << "    RHS  " << row_name(r) << "  " << b_[r] << "\n";
  }
  os << "BOUNDS\nENDATA\n";
  return os.str();
}

}  // namespace kcave
