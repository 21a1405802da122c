#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "incalign/errors.hpp"

namespace incalign::lp {

using Rational = mpq_class;

enum class Relation : std::uint8_t { equal, greater_equal, less_equal };

struct Term {
  std::size_t variable;
  std::int64_t coefficient;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::equal;
  std::int64_t rhs = 0;
};

// minimize objective . x  subject to constraints, x >= 0. Integer data, exact solution.
struct LinearProgram {
  std::size_t variable_count = 0;
  std::vector<std::int64_t> objective;
  std::vector<Constraint> constraints;
};

enum class Status : std::uint8_t { optimal, infeasible };

struct Solution {
  Status status = Status::infeasible;
  Rational objective;
  std::vector<Rational> values;
  std::size_t relaxations = 0;  // LPs solved to produce this result
};

inline Rational floor(const Rational& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(f);
}

inline Rational ceil(const Rational& q) {
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(c);
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

namespace detail {

// Dense two-phase tableau simplex. Entering column: most negative reduced cost, falling
// back to Bland's rule after a run of degenerate pivots. Leaving row: minimum ratio,
// ties broken by smallest basic column index.
class Tableau {
 public:
  explicit Tableau(const LinearProgram& lp) : n_(lp.variable_count) {
    if (lp.objective.size() != n_) throw SolverError("objective size does not match variable count");
    struct Row {
      std::vector<std::int64_t> coeffs;
      Relation rel;
      std::int64_t rhs;
    };
    std::vector<Row> rows;
    std::size_t slack_count = 0, artificial_count = 0;
    for (const auto& c : lp.constraints) {
      Row r{std::vector<std::int64_t>(n_, 0), c.relation, c.rhs};
      for (const auto& t : c.terms) {
        if (t.variable >= n_) throw SolverError("constraint references unknown variable");
        r.coeffs[t.variable] += t.coefficient;
      }
      if (r.rhs < 0 || (r.rhs == 0 && r.rel == Relation::greater_equal)) {
        for (auto& v : r.coeffs) v = -v;
        r.rhs = -r.rhs;
        if (r.rel == Relation::greater_equal)
          r.rel = Relation::less_equal;
        else if (r.rel == Relation::less_equal)
          r.rel = Relation::greater_equal;
      }
      if (r.rel != Relation::equal) ++slack_count;
      if (r.rel != Relation::less_equal) ++artificial_count;
      rows.push_back(std::move(r));
    }
    first_artificial_ = n_ + slack_count;
    cols_ = first_artificial_ + artificial_count;
    m_ = rows.size();
    a_.assign(m_, std::vector<Rational>(cols_ + 1));
    basis_.assign(m_, 0);
    std::size_t slack = n_, art = first_artificial_;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j)
        if (rows[i].coeffs[j] != 0) a_[i][j] = static_cast<long>(rows[i].coeffs[j]);
      a_[i][cols_] = static_cast<long>(rows[i].rhs);
      switch (rows[i].rel) {
        case Relation::less_equal:
          a_[i][slack] = 1;
          basis_[i] = slack++;
          break;
        case Relation::greater_equal:
          a_[i][slack++] = -1;
          a_[i][art] = 1;
          basis_[i] = art++;
          break;
        case Relation::equal:
          a_[i][art] = 1;
          basis_[i] = art++;
          break;
      }
    }
  }

  Solution solve(const std::vector<std::int64_t>& objective) {
    Solution sol;
    sol.relaxations = 1;
    if (cols_ > first_artificial_) {
      obj_.assign(cols_ + 1, Rational(0));
      for (std::size_t j = first_artificial_; j < cols_; ++j) obj_[j] = 1;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= first_artificial_)
          for (std::size_t j = 0; j <= cols_; ++j)
            if (sgn(a_[i][j]) != 0) obj_[j] -= a_[i][j];
      iterate(cols_);
      if (sgn(obj_[cols_]) != 0) return sol;  // phase-1 optimum > 0
      drive_out_artificials();
    }
    obj_.assign(cols_ + 1, Rational(0));
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = static_cast<long>(objective[j]);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= n_ || objective[basis_[i]] == 0) continue;
      Rational cb = static_cast<long>(objective[basis_[i]]);
      for (std::size_t j = 0; j <= cols_; ++j)
        if (sgn(a_[i][j]) != 0) obj_[j] -= cb * a_[i][j];
    }
    iterate(first_artificial_);
    sol.status = Status::optimal;
    sol.objective = -obj_[cols_];
    sol.values.assign(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.values[basis_[i]] = a_[i][cols_];
    return sol;
  }

 private:
  // Pivots until no column below `allowed` has a negative reduced cost.
  void iterate(std::size_t allowed) {
    bool bland = false;
    std::size_t degenerate_run = 0;
    while (true) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (sgn(obj_[j]) >= 0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (enter == allowed || obj_[j] < obj_[enter]) enter = j;
      }
      if (enter == allowed) return;
      std::size_t leave = m_;
      Rational best_ratio;
      for (std::size_t i = 0; i < m_; ++i) {
        if (sgn(a_[i][enter]) <= 0) continue;
        Rational ratio = a_[i][cols_] / a_[i][enter];
        if (leave == m_ || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m_) throw SolverError("linear program is unbounded");
      if (sgn(best_ratio) == 0) {
        if (++degenerate_run > 32) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& prow = a_[r];
    Rational inv = 1 / prow[c];
    nz_.clear();
    for (std::size_t j = 0; j <= cols_; ++j)
      if (sgn(prow[j]) != 0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    auto eliminate = [&](std::vector<Rational>& row) {
      if (sgn(row[c]) == 0) return;
      factor_ = row[c];
      for (auto j : nz_) {
        tmp_ = factor_ * prow[j];
        row[j] -= tmp_;
      }
    };
    for (std::size_t i = 0; i < m_; ++i)
      if (i != r) eliminate(a_[i]);
    eliminate(obj_);
    basis_[r] = c;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < first_artificial_) {
        ++i;
        continue;
      }
      std::size_t col = first_artificial_;
      for (std::size_t j = 0; j < first_artificial_; ++j)
        if (sgn(a_[i][j]) != 0) {
          col = j;
          break;
        }
      if (col < first_artificial_) {
        pivot(i, col);
        ++i;
      } else {
        // Redundant equality row.
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        --m_;
      }
    }
  }

  std::size_t n_;
  std::size_t m_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_artificial_ = 0;
  std::vector<std::vector<Rational>> a_;  // rows with rhs in the last column
  std::vector<Rational> obj_;             // reduced costs; last entry is -objective
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
  Rational factor_, tmp_;
};

}  // namespace detail

inline Solution solve_lp(const LinearProgram& lp) {
  detail::Tableau tableau(lp);
  return tableau.solve(lp.objective);
}

// Best-bound branch-and-bound on the first fractional variable. Integer objective
// coefficients make every integral optimum an integer, which tightens pruning.
inline Solution solve_ilp(const LinearProgram& lp) {
  const std::size_t depth_limit = 10 * std::max<std::size_t>(lp.variable_count, 1);
  struct Node {
    Rational bound;
    std::size_t order;
    std::size_t depth;
    std::vector<Constraint> bounds;
    std::vector<Rational> values;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.order > b.order;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);
  std::size_t relaxations = 0, order = 0;

  auto relax = [&](const std::vector<Constraint>& extra) {
    LinearProgram sub = lp;
    sub.constraints.insert(sub.constraints.end(), extra.begin(), extra.end());
    ++relaxations;
    return solve_lp(sub);
  };

  Solution best;
  auto root = relax({});
  if (root.status == Status::infeasible) {
    best.relaxations = relaxations;
    return best;
  }
  queue.push(Node{root.objective, order++, 0, {}, std::move(root.values)});
  while (!queue.empty()) {
    Node node = queue.top();
    queue.pop();
    if (best.status == Status::optimal && ceil(node.bound) >= best.objective) break;
    auto frac = std::find_if(node.values.begin(), node.values.end(), [](const Rational& v) { return !is_integral(v); });
    if (frac == node.values.end()) {
      if (best.status != Status::optimal || node.bound < best.objective) {
        best.status = Status::optimal;
        best.objective = node.bound;
        best.values = node.values;
      }
      continue;
    }
    if (node.depth + 1 > depth_limit) throw SolverError("branch-and-bound depth limit exhausted");
    const auto var = static_cast<std::size_t>(frac - node.values.begin());
    const long down = floor(*frac).get_num().get_si();
    for (int side = 0; side < 2; ++side) {
      auto bounds = node.bounds;
      bounds.push_back(side == 0 ? Constraint{{{var, 1}}, Relation::less_equal, down}
                                 : Constraint{{{var, 1}}, Relation::greater_equal, down + 1});
      auto child = relax(bounds);
      if (child.status == Status::infeasible) continue;
      if (best.status == Status::optimal && ceil(child.objective) >= best.objective) continue;
      queue.push(Node{child.objective, order++, node.depth + 1, std::move(bounds), std::move(child.values)});
    }
  }
  best.relaxations = relaxations;
  return best;
}

}  // namespace incalign::lp
