#pragma once

// Classical front end of the K-DSP pipeline: LLL, gap-driven dimension
// reduction, lifting of reduced solutions, and qubit budgets.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/lattice.hpp"

namespace kdsp {

enum class ActionKind { direct, restrict, project, solved };

inline const char *to_string(ActionKind a) {
  switch (a) {
  case ActionKind::direct:
    return "direct";
  case ActionKind::restrict:
    return "restrict";
  case ActionKind::project:
    return "project";
  case ActionKind::solved:
    return "solved";
  }
  return "unknown";
}

/// One reduction step. `level_basis` is the LLL-reduced basis the step was
/// decided on; `k` is the sub-lattice rank requested at that level.
struct ReductionStep {
  ActionKind kind = ActionKind::direct;
  std::optional<std::size_t> p;
  std::size_t k = 0;
  Basis level_basis;
};

struct PreprocessPlan {
  ActionKind action = ActionKind::direct; ///< first step taken
  std::optional<std::size_t> p;           ///< gap index of the first step
  Basis b_p;             ///< working basis, or the stored solution when solved
  std::size_t k_reduced = 0; ///< rank to solve for on b_p
  Rational delta;
  std::vector<ReductionStep> trace; ///< last entry is direct or solved

  bool solved() const { return trace.back().kind == ActionKind::solved; }
};

namespace detail {

// Integer coordinates of w in the lattice spanned by `rows`.
inline IntegerVector coordinates_in(const RationalVector &w, const RationalMatrix &rows) {
  const std::size_t n = rows.size();
  RationalVector rhs(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    rhs[i] = dot(w, rows[i]);
  const RationalMatrix ginv = inverse(gram(Basis(rows)).entries);
  IntegerVector y(n);
  RationalVector back(w.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    Rational yi = 0;
    for (std::size_t j = 0; j < n; ++j)
      yi += ginv[i][j] * rhs[j];
    require(is_integer(yi), ErrorKind::numerical, "solution row is not in the reduced lattice");
    y[i] = yi.get_num();
    add_multiple(back, rows[i], yi);
  }
  require(back == w, ErrorKind::numerical, "solution row is not in the reduced lattice");
  return y;
}

// Undoes the project steps of `trace` (all but its last entry), last first.
inline Basis lift_through(const std::vector<ReductionStep> &trace, const Basis &sub_solution) {
  RationalMatrix cur = sub_solution.rows();
  for (std::size_t s = trace.size() - 1; s-- > 0;) {
    const ReductionStep &step = trace[s];
    if (step.kind != ActionKind::project)
      continue;
    const std::size_t p = *step.p;
    const Basis &level = step.level_basis;
    const Basis tail = projected_basis(level, p);
    RationalMatrix lifted(level.rows().begin(), level.rows().begin() + p);
    for (const auto &w : cur) {
      const IntegerVector y = detail::coordinates_in(w, tail.rows());
      RationalVector pre(level.ambient_dim(), 0);
      for (std::size_t j = 0; j < y.size(); ++j)
        detail::add_multiple(pre, level[p + j], Rational(y[j]));
      RationalMatrix tmp(level.rows().begin(), level.rows().begin() + p);
      tmp.push_back(std::move(pre));
      size_reduce_row(tmp, p);
      lifted.push_back(std::move(tmp.back()));
    }
    cur = std::move(lifted);
  }
  return Basis(std::move(cur));
}

} // namespace detail


inline PreprocessPlan preprocess(const Basis &b_in, std::size_t k,
                                 const Rational &delta = default_delta()) {
  require(k >= 1 && k < b_in.rank(), ErrorKind::config, "k out of range");
  check_delta(delta);

  PreprocessPlan plan;
  plan.delta = delta;
  Basis level = lll_reduce(b_in, delta);
  std::size_t k_cur = k;
  for (;;) {
    const GapReport gap = find_gap(level);
    if (!gap.gap_index) {
      plan.trace.push_back({ActionKind::direct, std::nullopt, k_cur, level});
      plan.b_p = level;
      break;
    }
    const std::size_t p = *gap.gap_index;
    if (k_cur == p) {
      plan.trace.push_back({ActionKind::solved, p, k_cur, level});
      plan.b_p = detail::lift_through(plan.trace, level.prefix(p));
      k_cur = k;
      break;
    }
    if (k_cur < p) {
      plan.trace.push_back({ActionKind::restrict, p, k_cur, level});
      level = lll_reduce(level.prefix(p), delta);
    } else {
      plan.trace.push_back({ActionKind::project, p, k_cur, level});
      level = lll_reduce(projected_basis(level, p), delta);
      k_cur -= p;
    }
  }
  plan.k_reduced = k_cur;
  plan.action = plan.trace.front().kind;
  plan.p = plan.trace.front().p;
  return plan;
}

/// Maps a solution of the reduced instance back to the input lattice. A
/// solved plan already stores the lifted basis, which is returned unchanged.
inline Basis lift_solution(const PreprocessPlan &plan, const Basis &sub_solution) {
  require(sub_solution.rank() == plan.k_reduced &&
              sub_solution.ambient_dim() == plan.b_p.ambient_dim(),
          ErrorKind::config, "sub-solution does not match the reduced instance");
  if (plan.solved())
    return sub_solution;
  return detail::lift_through(plan.trace, sub_solution);
}

// ---------------------------------------------------------------------------
// Qubit budgets

enum class BudgetMode { lll, hkz };

inline const char *to_string(BudgetMode m) { return m == BudgetMode::lll ? "LLL" : "HKZ"; }

struct QubitBudget {
  BudgetMode mode = BudgetMode::lll;
  std::size_t n_dim = 0;
  std::size_t k = 0;
  int bits_per_coordinate = 0; ///< m; each qudit holds m + 1 qubits
  std::size_t total_qubits = 0;
  double coefficient_bound = 0; ///< bound on max |X_ij|
  double alpha = 0;
  /// Closed-form qubit counts derived from the coefficient bounds.
  double closed_form_qubits = 0;
  /// K * log2(prod_i bound) = K N log2(bound), the expression both closed
  /// forms are derived from.
  double log_product_bound = 0;
};

/// Smallest m with 2^m >= bound + 1, i.e. m = ceil(log2(bound + 1)).
inline int bits_for_bound(double bound) {
  int m = 0;
  while (std::ldexp(1.0, m) < bound + 1.0)
    ++m;
  return m;
}

inline QubitBudget qubit_budget(std::size_t n_dim, std::size_t k, BudgetMode mode,
                                const Rational &delta = default_delta()) {
  require(k >= 1 && k < n_dim, ErrorKind::config, "k out of range");
  check_delta(delta);
  const double n = static_cast<double>(n_dim);
  const double kk = static_cast<double>(k);
  QubitBudget b;
  b.mode = mode;
  b.n_dim = n_dim;
  b.k = k;
  b.alpha = lll_alpha(delta);
  if (mode == BudgetMode::lll) {
    b.coefficient_bound = n * std::pow(b.alpha, 3.0 * (n - 1.0) / 4.0);
    const double la = std::log2(b.alpha);
    b.closed_form_qubits =
        (3.0 * kk * n * n / 4.0) * la - (3.0 * kk * n / 4.0) * la + n * std::log2(n);
  } else {
    const double t = (n + 3.0) / 4.0;
    b.coefficient_bound = n * n * n * t * t;
    b.closed_form_qubits = 5.0 * kk * n * std::log2(n);
  }
  b.log_product_bound = kk * n * std::log2(b.coefficient_bound);
  b.bits_per_coordinate = bits_for_bound(b.coefficient_bound);
  b.total_qubits = k * n_dim * static_cast<std::size_t>(b.bits_per_coordinate + 1);
  return b;
}

/// Qubit count for an explicit per-coordinate width m (m + 1 qubits per qudit).
inline std::size_t qubits_for(std::size_t n_dim, std::size_t k, int m) {
  require(m >= 0, ErrorKind::config, "m must be non-negative");
  return k * n_dim * static_cast<std::size_t>(m + 1);
}

} // namespace kdsp
