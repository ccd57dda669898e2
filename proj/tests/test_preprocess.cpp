#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kdsp/kdsp.hpp"
#include "oracles.hpp"

using namespace kdsp;

namespace {

const Basis example = Basis::from_integers({{1, -1, 0}, {0, 1, -1}, {0, 0, 1}});

Basis from(const oracle::IMat &m) {
  std::vector<std::vector<long>> rows(m.begin(), m.end());
  return Basis::from_integers(rows);
}

oracle::IMat to_int(const Basis &b) {
  oracle::IMat out;
  for (const auto &r : b.rows()) {
    std::vector<long> row;
    for (const auto &q : r) {
      EXPECT_TRUE(is_integer(q));
      row.push_back(q.get_num().get_si());
    }
    out.push_back(row);
  }
  return out;
}

void expect_reduced_and_gap_free(const PreprocessPlan &plan) {
  if (plan.solved())
    return;
  EXPECT_TRUE(is_lll_reduced(plan.b_p, plan.delta));
  EXPECT_FALSE(find_gap(plan.b_p).gap_index.has_value());
}

} // namespace

TEST(Preprocess, ExampleBasisIsDirect) {
  const auto plan = preprocess(example, 2);
  EXPECT_EQ(plan.action, ActionKind::direct);
  EXPECT_FALSE(plan.p.has_value());
  EXPECT_EQ(plan.k_reduced, 2u);
  EXPECT_EQ(covolume_sq(plan.b_p), 1);
  expect_reduced_and_gap_free(plan);
  ASSERT_EQ(plan.trace.size(), 1u);
}

TEST(Preprocess, GapEqualToKSolves) {
  const auto plan = preprocess(Basis::diagonal({1, 1, 100}), 2);
  EXPECT_EQ(plan.action, ActionKind::solved);
  EXPECT_EQ(plan.p, std::optional<std::size_t>(2));
  ASSERT_EQ(plan.b_p.rank(), 2u);
  EXPECT_EQ(covolume_sq(plan.b_p), 1);
  // The two short unit vectors, up to sign and order.
  for (const auto &r : plan.b_p.rows()) {
    EXPECT_EQ(dot(r, r), 1);
    EXPECT_EQ(r[2], 0);
  }
  EXPECT_EQ(lift_solution(plan, plan.b_p), plan.b_p);
}

TEST(Preprocess, GapAboveKRestricts) {
  const auto plan = preprocess(Basis::diagonal({1, 1, 100}), 1);
  EXPECT_EQ(plan.action, ActionKind::restrict);
  EXPECT_EQ(plan.p, std::optional<std::size_t>(2));
  EXPECT_EQ(plan.b_p.rank(), 2u);
  EXPECT_EQ(plan.k_reduced, 1u);
  expect_reduced_and_gap_free(plan);
}

TEST(Preprocess, GapBelowKProjectsAndLifts) {
  const Basis b = Basis::diagonal({1, 1, 100, 100});
  const auto plan = preprocess(b, 3);
  EXPECT_EQ(plan.action, ActionKind::project);
  EXPECT_EQ(plan.p, std::optional<std::size_t>(2));
  EXPECT_EQ(plan.k_reduced, 1u);
  EXPECT_EQ(plan.b_p.rank(), 2u);
  const auto res = preprocess_and_solve(b, 3, 1);
  EXPECT_EQ(res.vol_sq, 10000);
  EXPECT_EQ(res.solution.rank(), 3u);
  // Exhaustive check of the 3-dim minimum in a small box.
  EXPECT_EQ(oracle::box_min_small(to_int(b), 3, -2, 2), 10000);
}

TEST(Preprocess, LiftOfDirectPlanIsIdentity) {
  const auto plan = preprocess(example, 2);
  const Basis s = Basis::from_integers({{1, 0, 0}, {0, 1, 0}});
  EXPECT_EQ(lift_solution(plan, s), s);
  EXPECT_THROW(lift_solution(plan, Basis::from_integers({{1, 0, 0}})), Error);
}

TEST(Preprocess, RejectsKOutOfRange) {
  EXPECT_THROW(preprocess(example, 0), Error);
  EXPECT_THROW(preprocess(example, 3), Error);
}

TEST(Preprocess, OutputIsReducedAndGapFree) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + t % 4;
    const Basis b = t % 2 ? from(oracle::random_basis(rng, n, n, -9, 9))
                          : from(oracle::gapped_basis(rng, n, 1 + t % (n - 1), 10));
    for (std::size_t k = 1; k < n; ++k) {
      const auto plan = preprocess(b, k);
      expect_reduced_and_gap_free(plan);
      if (plan.solved()) {
        EXPECT_EQ(plan.b_p.rank(), k);
      }
      EXPECT_TRUE(plan.trace.back().kind == ActionKind::direct ||
                  plan.trace.back().kind == ActionKind::solved);
    }
  }
}

// Minimum from the reduced instance, lifted, equals an exhaustive search on
// the original lattice.
TEST(Preprocess, LiftMatchesExhaustiveSearch) {
  std::mt19937_64 rng(103);
  int cases = 0;
  for (int t = 0; cases < 30; ++t) {
    const std::size_t n = 3 + t % 2;
    const bool gapped = t % 3 != 0;
    const Basis b = gapped ? from(oracle::gapped_basis(rng, n, 1 + t % (n - 1), 10))
                           : from(oracle::random_basis(rng, n, n, -9, 9));
    for (std::size_t k = 1; k <= 2 && k < n; ++k) {
      const auto res = preprocess_and_solve(b, k, 1);
      EXPECT_EQ(res.solution.rank(), k);
      // Lifted rows lie in the input lattice.
      for (const auto &row : res.solution.rows())
        EXPECT_NO_THROW(detail::coordinates_in(row, b.rows()));
      const Basis reduced = lll_reduce(b, default_delta());
      const auto want = oracle::box_min_small(to_int(reduced), k, n == 3 ? -3 : -2, n == 3 ? 3 : 2);
      EXPECT_EQ(res.vol_sq, Rational(want)) << "case " << t << " k=" << k;
      ++cases;
    }
  }
}

TEST(Preprocess, CovolumeFactorsThroughProjection) {
  std::mt19937_64 rng(107);
  int seen = 0;
  for (int t = 0; t < 200 && seen < 10; ++t) {
    const Basis b = from(oracle::gapped_basis(rng, 4, 1, 10));
    const auto plan = preprocess(b, 3);
    // A single projection followed by a direct solve.
    if (plan.action != ActionKind::project || plan.trace.size() != 2 || plan.solved())
      continue;
    ++seen;
    const auto res = preprocess_and_solve(b, 3, 1);
    ASSERT_TRUE(res.reduced.has_value());
    const std::size_t p = *plan.p;
    const Rational head = covolume_sq(plan.trace.front().level_basis.prefix(p));
    const Basis sub(multiply(to_rational(res.reduced->solutions.front()), plan.b_p.rows()));
    EXPECT_EQ(res.vol_sq, head * covolume_sq(sub));
  }
  EXPECT_GE(seen, 5);
}

// ---------------------------------------------------------------------------
// Budgets

TEST(Budget, LllExample) {
  const auto b = qubit_budget(3, 2, BudgetMode::lll, Rational(1));
  EXPECT_NEAR(b.alpha, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.coefficient_bound, 3.0 * std::pow(4.0 / 3.0, 1.5), 1e-12);
  EXPECT_NEAR(b.coefficient_bound, 4.6188, 1e-4);
  EXPECT_EQ(b.bits_per_coordinate, 3);
  EXPECT_EQ(b.total_qubits, 24u);
}

TEST(Budget, HkzExample) {
  const auto b = qubit_budget(3, 2, BudgetMode::hkz);
  EXPECT_DOUBLE_EQ(b.coefficient_bound, 60.75);
  EXPECT_EQ(b.bits_per_coordinate, 6);
  EXPECT_EQ(b.total_qubits, 42u);
  EXPECT_NEAR(b.closed_form_qubits, 30.0 * std::log2(3.0), 1e-12);
  EXPECT_NEAR(b.closed_form_qubits, 47.5, 0.05);
}

TEST(Budget, ExperimentOverride) { EXPECT_EQ(qubits_for(3, 2, 1), 12u); }

TEST(Budget, InvariantsOverGrid) {
  for (const Rational &delta : {default_delta(), Rational(99, 100), Rational(1)})
    for (std::size_t n = 2; n <= 50; ++n)
      for (std::size_t k = 1; k < n; k += 1 + n / 8)
        for (auto mode : {BudgetMode::lll, BudgetMode::hkz}) {
          const auto b = qubit_budget(n, k, mode, delta);
          const int m = b.bits_per_coordinate;
          EXPECT_GE(std::ldexp(1.0, m), b.coefficient_bound + 1.0);
          if (m > 0) {
            EXPECT_LT(std::ldexp(1.0, m - 1), b.coefficient_bound + 1.0);
          }
          EXPECT_EQ(b.total_qubits, k * n * static_cast<std::size_t>(m + 1));
        }
}

TEST(Budget, RejectsBadParameters) {
  EXPECT_THROW(qubit_budget(3, 0, BudgetMode::lll), Error);
  EXPECT_THROW(qubit_budget(3, 3, BudgetMode::lll), Error);
  EXPECT_THROW(qubit_budget(3, 1, BudgetMode::lll, Rational(1, 5)), Error);
}

// ---------------------------------------------------------------------------
// Transform bound

TEST(TransformBound, ScramblesOfReducedBasesStaySmall) {
  std::mt19937_64 rng(109);
  int checked = 0;
  for (int t = 0; checked < 30 && t < 2000; ++t) {
    const std::size_t n = 2 + t % 3;
    const Basis bp = lll_reduce(from(oracle::random_basis(rng, n, n, -9, 9)), default_delta());
    if (find_gap(bp).gap_index)
      continue;
    ++checked;
    const auto u = oracle::random_unimodular(rng, n, 8);
    const Basis c = lll_reduce(from(oracle::mul(u, to_int(bp))), default_delta());
    const auto solved = solve_transform(c, bp);
    const double alpha = lll_alpha(default_delta());
    const double bound = n * std::pow(alpha, 3.0 * (n - 1.0) / 4.0);
    EXPECT_LE(max_abs(solved).get_d(), bound);
  }
  EXPECT_EQ(checked, 30);
}
