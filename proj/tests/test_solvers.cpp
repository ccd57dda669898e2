#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kdsp/kdsp.hpp"
#include "oracles.hpp"

using namespace kdsp;

namespace {

const Basis example = Basis::from_integers({{1, -1, 0}, {0, 1, -1}, {0, 0, 1}});

DiagonalCost marked_table(std::size_t n, std::uint64_t marked, std::mt19937_64 &rng) {
  DiagonalCost d;
  d.n = n;
  d.values.assign(std::size_t{1} << n, 2.0);
  std::vector<std::size_t> idx(d.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::uint64_t i = 0; i < marked; ++i)
    d.values[idx[i]] = 1.0;
  return d;
}

int bits_to_hold(std::int64_t v) {
  int m = 0;
  while (v < -(std::int64_t{1} << m) || v > (std::int64_t{1} << m) - 1)
    ++m;
  return m;
}

} // namespace

TEST(BruteForce, ExampleBasis) {
  const auto r = brute_force_solve(gram(example), EncodingConfig(2, 3, 1));
  EXPECT_EQ(r.min_vol_sq, 1);
  EXPECT_EQ(r.states_scanned, 4096u);
  ASSERT_FALSE(r.solutions.empty());
  EXPECT_GE(r.m_count, r.solutions.size());
  // Some optimal X spans the first two unit vectors, as {(1,1,1),(0,1,1)} does.
  bool found = false;
  for (const auto &x : r.solutions) {
    const Basis sub(multiply(to_rational(x), example.rows()));
    EXPECT_EQ(covolume_sq(sub), 1);
    found |= sub.rows()[0][2] == 0 && sub.rows()[1][2] == 0;
  }
  EXPECT_TRUE(found);
}

TEST(BruteForce, IdentityGoldenCount) {
  const auto r = brute_force_solve(gram(Basis::identity(3)), EncodingConfig(2, 3, 1));
  EXPECT_EQ(r.min_vol_sq, 1);
  EXPECT_EQ(r.m_count, 216u);
  const auto box = oracle::box_min(oracle::gram_of(oracle::to_mat({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})), 2, 1);
  EXPECT_EQ(box.min, 1);
  EXPECT_EQ(box.count, 216u);
  EXPECT_EQ(r.solutions.size(), 64u);
  EXPECT_TRUE(std::is_sorted(r.bitstrings.begin(), r.bitstrings.end()));
  for (std::size_t i = 0; i < r.solutions.size(); ++i) {
    EXPECT_EQ(eval_cost_direct(r.bitstrings[i], gram(Basis::identity(3)), EncodingConfig(2, 3, 1)), 1);
  }
}

TEST(BruteForce, MatchesOracleOnRandomBases) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 10; ++t) {
    const auto b = oracle::random_basis(rng, 3, 3, -4, 4);
    const auto r = brute_force_solve(gram(Basis::from_integers(b)), EncodingConfig(2, 3, 1));
    const auto want = oracle::box_min(oracle::gram_of(oracle::to_mat(b)), 2, 1);
    EXPECT_EQ(r.min_vol_sq, want.min);
    EXPECT_EQ(r.m_count, want.count);
  }
}

TEST(BruteForce, NoSubLatticeInOneDimension) {
  try {
    brute_force_solve(gram(Basis::diagonal({3})), EncodingConfig(2, 1, 1));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_NE(std::string(e.what()).find("no nontrivial sub-lattice in box"), std::string::npos);
  }
}

TEST(BruteForce, CapIsEnforced) {
  SolveOptions opts;
  opts.qubit_cap = 10;
  EXPECT_THROW(brute_force_solve(gram(example), EncodingConfig(2, 3, 1), opts), Error);
}

TEST(BruteForce, SingleVectorIsShortestVector) {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int t = 0; t < 40 && checked < 15; ++t) {
    const std::size_t n = 2 + t % 2;
    const Basis b = Basis::from_integers(oracle::random_basis(rng, n, n, -6, 6));
    const auto svp = svp_enumerate(b);
    std::int64_t need = 0;
    for (const auto &c : svp.coefficients)
      need = std::max<std::int64_t>(need, std::abs(c.get_si()));
    const int m = bits_to_hold(need) + 1;
    if ((m + 1) * n > 16)
      continue;
    ++checked;
    const auto r = brute_force_solve(gram(b), EncodingConfig(1, n, m));
    EXPECT_EQ(r.min_vol_sq, svp.norm_sq);
  }
  EXPECT_GE(checked, 10);
}

TEST(BruteForce, ScrambleInvariantWithWiderBox) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 8; ++t) {
    const std::size_t n = 2 + t % 2;
    const std::size_t k = 1;
    const Basis b = lll_reduce(Basis::from_integers(oracle::random_basis(rng, n, n, -5, 5)), default_delta());
    const int m = qubit_budget(n, k, BudgetMode::lll).bits_per_coordinate;
    const auto base = brute_force_solve(gram(b), EncodingConfig(k, n, m));
    // Box wide enough for the optimum expressed in scrambled coordinates.
    const IntMatrix u = scramble_matrix(n, 1000 + t);
    const Basis s = apply_unimodular(u, b);
    const auto moved = multiply(to_rational(base.solutions.front()), inverse(to_rational(u)));
    std::int64_t need = 0;
    for (const auto &row : moved)
      for (const auto &q : row)
        need = std::max<std::int64_t>(need, std::abs(q.get_num().get_si()));
    const int ms = std::max(m, bits_to_hold(need) + 1);
    ASSERT_LE((ms + 1) * n, 20u);
    const auto other = brute_force_solve(gram(s), EncodingConfig(k, n, ms));
    EXPECT_EQ(other.min_vol_sq, base.min_vol_sq) << t;
  }
}

TEST(Grover, AllMarked) {
  DiagonalCost d;
  d.n = 3;
  d.values.assign(8, 1.0);
  const auto r = grover_simulate(d, {1.0}, std::nullopt, 1);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_NEAR(r.success_prob, 1.0, 1e-12);
}

TEST(Grover, FourElementSearch) {
  DiagonalCost d;
  d.n = 2;
  d.values = {3.0, 1.0, 4.0, 0.0};
  const auto r = grover_simulate(d, {1.0}, std::nullopt, 1);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_NEAR(r.success_prob, 1.0, 1e-12);
  EXPECT_EQ(r.sample, 1u);
}

TEST(Grover, EmptyTargetFails) {
  DiagonalCost d;
  d.n = 2;
  d.values = {3.0, 2.0, 4.0, 0.0};
  EXPECT_THROW(grover_simulate(d, {1.0}, std::nullopt, 1), Error);
}

TEST(Grover, MatchesClosedForm) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng() % 12;
    const std::uint64_t space = std::uint64_t{1} << n;
    const std::uint64_t marked = 1 + rng() % space;
    const auto d = marked_table(n, marked, rng);
    const std::size_t iters = default_grover_iterations(space, marked) + rng() % 4;
    const auto r = grover_simulate(d, {1.0}, iters, t);
    ASSERT_EQ(r.marked, marked);
    ASSERT_EQ(r.curve.size(), iters + 1);
    for (std::size_t j = 0; j <= iters; ++j)
      EXPECT_NEAR(r.curve[j], grover_closed_form(space, marked, j), 1e-10);
  }
}

TEST(Grover, IdentityInstance) {
  const GramMatrix g = gram(Basis::identity(3));
  const EncodingConfig cfg(2, 3, 1);
  const auto best = brute_force_solve(g, cfg);
  const auto d = diagonal_vector(g, cfg);
  const auto r = grover_simulate(d, {to_double(best.min_vol_sq)}, std::nullopt, 7);
  EXPECT_EQ(r.marked, best.m_count);
  EXPECT_GE(r.success_prob, 0.9);
  EXPECT_EQ(d.values[r.sample], 1.0);
}

TEST(Grover, RuntimeEstimate) {
  EXPECT_NEAR(grover_runtime_estimate(3, 2, 1), 15.0 * std::log2(3.0), 1e-12);
  EXPECT_NEAR(grover_runtime_estimate(3, 2, 1), 23.77, 0.005);
  EXPECT_NEAR(grover_runtime_estimate(3, 2, 4), 22.77, 0.005);
  EXPECT_NEAR(grover_runtime_estimate(3, 2, std::exp2(30.0 * std::log2(3.0))), 0.0, 1e-9);
  EXPECT_THROW(grover_runtime_estimate(3, 2, 0), Error);
}

TEST(Scramble, IsUnimodularAndBounded) {
  for (std::size_t n = 2; n <= 10; ++n) {
    const auto u = scramble_matrix(n);
    EXPECT_EQ(std::abs(determinant(to_rational(u)).get_d()), 1.0);
    for (const auto &r : u)
      for (auto v : r)
        EXPECT_LE(std::abs(v), 3);
    EXPECT_EQ(u, scramble_matrix(n));
    EXPECT_NE(u, scramble_matrix(n, 99));
  }
}
