#pragma once

// Fixed "bad basis" construction: seeded products of elementary unimodular
// row operations with entries kept within a bound.

#include <cstdint>
#include <cstdlib>

#include "kdsp/lattice.hpp"
#include "kdsp/rng.hpp"

namespace kdsp {

inline constexpr std::uint64_t default_scramble_seed = 0x5C8A3B1Eull;

/// Random unimodular n x n matrix built from row additions r_i += c r_j
/// (c = +-1), rejecting any step that pushes an entry above `bound` in
/// absolute value. `steps` accepted operations are applied.
inline IntMatrix scramble_matrix(std::size_t n, std::uint64_t seed = default_scramble_seed,
                                 std::int64_t bound = 3, std::size_t steps = 0) {
  require(n >= 1, ErrorKind::config, "scramble dimension must be >= 1");
  IntMatrix u(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    u[i][i] = 1;
  if (n == 1)
    return u;
  if (steps == 0)
    steps = 4 * n;
  Rng rng(seed);
  std::size_t accepted = 0;
  for (std::size_t attempt = 0; accepted < steps && attempt < 1000 * steps; ++attempt) {
    const std::size_t i = rng.next() % n;
    std::size_t j = rng.next() % (n - 1);
    if (j >= i)
      ++j;
    const std::int64_t c = (rng.next() & 1) ? 1 : -1;
    bool ok = true;
    for (std::size_t a = 0; a < n && ok; ++a)
      ok = std::llabs(u[i][a] + c * u[j][a]) <= bound;
    if (!ok)
      continue;
    for (std::size_t a = 0; a < n; ++a)
      u[i][a] += c * u[j][a];
    ++accepted;
  }
  return u;
}

/// U * B for an integer matrix U.
inline Basis apply_unimodular(const IntMatrix &u, const Basis &b) {
  require(u.size() == b.rank(), ErrorKind::config, "transform does not match basis rank");
  return Basis(multiply(to_rational(u), b.rows()));
}

inline Basis scrambled(const Basis &b, std::uint64_t seed = default_scramble_seed) {
  return apply_unimodular(scramble_matrix(b.rank(), seed), b);
}

} // namespace kdsp
