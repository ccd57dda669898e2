#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kdsp/error.hpp"

namespace kdsp {

using Integer = mpz_class;
using Rational = mpq_class;

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;
using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Parses "p/q", "-p", "p" into a canonical rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty())
    fail(ErrorKind::parse, "empty rational literal");
  if (s.front() == '+')
    s.erase(0, 1);
  auto is_int = [](const std::string &t) {
    if (t.empty())
      return false;
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size())
      return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9')
        return false;
    return true;
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!is_int(num) || !is_int(den) || den[0] == '-')
    fail(ErrorKind::parse, "bad rational literal '" + std::string(text) + "'");
  Rational q;
  q.get_num() = Integer(num, 10);
  q.get_den() = Integer(den, 10);
  if (q.get_den() == 0)
    fail(ErrorKind::parse, "zero denominator in '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational &q) { return q.get_str(10); }

inline double to_double(const Rational &q) { return q.get_d(); }

/// Nearest integer, ties rounded up (floor(q + 1/2)).
inline Integer round_nearest(const Rational &q) {
  Rational shifted = q + Rational(1, 2);
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  return r;
}

inline Integer floor_div(const Rational &q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline bool is_integer(const Rational &q) { return q.get_den() == 1; }

inline Rational dot(const RationalVector &a, const RationalVector &b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

/// Exact determinant by fraction-free rational elimination with pivoting.
inline Rational determinant(RationalMatrix a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0)
      ++piv;
    if (piv == n)
      return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r][c] == 0)
        continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j)
        a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

/// Exact inverse of a nonsingular square matrix (Gauss-Jordan).
inline RationalMatrix inverse(RationalMatrix a) {
  const std::size_t n = a.size();
  RationalMatrix inv(n, RationalVector(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0)
      ++piv;
    if (piv == n)
      fail(ErrorKind::numerical, "singular matrix");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    Rational p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0)
        continue;
      Rational f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

inline RationalMatrix multiply(const RationalMatrix &a, const RationalMatrix &b) {
  const std::size_t n = a.size();
  const std::size_t inner = b.size();
  const std::size_t m = inner == 0 ? 0 : b[0].size();
  RationalMatrix c(n, RationalVector(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      if (a[i][k] == 0)
        continue;
      for (std::size_t j = 0; j < m; ++j)
        c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

inline RationalMatrix to_rational(const IntMatrix &x) {
  RationalMatrix r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (auto v : x[i])
      r[i].emplace_back(static_cast<long>(v));
  return r;
}

} // namespace kdsp
