#pragma once

// Slow reference implementations used as test oracles. They share no code
// with the library beyond the Rational type.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "kdsp/kdsp.hpp"

namespace oracle {

using kdsp::Rational;
using Mat = std::vector<std::vector<Rational>>;
using IMat = std::vector<std::vector<long>>;

inline Rational leibniz_det(const Mat &a) {
  const std::size_t n = a.size();
  if (n == 0)
    return 1;
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  Rational total = 0;
  do {
    int inv = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        inv += p[i] > p[j];
    Rational prod = inv % 2 ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i)
      prod *= a[i][p[i]];
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline Mat gram_of(const Mat &b) {
  Mat g(b.size(), std::vector<Rational>(b.size(), 0));
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      for (std::size_t a = 0; a < b[i].size(); ++a)
        g[i][j] += b[i][a] * b[j][a];
  return g;
}

inline Mat to_mat(const IMat &m) {
  Mat out;
  for (const auto &r : m) {
    std::vector<Rational> row;
    for (long v : r)
      row.emplace_back(v);
    out.push_back(row);
  }
  return out;
}

/// Squared norms of the Gram-Schmidt vectors via explicit vector projections.
inline std::vector<Rational> star_norms(const Mat &b) {
  Mat star;
  std::vector<Rational> out;
  for (const auto &v : b) {
    std::vector<Rational> w = v;
    for (const auto &s : star) {
      Rational num = 0, den = 0;
      for (std::size_t a = 0; a < v.size(); ++a) {
        num += v[a] * s[a];
        den += s[a] * s[a];
      }
      for (std::size_t a = 0; a < v.size(); ++a)
        w[a] -= num / den * s[a];
    }
    Rational n2 = 0;
    for (const auto &x : w)
      n2 += x * x;
    out.push_back(n2);
    star.push_back(w);
  }
  return out;
}

/// vol^2 of the sub-lattice spanned by rows of X in the lattice with Gram G.
inline Rational subvol(const Mat &x, const Mat &g) {
  const std::size_t k = x.size(), n = g.size();
  Mat s(k, std::vector<Rational>(k, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          s[i][j] += x[i][a] * g[a][b] * x[j][b];
  return leibniz_det(s);
}

/// Calls f on every integer vector in [lo, hi]^n.
inline void for_box(std::size_t n, long lo, long hi, const std::function<void(const std::vector<long> &)> &f) {
  std::vector<long> v(n, lo);
  for (;;) {
    f(v);
    std::size_t i = 0;
    while (i < n && v[i] == hi)
      v[i++] = lo;
    if (i == n)
      return;
    ++v[i];
  }
}

/// Shortest nonzero norm^2 over coefficient box [-r, r]^N.
inline Rational box_svp(const Mat &b, long r) {
  const Mat g = gram_of(b);
  bool have = false;
  Rational best;
  for_box(b.size(), -r, r, [&](const std::vector<long> &c) {
    if (std::all_of(c.begin(), c.end(), [](long v) { return v == 0; }))
      return;
    Rational n2 = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        n2 += Rational(c[i] * c[j]) * g[i][j];
    if (!have || n2 < best) {
      best = n2;
      have = true;
    }
  });
  return best;
}

inline double ip(const std::vector<long> &x, const std::vector<long> &y, const std::vector<std::vector<double>> &g) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      s += x[i] * y[j] * g[i][j];
  return s;
}

/// Two-vector closed form sum_{ijkl} x_i x_j y_k y_l (G_ij G_kl - G_ik G_jl).
inline double closed_form_k2(const std::vector<long> &x, const std::vector<long> &y,
                             const std::vector<std::vector<double>> &g) {
  const std::size_t n = g.size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          s += x[i] * x[j] * y[k] * y[l] * (g[i][j] * g[k][l] - g[i][k] * g[j][l]);
  return s;
}

/// Three-vector closed form: six signed products of Gram entries over
/// x_i x_j y_k y_l z_m z_n.
inline double closed_form_k3(const std::vector<long> &x, const std::vector<long> &y,
                             const std::vector<long> &z, const std::vector<std::vector<double>> &g) {
  const std::size_t N = g.size();
  double s = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = 0; l < N; ++l)
          for (std::size_t m = 0; m < N; ++m)
            for (std::size_t n = 0; n < N; ++n) {
              const double c = x[i] * x[j] * y[k] * y[l] * z[m] * z[n];
              if (c == 0)
                continue;
              s += c * (g[i][j] * g[k][l] * g[m][n] + g[i][k] * g[l][m] * g[n][j] +
                        g[i][n] * g[k][m] * g[j][l] - g[i][j] * g[k][m] * g[l][n] -
                        g[k][l] * g[i][m] * g[j][n] - g[m][n] * g[i][k] * g[j][l]);
            }
  return s;
}

/// Fast Walsh-Hadamard transform; returns Z-monomial coefficients c_S with
/// f(z) = sum_S c_S (-1)^{|z & S|}.
inline std::vector<double> walsh(std::vector<double> f) {
  const std::size_t size = f.size();
  for (std::size_t h = 1; h < size; h <<= 1)
    for (std::size_t i = 0; i < size; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = f[j], b = f[j + h];
        f[j] = a + b;
        f[j + h] = a - b;
      }
  for (auto &v : f)
    v /= static_cast<double>(size);
  return f;
}

/// Random integer N x d matrix with entries in [lo, hi] and nonzero Gram determinant.
inline IMat random_basis(std::mt19937_64 &rng, std::size_t n, std::size_t d, long lo, long hi) {
  std::uniform_int_distribution<long> dist(lo, hi);
  for (;;) {
    IMat m(n, std::vector<long>(d));
    for (auto &r : m)
      for (auto &v : r)
        v = dist(rng);
    if (leibniz_det(gram_of(to_mat(m))) != 0)
      return m;
  }
}

/// Random unimodular matrix from elementary operations (independent of the library's scrambler).
inline IMat random_unimodular(std::mt19937_64 &rng, std::size_t n, int steps) {
  IMat u(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    u[i][i] = 1;
  if (n < 2)
    return u;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int s = 0; s < steps; ++s) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i == j)
      continue;
    const int c = coef(rng);
    for (std::size_t a = 0; a < n; ++a)
      u[i][a] += c * u[j][a];
  }
  std::shuffle(u.begin(), u.end(), rng);
  return u;
}

inline IMat mul(const IMat &a, const IMat &b) {
  IMat out(a.size(), std::vector<long>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j)
        out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline std::vector<std::vector<double>> to_double(const kdsp::GramMatrix &g) {
  std::vector<std::vector<double>> out(g.size(), std::vector<double>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      out[i][j] = g(i, j).get_d();
  return out;
}

/// Brute-force min nonzero vol^2 and its multiplicity over the [-2^m, 2^m-1] box, k <= 3.
struct BoxMin {
  Rational min;
  std::uint64_t count = 0;
  bool found = false;
};

inline BoxMin box_min(const Mat &g, std::size_t k, int m) {
  const std::size_t n = g.size();
  const long lo = -(1L << m), hi = (1L << m) - 1;
  BoxMin out;
  std::vector<std::vector<long>> vecs;
  for_box(n, lo, hi, [&](const std::vector<long> &v) { vecs.push_back(v); });
  std::vector<std::size_t> idx(k, 0);
  for (;;) {
    Mat x;
    for (auto i : idx) {
      std::vector<Rational> row;
      for (long v : vecs[i])
        row.emplace_back(v);
      x.push_back(row);
    }
    const Rational v = subvol(x, g);
    if (v > 0) {
      if (!out.found || v < out.min) {
        out.min = v;
        out.count = 0;
        out.found = true;
      }
      if (v == out.min)
        ++out.count;
    }
    std::size_t i = 0;
    while (i < k && idx[i] == vecs.size() - 1)
      idx[i++] = 0;
    if (i == k)
      break;
    ++idx[i];
  }
  return out;
}

/// Minimal nonzero vol^2 of rank-k (k <= 3) sub-lattices generated by
/// coefficient vectors in [lo, hi]^N of an integer basis; integer arithmetic.
inline std::int64_t box_min_small(const IMat &basis, std::size_t k, long lo, long hi) {
  using i128 = __int128;
  const std::size_t n = basis.size();
  std::vector<std::vector<std::int64_t>> g(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < basis[i].size(); ++a)
        g[i][j] += basis[i][a] * basis[j][a];
  std::vector<std::vector<long>> vecs;
  for_box(n, lo, hi, [&](const std::vector<long> &c) {
    if (std::any_of(c.begin(), c.end(), [](long v) { return v != 0; }))
      vecs.push_back(c);
  });
  const std::size_t v = vecs.size();
  std::vector<std::vector<i128>> f(v, std::vector<i128>(v));
  for (std::size_t a = 0; a < v; ++a)
    for (std::size_t b = a; b < v; ++b) {
      i128 s = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          s += i128(vecs[a][i]) * vecs[b][j] * g[i][j];
      f[a][b] = f[b][a] = s;
    }
  i128 best = -1;
  auto offer = [&](i128 d) {
    if (d > 0 && (best < 0 || d < best))
      best = d;
  };
  for (std::size_t a = 0; a < v; ++a) {
    if (k == 1) {
      offer(f[a][a]);
      continue;
    }
    for (std::size_t b = a + 1; b < v; ++b) {
      if (k == 2) {
        offer(f[a][a] * f[b][b] - f[a][b] * f[a][b]);
        continue;
      }
      for (std::size_t c = b + 1; c < v; ++c)
        offer(f[a][a] * (f[b][b] * f[c][c] - f[b][c] * f[b][c]) -
              f[a][b] * (f[a][b] * f[c][c] - f[b][c] * f[a][c]) +
              f[a][c] * (f[a][b] * f[b][c] - f[b][b] * f[a][c]));
    }
  }
  return static_cast<std::int64_t>(best);
}

/// Random basis with a built-in gap: a p-dim block with small entries and an
/// (N-p)-dim block scaled by `scale`, mixed by a random unimodular transform.
inline IMat gapped_basis(std::mt19937_64 &rng, std::size_t n, std::size_t p, long scale) {
  IMat small = random_basis(rng, p, p, -2, 2);
  IMat big = random_basis(rng, n - p, n - p, -2, 2);
  IMat b(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      b[i][j] = small[i][j];
  for (std::size_t i = 0; i < n - p; ++i)
    for (std::size_t j = 0; j < n - p; ++j)
      b[p + i][p + j] = scale * big[i][j];
  return mul(random_unimodular(rng, n, 3), b);
}

} // namespace oracle
