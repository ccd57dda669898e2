#pragma once

// Exact lattice linear algebra over GMP rationals: Gram matrices,
// Gram-Schmidt data, covolume, LLL, gap detection, SVP enumeration and
// (dual-)HKZ reduction at desk-scale dimensions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/rational.hpp"

namespace kdsp {

using IntegerVector = std::vector<Integer>;
using IntegerMatrix = std::vector<IntegerVector>;

/// Ordered lattice basis stored as rows. Shape is checked on construction;
/// linear independence is checked by gso() ("not a basis").
class Basis {
public:
  Basis() = default;

  explicit Basis(RationalMatrix rows) : rows_(std::move(rows)) {
    require(!rows_.empty(), ErrorKind::config, "basis has no rows");
    require(!rows_[0].empty(), ErrorKind::config, "basis rows are empty");
    for (const auto &r : rows_)
      require(r.size() == rows_[0].size(), ErrorKind::config,
              "basis rows have different lengths");
    require(rows_.size() <= rows_[0].size(), ErrorKind::config,
            "basis has more rows than ambient dimension");
  }

  static Basis identity(std::size_t n) {
    RationalMatrix rows(n, RationalVector(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      rows[i][i] = 1;
    return Basis(std::move(rows));
  }

  static Basis diagonal(const std::vector<long> &diag) {
    const std::size_t n = diag.size();
    RationalMatrix rows(n, RationalVector(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      rows[i][i] = diag[i];
    return Basis(std::move(rows));
  }

  static Basis from_integers(const std::vector<std::vector<long>> &m) {
    RationalMatrix rows(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      for (long v : m[i])
        rows[i].emplace_back(v);
    return Basis(std::move(rows));
  }

  std::size_t rank() const { return rows_.size(); }
  std::size_t ambient_dim() const { return rows_.empty() ? 0 : rows_[0].size(); }
  const RationalMatrix &rows() const { return rows_; }
  const RationalVector &operator[](std::size_t i) const { return rows_[i]; }

  /// First `count` rows.
  Basis prefix(std::size_t count) const {
    return Basis(RationalMatrix(rows_.begin(), rows_.begin() + count));
  }

  bool operator==(const Basis &other) const { return rows_ == other.rows_; }

private:
  RationalMatrix rows_;
};

/// Symmetric positive definite matrix of pairwise inner products.
struct GramMatrix {
  RationalMatrix entries;

  std::size_t size() const { return entries.size(); }
  const Rational &operator()(std::size_t i, std::size_t j) const {
    return entries[i][j];
  }
  bool operator==(const GramMatrix &other) const = default;
};

struct GsoData {
  RationalVector star_norms_sq;
  RationalMatrix mu; ///< lower triangular, unit diagonal
};

struct GapReport {
  std::optional<std::size_t> gap_index; ///< r in [1, N-1], 1-based count of prefix
  Rational prefix_max_sq;
  Rational suffix_min_sq;
};

struct SvpResult {
  RationalVector vector;
  IntegerVector coefficients; ///< with respect to the input basis rows
  Rational norm_sq;
};

struct LllResult {
  Basis basis;
  IntegerMatrix transform; ///< basis = transform * input
};

/// Dimension cap for enumeration-based routines.
inline constexpr std::size_t default_enumeration_cap = 12;

inline GramMatrix gram(const Basis &b) {
  const std::size_t n = b.rank();
  GramMatrix g{RationalMatrix(n, RationalVector(n, 0))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      g.entries[i][j] = dot(b[i], b[j]);
      g.entries[j][i] = g.entries[i][j];
    }
  return g;
}

/// Gram-Schmidt data computed from inner products only.
inline GsoData gso(const GramMatrix &g) {
  const std::size_t n = g.size();
  GsoData out{RationalVector(n, 0), RationalMatrix(n, RationalVector(n, 0))};
  RationalMatrix r(n, RationalVector(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Rational s = g(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= out.mu[j][k] * r[i][k];
      r[i][j] = s;
      if (j < i)
        out.mu[i][j] = s / out.star_norms_sq[j];
    }
    out.mu[i][i] = 1;
    out.star_norms_sq[i] = r[i][i];
    if (out.star_norms_sq[i] <= 0)
      fail(ErrorKind::numerical, "not a basis");
  }
  return out;
}

inline GsoData gso(const Basis &b) { return gso(gram(b)); }

inline Rational covolume_sq(const Basis &b) { return determinant(gram(b).entries); }

// ---------------------------------------------------------------------------
// LLL

inline void check_delta(const Rational &delta) {
  require(delta > Rational(1, 4) && delta <= 1, ErrorKind::config,
          "LLL parameter delta must lie in (1/4, 1]");
}

/// Default quality parameter 3/4 + 10^-6.
inline Rational default_delta() { return Rational(3, 4) + Rational(1, 1000000); }

/// alpha = 1 / (delta - 1/4), the constant written (4/3 + eps) in LLL bounds.
inline double lll_alpha(const Rational &delta) {
  return 1.0 / to_double(delta - Rational(1, 4));
}

namespace detail {

inline Integer common_denominator(const RationalMatrix &rows) {
  Integer d = 1;
  for (const auto &r : rows)
    for (const auto &q : r)
      mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), q.get_den_mpz_t());
  return d;
}

inline void add_multiple(RationalVector &dst, const RationalVector &src,
                         const Rational &f) {
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] += f * src[i];
}

inline void add_multiple(IntegerVector &dst, const IntegerVector &src,
                         const Integer &f) {
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] += f * src[i];
}

inline IntegerMatrix identity_integer(std::size_t n) {
  IntegerMatrix u(n, IntegerVector(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    u[i][i] = 1;
  return u;
}

} // namespace detail

/// LLL reduction with exact rational Gram-Schmidt bookkeeping. Rational input
/// is scaled to integers by the common denominator and scaled back.
inline LllResult lll_reduce_with_transform(const Basis &input, const Rational &delta) {
  check_delta(delta);
  const std::size_t n = input.rank();
  const Integer scale = detail::common_denominator(input.rows());
  RationalMatrix b = input.rows();
  for (auto &r : b)
    for (auto &q : r)
      q *= scale;

  IntegerMatrix u = detail::identity_integer(n);
  GsoData g = gso(gram(Basis(b)));
  auto &mu = g.mu;
  auto &bs = g.star_norms_sq;

  auto size_reduce = [&](std::size_t k, std::size_t j) {
    Integer q = round_nearest(mu[k][j]);
    if (q == 0)
      return;
    Rational qr(q);
    detail::add_multiple(b[k], b[j], -qr);
    detail::add_multiple(u[k], u[j], Integer(-q));
    for (std::size_t l = 0; l < j; ++l)
      mu[k][l] -= qr * mu[j][l];
    mu[k][j] -= qr;
  };

  std::size_t k = 1;
  while (k < n) {
    size_reduce(k, k - 1);
    if (bs[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * bs[k - 1]) {
      const Rational m = mu[k][k - 1];
      const Rational bnew = bs[k] + m * m * bs[k - 1];
      mu[k][k - 1] = m * bs[k - 1] / bnew;
      bs[k] = bs[k - 1] * bs[k] / bnew;
      bs[k - 1] = bnew;
      std::swap(b[k], b[k - 1]);
      std::swap(u[k], u[k - 1]);
      for (std::size_t j = 0; j + 1 < k; ++j)
        std::swap(mu[k][j], mu[k - 1][j]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const Rational t = mu[i][k];
        mu[i][k] = mu[i][k - 1] - m * t;
        mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k];
      }
      if (k > 1)
        --k;
    } else {
      for (std::size_t j = k - 1; j-- > 0;)
        size_reduce(k, j);
      ++k;
    }
  }

  for (auto &r : b)
    for (auto &q : r)
      q /= scale;
  return {Basis(std::move(b)), std::move(u)};
}

inline Basis lll_reduce(const Basis &input, const Rational &delta) {
  return lll_reduce_with_transform(input, delta).basis;
}

inline bool is_size_reduced(const GsoData &g) {
  const Rational half(1, 2);
  for (std::size_t i = 0; i < g.mu.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (abs(g.mu[i][j]) > half)
        return false;
  return true;
}

inline bool satisfies_lovasz(const GsoData &g, const Rational &delta) {
  for (std::size_t i = 0; i + 1 < g.star_norms_sq.size(); ++i) {
    const Rational &m = g.mu[i + 1][i];
    if (delta * g.star_norms_sq[i] > g.star_norms_sq[i + 1] + m * m * g.star_norms_sq[i])
      return false;
  }
  return true;
}

inline bool is_lll_reduced(const Basis &b, const Rational &delta) {
  GsoData g = gso(b);
  return is_size_reduced(g) && satisfies_lovasz(g, delta);
}

// ---------------------------------------------------------------------------
// Gap detection

inline GapReport find_gap(const GsoData &g) {
  const auto &s = g.star_norms_sq;
  const std::size_t n = s.size();
  GapReport report;
  if (n < 2)
    return report;
  RationalVector prefix_max(n), suffix_min(n);
  prefix_max[0] = s[0];
  for (std::size_t i = 1; i < n; ++i)
    prefix_max[i] = std::max(prefix_max[i - 1], s[i]);
  suffix_min[n - 1] = s[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    suffix_min[i] = std::min(suffix_min[i + 1], s[i]);
  for (std::size_t r = 1; r < n; ++r) {
    if (prefix_max[r - 1] < suffix_min[r]) {
      report.gap_index = r;
      report.prefix_max_sq = prefix_max[r - 1];
      report.suffix_min_sq = suffix_min[r];
      return report;
    }
  }
  return report;
}

inline GapReport find_gap(const Basis &b) { return find_gap(gso(b)); }

// ---------------------------------------------------------------------------
// Projections and duality

/// Rows i..N-1 projected orthogonally to span(rows 0..i-1).
inline Basis projected_basis(const Basis &b, std::size_t i) {
  require(i < b.rank(), ErrorKind::config, "projection index out of range");
  const GsoData g = gso(b);
  // Gram-Schmidt vectors of the prefix.
  RationalMatrix star(i);
  for (std::size_t j = 0; j < i; ++j) {
    star[j] = b[j];
    for (std::size_t l = 0; l < j; ++l)
      detail::add_multiple(star[j], star[l], -g.mu[j][l]);
  }
  RationalMatrix out;
  for (std::size_t r = i; r < b.rank(); ++r) {
    RationalVector v = b[r];
    for (std::size_t j = 0; j < i; ++j)
      detail::add_multiple(v, star[j], -g.mu[r][j]);
    out.push_back(std::move(v));
  }
  return Basis(std::move(out));
}

/// Dual basis (G^-1 B): rows d_i with <d_i, b_j> = [i == j].
inline Basis dual_basis(const Basis &b) {
  return Basis(multiply(inverse(gram(b).entries), b.rows()));
}

inline Basis reversed(const Basis &b) {
  RationalMatrix rows(b.rows().rbegin(), b.rows().rend());
  return Basis(std::move(rows));
}

/// Size-reduces row k against rows 0..k-1 (Gram-Schmidt vectors unchanged).
inline void size_reduce_row(RationalMatrix &rows, std::size_t k) {
  for (std::size_t j = k; j-- > 0;) {
    const GsoData g = gso(Basis(RationalMatrix(rows.begin(), rows.begin() + k + 1)));
    Integer q = round_nearest(g.mu[k][j]);
    if (q != 0)
      detail::add_multiple(rows[k], rows[j], Rational(-q));
  }
}

// ---------------------------------------------------------------------------
// Enumeration

struct EnumerationOptions {
  std::size_t cap = default_enumeration_cap;
};

namespace detail {

// Depth-first Fincke-Pohst enumeration over a reduced basis. Visits every
// nonzero coefficient vector whose floating-point norm is within the current
// radius (slightly inflated so exact ties are never pruned).
class Enumerator {
public:
  Enumerator(const GsoData &g, const GramMatrix &gm) : gram_(gm) {
    n_ = g.star_norms_sq.size();
    bstar_.resize(n_);
    mu_.assign(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      bstar_[i] = to_double(g.star_norms_sq[i]);
      for (std::size_t j = 0; j < i; ++j)
        mu_[i][j] = to_double(g.mu[i][j]);
    }
    coeff_.assign(n_, 0);
  }

  void run() {
    best_ = gram_(0, 0);
    for (std::size_t i = 1; i < n_; ++i)
      best_ = std::min(best_, gram_(i, i));
    radius_ = inflate(to_double(best_));
    recurse(n_, 0.0);
  }

  const Rational &best() const { return best_; }
  const std::vector<std::vector<long>> &ties() const { return ties_; }

private:
  static double inflate(double r) { return r * (1.0 + 1e-9) + 1e-12; }

  void recurse(std::size_t level, double partial) {
    if (level == 0) {
      leaf();
      return;
    }
    const std::size_t i = level - 1;
    double center = 0.0;
    for (std::size_t j = i + 1; j < n_; ++j)
      center -= static_cast<double>(coeff_[j]) * mu_[j][i];
    const double room = radius_ - partial;
    if (room < 0)
      return;
    const double half_width = std::sqrt(room / bstar_[i]);
    const long lo = static_cast<long>(std::ceil(center - half_width - 1e-9));
    const long hi = static_cast<long>(std::floor(center + half_width + 1e-9));
    for (long x = lo; x <= hi; ++x) {
      const double d = static_cast<double>(x) - center;
      const double next = partial + d * d * bstar_[i];
      if (next > radius_)
        continue;
      coeff_[i] = x;
      recurse(i, next);
    }
    coeff_[i] = 0;
  }

  void leaf() {
    bool nonzero = false;
    for (long c : coeff_)
      nonzero = nonzero || c != 0;
    if (!nonzero)
      return;
    Rational norm = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (coeff_[i] == 0)
        continue;
      for (std::size_t j = 0; j < n_; ++j)
        if (coeff_[j] != 0)
          norm += gram_(i, j) * Rational(coeff_[i] * coeff_[j]);
    }
    if (norm < best_) {
      best_ = norm;
      ties_.clear();
      radius_ = inflate(to_double(best_));
    }
    if (norm == best_)
      ties_.push_back(coeff_);
  }

  const GramMatrix &gram_;
  std::size_t n_ = 0;
  std::vector<double> bstar_;
  std::vector<std::vector<double>> mu_;
  std::vector<long> coeff_;
  Rational best_;
  double radius_ = 0.0;
  std::vector<std::vector<long>> ties_;
};

} // namespace detail

/// Exact shortest nonzero vector. Among equal-norm vectors the coefficient
/// vector (w.r.t. the input rows) that is lexicographically smallest with a
/// positive leading entry is returned.
inline SvpResult svp_enumerate(const Basis &b, const EnumerationOptions &opts = {}) {
  require(b.rank() <= opts.cap, ErrorKind::cap, "enumeration cap exceeded");
  const std::size_t n = b.rank();
  const LllResult red = lll_reduce_with_transform(b, Rational(99, 100));
  const GramMatrix gm = gram(red.basis);
  detail::Enumerator e(gso(gm), gm);
  e.run();

  std::optional<IntegerVector> chosen;
  for (const auto &y : e.ties()) {
    IntegerVector x(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (y[i] != 0)
        detail::add_multiple(x, red.transform[i], Integer(y[i]));
    auto lead = std::find_if(x.begin(), x.end(), [](const Integer &v) { return v != 0; });
    if (lead != x.end() && *lead < 0)
      for (auto &v : x)
        v = -v;
    if (!chosen || x < *chosen)
      chosen = std::move(x);
  }
  // The shortest reduced row is always a candidate, so ties is never empty.
  SvpResult out;
  out.coefficients = *chosen;
  out.vector.assign(b.ambient_dim(), 0);
  for (std::size_t i = 0; i < n; ++i)
    if (out.coefficients[i] != 0)
      detail::add_multiple(out.vector, b[i], Rational(out.coefficients[i]));
  out.norm_sq = e.best();
  return out;
}

// ---------------------------------------------------------------------------
// HKZ

namespace detail {

// Applies integer column operations to c, paired with row operations on
// rows[offset..], until c = e_1; afterwards rows[offset] equals the original
// combination sum_j c_j rows[offset + j]. Requires gcd(c) = 1.
inline void complete_unimodular(IntegerVector c, RationalMatrix &rows, std::size_t offset) {
  const std::size_t n = c.size();
  for (;;) {
    std::size_t s = n;
    for (std::size_t j = 0; j < n; ++j)
      if (c[j] != 0 && (s == n || abs(c[j]) < abs(c[s])))
        s = j;
    require(s != n, ErrorKind::numerical, "zero coefficient vector");
    bool single = true;
    for (std::size_t t = 0; t < n; ++t) {
      if (t == s || c[t] == 0)
        continue;
      Integer q;
      mpz_tdiv_q(q.get_mpz_t(), c[t].get_mpz_t(), c[s].get_mpz_t());
      c[t] -= q * c[s];
      add_multiple(rows[offset + s], rows[offset + t], Rational(q));
      if (c[t] != 0)
        single = false;
    }
    if (single)
      break;
  }
  std::size_t s = 0;
  while (c[s] == 0)
    ++s;
  require(abs(c[s]) == 1, ErrorKind::numerical, "coefficient vector is not primitive");
  if (c[s] < 0)
    for (auto &q : rows[offset + s])
      q = -q;
  std::swap(rows[offset], rows[offset + s]);
}

inline Basis hkz_primal(const Basis &b, const EnumerationOptions &opts) {
  RationalMatrix rows = b.rows();
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Basis proj = projected_basis(Basis(rows), i);
    const SvpResult sv = svp_enumerate(proj, opts);
    // Keep rows whose projection is already shortest.
    if (dot(proj[0], proj[0]) != sv.norm_sq)
      complete_unimodular(sv.coefficients, rows, i);
    size_reduce_row(rows, i);
  }
  for (std::size_t k = 1; k < n; ++k)
    size_reduce_row(rows, k);
  return Basis(std::move(rows));
}

} // namespace detail

/// HKZ reduction: every b_i* is a shortest vector of the lattice projected
/// orthogonally to b_1..b_{i-1}. With `dual` set, the reversed dual basis is
/// HKZ-reduced and mapped back.
inline Basis hkz_reduce(const Basis &b, bool dual, const EnumerationOptions &opts = {}) {
  require(b.rank() <= opts.cap, ErrorKind::cap, "enumeration cap exceeded");
  gso(b); // rank check
  if (!dual)
    return detail::hkz_primal(b, opts);
  const Basis reduced_dual = detail::hkz_primal(reversed(dual_basis(b)), opts);
  return dual_basis(reversed(reduced_dual));
}

/// Max |entry| of an integer matrix.
inline Integer max_abs(const IntegerMatrix &m) {
  Integer best = 0;
  for (const auto &r : m)
    for (const auto &v : r)
      if (abs(v) > best)
        best = abs(v);
  return best;
}

/// Solves target = U * source for an integer U when both are bases of the
/// same lattice; fails if the solution is not integral.
inline IntegerMatrix solve_transform(const Basis &target, const Basis &source) {
  require(target.rank() == source.rank() && target.ambient_dim() == source.ambient_dim(),
          ErrorKind::config, "basis shape mismatch");
  // U = T S^T (S S^T)^-1
  RationalMatrix st(source.ambient_dim(), RationalVector(source.rank()));
  for (std::size_t i = 0; i < source.rank(); ++i)
    for (std::size_t j = 0; j < source.ambient_dim(); ++j)
      st[j][i] = source[i][j];
  const RationalMatrix u =
      multiply(multiply(target.rows(), st), inverse(gram(source).entries));
  IntegerMatrix out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (const auto &q : u[i]) {
      require(is_integer(q), ErrorKind::numerical, "transform is not integral");
      out[i].push_back(q.get_num());
    }
  return out;
}

} // namespace kdsp
