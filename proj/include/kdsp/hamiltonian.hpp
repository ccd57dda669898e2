#pragma once

// Diagonal K-DSP cost over the binary-encoded coefficient space: qudit
// decoding, exact squared covolumes, the full diagonal table, ground-state
// penalization, and spectral gap bound / estimate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/lattice.hpp"

namespace kdsp {

/// Qubit layout: vector i, qudit alpha, bit w -> (i * n_dim + alpha) * (m + 1) + w.
/// Bit value 1 <-> Z eigenvalue -1 <-> O-value 1.
struct EncodingConfig {
  std::size_t k = 0;
  std::size_t n_dim = 0;
  int m = 0;

  EncodingConfig() = default;
  EncodingConfig(std::size_t k_, std::size_t n_dim_, int m_) : k(k_), n_dim(n_dim_), m(m_) {
    require(k >= 1, ErrorKind::config, "k must be >= 1");
    require(n_dim >= 1, ErrorKind::config, "n_dim must be >= 1");
    require(m >= 0 && m <= 30, ErrorKind::config, "m must lie in [0, 30]");
  }

  std::size_t qubits_per_qudit() const { return static_cast<std::size_t>(m) + 1; }
  std::size_t qubits() const { return k * n_dim * qubits_per_qudit(); }
  std::size_t qubit(std::size_t i, std::size_t alpha, std::size_t w) const {
    return (i * n_dim + alpha) * qubits_per_qudit() + w;
  }
  std::int64_t lowest() const { return -(std::int64_t{1} << m); }
  std::int64_t highest() const { return (std::int64_t{1} << m) - 1; }
};

/// Default cap on 2^n-sized tables.
inline constexpr std::size_t default_statevector_cap = 24;

inline IntMatrix decode_coefficients(std::uint64_t z, const EncodingConfig &cfg) {
  IntMatrix x(cfg.k, std::vector<std::int64_t>(cfg.n_dim, 0));
  const std::size_t q = cfg.qubits_per_qudit();
  for (std::size_t i = 0; i < cfg.k; ++i)
    for (std::size_t a = 0; a < cfg.n_dim; ++a) {
      const std::size_t base = cfg.qubit(i, a, 0);
      const std::uint64_t bits = (z >> base) & ((std::uint64_t{1} << q) - 1);
      x[i][a] = static_cast<std::int64_t>(bits) + cfg.lowest();
    }
  return x;
}

/// Bitstring given as one 0/1 entry per qubit (entry q is qubit q).
inline IntMatrix decode_coefficients(const std::vector<std::uint8_t> &bits,
                                     const EncodingConfig &cfg) {
  require(bits.size() == cfg.qubits(), ErrorKind::config, "bitstring length mismatch");
  IntMatrix x(cfg.k, std::vector<std::int64_t>(cfg.n_dim, 0));
  for (std::size_t i = 0; i < cfg.k; ++i)
    for (std::size_t a = 0; a < cfg.n_dim; ++a) {
      std::int64_t v = cfg.lowest();
      for (std::size_t w = 0; w < cfg.qubits_per_qudit(); ++w)
        if (bits[cfg.qubit(i, a, w)])
          v += std::int64_t{1} << w;
      x[i][a] = v;
    }
  return x;
}

/// Inverse of decode_coefficients; every entry must lie in [-2^m, 2^m - 1].
inline std::uint64_t encode_coefficients(const IntMatrix &x, const EncodingConfig &cfg) {
  require(x.size() == cfg.k, ErrorKind::config, "coefficient matrix shape mismatch");
  std::uint64_t z = 0;
  for (std::size_t i = 0; i < cfg.k; ++i) {
    require(x[i].size() == cfg.n_dim, ErrorKind::config, "coefficient matrix shape mismatch");
    for (std::size_t a = 0; a < cfg.n_dim; ++a) {
      require(x[i][a] >= cfg.lowest() && x[i][a] <= cfg.highest(), ErrorKind::config,
              "coefficient outside the encodable range");
      z |= static_cast<std::uint64_t>(x[i][a] - cfg.lowest()) << cfg.qubit(i, a, 0);
    }
  }
  return z;
}

namespace detail {

using i128 = __int128;

inline bool mul_ok(i128 a, i128 b, i128 &out) { return !__builtin_mul_overflow(a, b, &out); }
inline bool add_ok(i128 a, i128 b, i128 &out) { return !__builtin_add_overflow(a, b, &out); }
inline bool sub_ok(i128 a, i128 b, i128 &out) { return !__builtin_sub_overflow(a, b, &out); }

inline constexpr std::size_t max_fast_k = 8;
inline constexpr std::size_t max_fast_n = 64;

// Bareiss fraction-free determinant of the leading n x n block. Returns false
// on 128-bit overflow.
inline bool bareiss_i128(i128 (&a)[max_fast_k][max_fast_k], std::size_t n, i128 &det) {
  i128 prev = 1;
  int sign = 1;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    if (a[c][c] == 0) {
      std::size_t r = c + 1;
      while (r < n && a[r][c] == 0)
        ++r;
      if (r == n) {
        det = 0;
        return true;
      }
      for (std::size_t j = 0; j < n; ++j)
        std::swap(a[r][j], a[c][j]);
      sign = -sign;
    }
    for (std::size_t i = c + 1; i < n; ++i)
      for (std::size_t j = c + 1; j < n; ++j) {
        i128 t1, t2, d;
        if (!mul_ok(a[i][j], a[c][c], t1) || !mul_ok(a[i][c], a[c][j], t2) ||
            !sub_ok(t1, t2, d))
          return false;
        a[i][j] = d / prev;
      }
    prev = a[c][c];
  }
  det = sign * a[n - 1][n - 1];
  return true;
}

inline Integer bareiss_mpz(std::vector<std::vector<Integer>> a) {
  const std::size_t n = a.size();
  Integer prev = 1;
  int sign = 1;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    if (a[c][c] == 0) {
      std::size_t r = c + 1;
      while (r < n && a[r][c] == 0)
        ++r;
      if (r == n)
        return 0;
      std::swap(a[r], a[c]);
      sign = -sign;
    }
    for (std::size_t i = c + 1; i < n; ++i)
      for (std::size_t j = c + 1; j < n; ++j) {
        Integer t = a[i][j] * a[c][c] - a[i][c] * a[c][j];
        mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    prev = a[c][c];
  }
  return sign * a[n - 1][n - 1];
}

inline Integer to_integer(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  Integer hi(static_cast<unsigned long>(u >> 64));
  Integer lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
  Integer r = (hi << 64) + lo;
  return neg ? Integer(-r) : r;
}

} // namespace detail

/// Exact evaluator of det(X G X^T) for decoded coefficient matrices X.
/// The Gram matrix is scaled to integers by its common denominator D, so the
/// scaled determinant equals D^k times the squared covolume.
class CostEvaluator {
public:
  CostEvaluator(const GramMatrix &g, const EncodingConfig &cfg) : cfg_(cfg) {
    require(g.size() == cfg.n_dim, ErrorKind::config, "Gram matrix does not match n_dim");
    scale_ = detail::common_denominator(g.entries);
    const std::size_t n = g.size();
    gs_.assign(n, std::vector<Integer>(n));
    gs_small_.assign(n, std::vector<std::int64_t>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational v = g(i, j) * scale_;
        gs_[i][j] = v.get_num();
        if (!gs_[i][j].fits_slong_p())
          fast_ = false;
        else
          gs_small_[i][j] = gs_[i][j].get_si();
      }
    if (cfg.k > detail::max_fast_k || cfg.n_dim > detail::max_fast_n)
      fast_ = false;
    mpz_pow_ui(scale_k_.get_mpz_t(), scale_.get_mpz_t(), cfg.k);
    scale_k_d_ = scale_k_.get_d();
  }

  const EncodingConfig &config() const { return cfg_; }
  /// D^k, the factor between scaled determinants and squared covolumes.
  const Integer &scale() const { return scale_k_; }

  /// det(X (D G) X^T) exactly.
  Integer scaled(std::uint64_t z) const {
    detail::i128 v;
    if (scaled_fast(z, v))
      return detail::to_integer(v);
    return scaled_slow(decode_coefficients(z, cfg_));
  }

  Integer scaled(const IntMatrix &x) const {
    detail::i128 v;
    if (scaled_fast(x, v))
      return detail::to_integer(v);
    return scaled_slow(x);
  }

  /// Fast path; false when 128-bit arithmetic would overflow.
  bool scaled_fast(std::uint64_t z, detail::i128 &out) const {
    if (!fast_)
      return false;
    std::int64_t x[detail::max_fast_k][detail::max_fast_n];
    const std::size_t q = cfg_.qubits_per_qudit();
    const std::uint64_t mask = (std::uint64_t{1} << q) - 1;
    for (std::size_t i = 0; i < cfg_.k; ++i)
      for (std::size_t a = 0; a < cfg_.n_dim; ++a)
        x[i][a] = static_cast<std::int64_t>((z >> cfg_.qubit(i, a, 0)) & mask) + cfg_.lowest();
    return fast_det([&](std::size_t i, std::size_t a) { return x[i][a]; }, out);
  }

  bool scaled_fast(const IntMatrix &x, detail::i128 &out) const {
    if (!fast_)
      return false;
    return fast_det([&](std::size_t i, std::size_t a) { return x[i][a]; }, out);
  }

  Rational exact(std::uint64_t z) const { return unscale(scaled(z)); }
  Rational exact(const IntMatrix &x) const { return unscale(scaled(x)); }
  Rational unscale(const Integer &v) const {
    Rational q(v, scale_k_);
    q.canonicalize();
    return q;
  }

  double value(std::uint64_t z) const {
    detail::i128 v;
    if (scaled_fast(z, v))
      return static_cast<double>(v) / scale_k_d_;
    return exact(z).get_d();
  }

private:
  template <class Get> bool fast_det(Get get, detail::i128 &out) const {
    const std::size_t k = cfg_.k, n = cfg_.n_dim;
    detail::i128 xg[detail::max_fast_n];
    detail::i128 m[detail::max_fast_k][detail::max_fast_k];
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t b = 0; b < n; ++b) {
        detail::i128 s = 0;
        for (std::size_t a = 0; a < n; ++a) {
          detail::i128 t;
          if (!detail::mul_ok(get(i, a), gs_small_[a][b], t) || !detail::add_ok(s, t, s))
            return false;
        }
        xg[b] = s;
      }
      for (std::size_t j = i; j < k; ++j) {
        detail::i128 s = 0;
        for (std::size_t b = 0; b < n; ++b) {
          detail::i128 t;
          if (!detail::mul_ok(xg[b], get(j, b), t) || !detail::add_ok(s, t, s))
            return false;
        }
        m[i][j] = m[j][i] = s;
      }
    }
    return detail::bareiss_i128(m, k, out);
  }

  Integer scaled_slow(const IntMatrix &x) const {
    const std::size_t k = cfg_.k, n = cfg_.n_dim;
    std::vector<std::vector<Integer>> m(k, std::vector<Integer>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b)
            m[i][j] += Integer(static_cast<long>(x[i][a])) * gs_[a][b] *
                       Integer(static_cast<long>(x[j][b]));
    return detail::bareiss_mpz(std::move(m));
  }

  EncodingConfig cfg_;
  Integer scale_;
  Integer scale_k_;
  double scale_k_d_ = 1.0;
  bool fast_ = true;
  std::vector<std::vector<Integer>> gs_;
  std::vector<std::vector<std::int64_t>> gs_small_;
};

/// det(X G X^T) for the decoded bitstring, exact.
inline Rational eval_cost_direct(std::uint64_t z, const GramMatrix &g, const EncodingConfig &cfg) {
  return CostEvaluator(g, cfg).exact(z);
}

inline Rational eval_cost_direct(const std::vector<std::uint8_t> &bits, const GramMatrix &g,
                                 const EncodingConfig &cfg) {
  return CostEvaluator(g, cfg).exact(decode_coefficients(bits, cfg));
}

// ---------------------------------------------------------------------------
// Diagonal table

struct PenaltyScheme {
  enum class Kind { exp, quadratic };
  Kind kind = Kind::exp;
  double r = 0; ///< exp: amplitude
  double s = 0; ///< exp: decay rate
  double e = 0; ///< quadratic: target energy
};

struct DiagonalCost {
  std::size_t n = 0;
  std::vector<double> values;
  bool penalized = false;
  std::optional<PenaltyScheme> penalty;
  /// Unpenalized squared covolumes; kept only when `penalized`.
  std::vector<double> raw;

  const std::vector<double> &unpenalized() const { return penalized ? raw : values; }
};

namespace detail {

// Splits [0, total) into contiguous chunks processed on worker threads.
template <class Fn> void parallel_chunks(std::uint64_t total, Fn fn) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (total < (1u << 14))
    workers = 1;
  if (workers == 1) {
    fn(0, total, 0u);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(total, lo + chunk);
    if (lo >= hi)
      break;
    pool.emplace_back([=, &fn] { fn(lo, hi, w); });
  }
  for (auto &t : pool)
    t.join();
}

inline unsigned worker_count(std::uint64_t total) {
  return total < (1u << 14) ? 1u : std::max(1u, std::thread::hardware_concurrency());
}

} // namespace detail

inline DiagonalCost diagonal_vector(const GramMatrix &g, const EncodingConfig &cfg,
                                    std::size_t cap = default_statevector_cap) {
  const std::size_t n = cfg.qubits();
  require(n <= cap && n < 63, ErrorKind::cap,
          "diagonal of " + std::to_string(n) + " qubits exceeds the cap of " +
              std::to_string(cap));
  const CostEvaluator eval(g, cfg);
  DiagonalCost d;
  d.n = n;
  d.values.assign(std::size_t{1} << n, 0.0);
  detail::parallel_chunks(d.values.size(), [&](std::uint64_t lo, std::uint64_t hi, unsigned) {
    for (std::uint64_t z = lo; z < hi; ++z)
      d.values[z] = eval.value(z);
  });
  return d;
}

inline DiagonalCost penalize(const DiagonalCost &diag, const PenaltyScheme &scheme) {
  require(!diag.penalized, ErrorKind::config, "diagonal is already penalized");
  if (scheme.kind == PenaltyScheme::Kind::exp)
    require(scheme.r > 0 && scheme.s > 0, ErrorKind::config,
            "exp penalty needs r > 0 and s > 0");
  else
    require(scheme.e > 0, ErrorKind::config, "quadratic penalty needs E > 0");
  DiagonalCost out;
  out.n = diag.n;
  out.penalized = true;
  out.penalty = scheme;
  out.raw = diag.values;
  out.values.resize(diag.values.size());
  for (std::size_t z = 0; z < diag.values.size(); ++z) {
    const double v = diag.values[z];
    out.values[z] = scheme.kind == PenaltyScheme::Kind::exp
                        ? v + scheme.r * std::exp(-scheme.s * v)
                        : (v - scheme.e) * (v - scheme.e);
  }
  return out;
}

/// r = 2 * gap_estimate, s = ln 4 / gap_lower. Trivial states then sit at
/// 2 * gap_estimate while first excited states gain at most gap_estimate / 2.
inline PenaltyScheme default_exp_penalty(double gap_estimate, double gap_lower) {
  require(gap_estimate > 0 && gap_lower > 0, ErrorKind::config,
          "penalty tuning needs positive gap values");
  PenaltyScheme p;
  p.kind = PenaltyScheme::Kind::exp;
  p.r = 2.0 * gap_estimate;
  p.s = std::log(4.0) / gap_lower;
  return p;
}

/// Smallest strictly positive unpenalized value; nullopt when all are zero.
inline std::optional<double> min_nonzero(const DiagonalCost &diag) {
  std::optional<double> best;
  for (double v : diag.unpenalized())
    if (v > 0 && (!best || v < *best))
      best = v;
  return best;
}

/// Upper bound alpha^{K(N-1)} * vol(L)^{2K} on the first excited energy.
/// Requires an LLL-reduced basis for the given delta.
inline double spectral_gap_bound(const Basis &basis, std::size_t k,
                                 const Rational &delta = default_delta()) {
  check_delta(delta);
  require(k >= 1 && k <= basis.rank(), ErrorKind::config, "k out of range");
  require(is_lll_reduced(basis, delta), ErrorKind::config, "basis is not LLL-reduced");
  const double alpha = lll_alpha(delta);
  const double n = static_cast<double>(basis.rank());
  const double kk = static_cast<double>(k);
  return std::pow(alpha, kk * (n - 1.0)) * std::pow(to_double(covolume_sq(basis)), kk);
}

/// Binary search for the first excited energy using the threshold oracle
/// "some state has 0 < value <= t". Result is within `tol` above the gap.
inline double estimate_gap(const DiagonalCost &diag, double upper, double tol) {
  require(tol > 0, ErrorKind::config, "tolerance must be positive");
  const auto &vals = diag.unpenalized();
  auto oracle = [&](double t) {
    return std::any_of(vals.begin(), vals.end(), [t](double v) { return v > 0 && v <= t; });
  };
  if (!(upper > 0) || !oracle(upper))
    fail(ErrorKind::numerical, "gap search failed: upper bound lies below the spectral gap");
  double lo = 0.0, hi = upper;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (oracle(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

} // namespace kdsp
