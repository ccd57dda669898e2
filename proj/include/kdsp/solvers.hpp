#pragma once

// Search backends over the encoded coefficient box: exhaustive scan (the
// exact oracle), simulated Grover amplitude amplification, and the Grover
// runtime estimate.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/hamiltonian.hpp"
#include "kdsp/preprocess.hpp"
#include "kdsp/rng.hpp"

namespace kdsp {

struct SolveResult {
  Rational min_vol_sq;
  std::vector<IntMatrix> solutions;       ///< optimal X, ascending bitstring order
  std::vector<std::uint64_t> bitstrings;  ///< bitstrings of `solutions`
  std::uint64_t m_count = 0;              ///< number of optimal bitstrings
  std::uint64_t states_scanned = 0;
};

struct SolveOptions {
  std::size_t qubit_cap = 26;
  std::size_t listing_cap = 64;
};

namespace detail {

template <class T> struct ScanChunk {
  bool have = false;
  T best{};
  std::uint64_t count = 0;
  std::vector<std::uint64_t> listed;
};

// Returns false if `eval` reported failure for any state.
template <class T, class Eval>
bool scan_minimum(std::uint64_t total, std::size_t listing_cap, Eval eval, ScanChunk<T> &out) {
  const unsigned workers = worker_count(total);
  std::vector<ScanChunk<T>> parts(workers);
  std::vector<char> ok(workers, 1);
  parallel_chunks(total, [&](std::uint64_t lo, std::uint64_t hi, unsigned w) {
    ScanChunk<T> &c = parts[w];
    T v{};
    for (std::uint64_t z = lo; z < hi; ++z) {
      if (!eval(z, v)) {
        ok[w] = 0;
        return;
      }
      if (v <= 0)
        continue;
      if (!c.have || v < c.best) {
        c.have = true;
        c.best = v;
        c.count = 0;
        c.listed.clear();
      }
      if (v == c.best) {
        ++c.count;
        if (c.listed.size() < listing_cap)
          c.listed.push_back(z);
      }
    }
  });
  for (char f : ok)
    if (!f)
      return false;
  // Chunks cover ascending ranges, so merging in order keeps the listing sorted.
  for (auto &c : parts) {
    if (!c.have)
      continue;
    if (!out.have || c.best < out.best) {
      out = std::move(c);
      continue;
    }
    if (c.best == out.best) {
      out.count += c.count;
      for (auto z : c.listed)
        if (out.listed.size() < listing_cap)
          out.listed.push_back(z);
    }
  }
  return true;
}

} // namespace detail

/// Exhaustive scan of all 2^n encoded states for the minimal nonzero squared
/// covolume, the optimal coefficient matrices and their count M.
inline SolveResult brute_force_solve(const GramMatrix &g, const EncodingConfig &cfg,
                                     const SolveOptions &opts = {}) {
  const std::size_t n = cfg.qubits();
  require(n <= opts.qubit_cap && n < 63, ErrorKind::cap,
          "exhaustive search over " + std::to_string(n) + " qubits exceeds the cap of " +
              std::to_string(opts.qubit_cap));
  const CostEvaluator eval(g, cfg);
  const std::uint64_t total = std::uint64_t{1} << n;

  SolveResult res;
  res.states_scanned = total;
  bool found = false;
  std::vector<std::uint64_t> listed;

  detail::ScanChunk<detail::i128> fast;
  if (detail::scan_minimum<detail::i128>(
          total, opts.listing_cap,
          [&](std::uint64_t z, detail::i128 &v) { return eval.scaled_fast(z, v); }, fast)) {
    found = fast.have;
    if (found) {
      res.min_vol_sq = eval.unscale(detail::to_integer(fast.best));
      res.m_count = fast.count;
      listed = std::move(fast.listed);
    }
  } else {
    detail::ScanChunk<Integer> slow;
    detail::scan_minimum<Integer>(
        total, opts.listing_cap,
        [&](std::uint64_t z, Integer &v) {
          v = eval.scaled(z);
          return true;
        },
        slow);
    found = slow.have;
    if (found) {
      res.min_vol_sq = eval.unscale(slow.best);
      res.m_count = slow.count;
      listed = std::move(slow.listed);
    }
  }
  require(found, ErrorKind::numerical, "no nontrivial sub-lattice in box");
  res.bitstrings = listed;
  for (auto z : listed)
    res.solutions.push_back(decode_coefficients(z, cfg));
  return res;
}

/// Preprocess, solve the reduced instance exhaustively with width m, and lift
/// the first optimal solution back to the input lattice.
struct PipelineResult {
  PreprocessPlan plan;
  std::optional<SolveResult> reduced; ///< empty when preprocessing solved the instance
  Basis solution;
  Rational vol_sq;
};

inline PipelineResult preprocess_and_solve(const Basis &b, std::size_t k, int m,
                                           const Rational &delta = default_delta(),
                                           const SolveOptions &opts = {}) {
  PipelineResult out;
  out.plan = preprocess(b, k, delta);
  if (out.plan.solved()) {
    out.solution = out.plan.b_p;
  } else {
    const EncodingConfig enc(out.plan.k_reduced, out.plan.b_p.rank(), m);
    out.reduced = brute_force_solve(gram(out.plan.b_p), enc, opts);
    const Basis sub(multiply(to_rational(out.reduced->solutions.front()), out.plan.b_p.rows()));
    out.solution = lift_solution(out.plan, sub);
  }
  out.vol_sq = covolume_sq(out.solution);
  return out;
}

// ---------------------------------------------------------------------------
// Grover

/// Marks states with 0 < value <= threshold (relative slack 1e-12).
struct ThresholdTarget {
  double threshold = 0;
  bool operator()(double v) const {
    return v > 0 && v <= threshold + 1e-12 * std::max(1.0, std::abs(threshold));
  }
};

struct GroverResult {
  double success_prob = 0;
  std::uint64_t sample = 0;
  std::size_t iterations = 0;
  std::uint64_t marked = 0; ///< M
  std::uint64_t space = 0;  ///< S = 2^n
  /// Success probability after j = 0..iterations iterations.
  std::vector<double> curve;
};

inline constexpr std::size_t grover_qubit_cap = 20;

inline std::size_t default_grover_iterations(std::uint64_t space, std::uint64_t marked) {
  return static_cast<std::size_t>(
      std::floor(std::numbers::pi / 4.0 * std::sqrt(static_cast<double>(space) / marked)));
}

/// Exact amplitude amplification on 2^n real amplitudes: uniform start,
/// phase flip on marked states, inversion about the mean.
inline GroverResult grover_simulate(const DiagonalCost &diag, ThresholdTarget target,
                                    std::optional<std::size_t> iterations, std::uint64_t seed) {
  require(diag.n <= grover_qubit_cap, ErrorKind::cap,
          "Grover simulation is limited to " + std::to_string(grover_qubit_cap) + " qubits");
  const auto &vals = diag.unpenalized();
  const std::size_t size = vals.size();
  std::vector<char> marked(size);
  GroverResult r;
  r.space = size;
  for (std::size_t z = 0; z < size; ++z)
    if ((marked[z] = target(vals[z])))
      ++r.marked;
  require(r.marked > 0, ErrorKind::numerical, "empty target set");
  r.iterations = iterations.value_or(default_grover_iterations(r.space, r.marked));

  std::vector<double> amp(size, 1.0 / std::sqrt(static_cast<double>(size)));
  auto success = [&] {
    double p = 0;
    for (std::size_t z = 0; z < size; ++z)
      if (marked[z])
        p += amp[z] * amp[z];
    return p;
  };
  r.curve.push_back(success());
  for (std::size_t j = 0; j < r.iterations; ++j) {
    double mean = 0;
    for (std::size_t z = 0; z < size; ++z) {
      if (marked[z])
        amp[z] = -amp[z];
      mean += amp[z];
    }
    mean /= static_cast<double>(size);
    for (auto &a : amp)
      a = 2.0 * mean - a;
    r.curve.push_back(success());
  }
  r.success_prob = r.curve.back();

  std::vector<double> cdf(size);
  double acc = 0;
  for (std::size_t z = 0; z < size; ++z)
    cdf[z] = (acc += amp[z] * amp[z]);
  Rng rng(seed);
  r.sample = sample_cdf(cdf, rng.uniform());
  return r;
}

/// sin^2((2j + 1) theta), theta = asin(sqrt(M / S)).
inline double grover_closed_form(std::uint64_t space, std::uint64_t marked, std::size_t j) {
  const double theta = std::asin(std::sqrt(static_cast<double>(marked) / space));
  const double s = std::sin((2.0 * j + 1.0) * theta);
  return s * s;
}

/// log2 of the Grover query count (5 K N / 2) log2 N - (1/2) log2 M.
inline double grover_runtime_estimate(std::size_t n_dim, std::size_t k, double m_count) {
  require(m_count >= 1, ErrorKind::config, "solution count must be >= 1");
  const double n = static_cast<double>(n_dim);
  return 2.5 * static_cast<double>(k) * n * std::log2(n) - 0.5 * std::log2(m_count);
}

} // namespace kdsp
