#pragma once

// Symbolic Z-spin expansion of the K-DSP cost: each integer coefficient is
// replaced by its qudit operator Q = -1/2 - sum_w 2^{w-1} Z_w and the
// Leibniz determinant of the K x K sub-lattice Gram matrix is expanded into
// Z-monomials (Z^2 = 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/hamiltonian.hpp"
#include "kdsp/lattice.hpp"

namespace kdsp {

/// Sorted set of distinct qubit indices; empty = identity.
using Monomial = std::vector<std::uint32_t>;

class PauliPolynomial {
public:
  using TermMap = std::map<Monomial, double>;

  PauliPolynomial() = default;
  explicit PauliPolynomial(std::size_t n) : n_(n) {}

  static PauliPolynomial constant(std::size_t n, double c) {
    PauliPolynomial p(n);
    p.add({}, c);
    return p;
  }

  std::size_t qubits() const { return n_; }
  const TermMap &terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  void add(const Monomial &mono, double c) {
    if (c == 0.0)
      return;
    auto [it, inserted] = terms_.try_emplace(mono, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0)
        terms_.erase(it);
    }
  }

  PauliPolynomial &operator+=(const PauliPolynomial &o) {
    for (const auto &[m, c] : o.terms_)
      add(m, c);
    return *this;
  }

  PauliPolynomial &operator*=(double f) {
    if (f == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto &t : terms_)
      t.second *= f;
    return *this;
  }

  friend PauliPolynomial operator*(const PauliPolynomial &a, const PauliPolynomial &b) {
    PauliPolynomial out(std::max(a.n_, b.n_));
    Monomial prod;
    for (const auto &[ma, ca] : a.terms_)
      for (const auto &[mb, cb] : b.terms_) {
        prod.clear();
        std::set_symmetric_difference(ma.begin(), ma.end(), mb.begin(), mb.end(),
                                      std::back_inserter(prod));
        out.add(prod, ca * cb);
      }
    return out;
  }

  /// Drops coefficients with |c| <= rel_tol * max|c| (float cancellation residue).
  void normalize(double rel_tol = 1e-12) {
    double scale = 0.0;
    for (const auto &t : terms_)
      scale = std::max(scale, std::abs(t.second));
    std::erase_if(terms_, [&](const auto &t) { return std::abs(t.second) <= rel_tol * scale; });
  }

  std::size_t max_weight() const {
    std::size_t w = 0;
    for (const auto &t : terms_)
      w = std::max(w, t.first.size());
    return w;
  }

  /// Eigenvalue on computational basis state z (bit q of z is qubit q).
  double evaluate(std::uint64_t z) const {
    double s = 0.0;
    for (const auto &[m, c] : terms_) {
      bool odd = false;
      for (auto q : m)
        odd ^= ((z >> q) & 1u) != 0;
      s += odd ? -c : c;
    }
    return s;
  }

private:
  std::size_t n_ = 0;
  TermMap terms_;
};

/// Largest K handled symbolically (the Leibniz sum has K! terms).
inline constexpr std::size_t max_symbolic_k = 4;

/// Q for qudit (i, alpha): -1/2 - sum_w 2^{w-1} Z_{q(i, alpha, w)}.
inline PauliPolynomial qudit_operator(const EncodingConfig &cfg, std::size_t i, std::size_t alpha) {
  PauliPolynomial q(cfg.qubits());
  q.add({}, -0.5);
  for (std::size_t w = 0; w < cfg.qubits_per_qudit(); ++w)
    q.add({static_cast<std::uint32_t>(cfg.qubit(i, alpha, w))}, -std::ldexp(1.0, static_cast<int>(w) - 1));
  return q;
}

/// Permutations of 0..k-1 with their signs, in lexicographic order.
inline std::vector<std::pair<std::vector<std::size_t>, int>> signed_permutations(std::size_t k) {
  std::vector<std::size_t> tau(k);
  std::iota(tau.begin(), tau.end(), 0);
  std::vector<std::pair<std::vector<std::size_t>, int>> out;
  do {
    int inversions = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        inversions += tau[a] > tau[b];
    out.emplace_back(tau, inversions % 2 ? -1 : 1);
  } while (std::next_permutation(tau.begin(), tau.end()));
  return out;
}

/// sum_{tau in S_k} sgn(tau) prod_i (sum_{alpha,beta} Q^(i)_alpha Q^(tau i)_beta G_{alpha beta}).
inline PauliPolynomial build_pauli_cost(const GramMatrix &g, const EncodingConfig &cfg) {
  require(g.size() == cfg.n_dim, ErrorKind::config, "Gram matrix does not match n_dim");
  require(cfg.k <= max_symbolic_k, ErrorKind::cap,
          "k too large for symbolic expansion (limit " + std::to_string(max_symbolic_k) + ")");
  const std::size_t n = cfg.qubits();
  std::vector<std::vector<PauliPolynomial>> q(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i)
    for (std::size_t a = 0; a < cfg.n_dim; ++a)
      q[i].push_back(qudit_operator(cfg, i, a));

  // Inner products <v_i, v_j> as operators, built on demand.
  std::map<std::pair<std::size_t, std::size_t>, PauliPolynomial> inner;
  auto inner_product = [&](std::size_t i, std::size_t j) -> const PauliPolynomial & {
    auto key = std::minmax(i, j);
    auto it = inner.find(key);
    if (it != inner.end())
      return it->second;
    PauliPolynomial f(n);
    for (std::size_t a = 0; a < cfg.n_dim; ++a)
      for (std::size_t b = 0; b < cfg.n_dim; ++b) {
        const double gab = to_double(g(a, b));
        if (gab == 0.0)
          continue;
        PauliPolynomial t = q[key.first][a] * q[key.second][b];
        t *= gab;
        f += t;
      }
    return inner.emplace(key, std::move(f)).first->second;
  };

  PauliPolynomial total(n);
  for (const auto &[tau, sign] : signed_permutations(cfg.k)) {
    PauliPolynomial prod = PauliPolynomial::constant(n, static_cast<double>(sign));
    for (std::size_t i = 0; i < cfg.k && prod.size() > 0; ++i)
      prod = prod * inner_product(i, tau[i]);
    total += prod;
  }
  total.normalize();
  return total;
}

struct GateCount {
  std::size_t one_qubit = 0;
  std::size_t two_qubit = 0;
};

/// Gates for one QAOA layer: each weight-w monomial (w >= 1) costs one Rz and
/// 2(w - 1) CNOTs in a ladder; the transverse-field mixer adds n one-qubit
/// rotations.
inline GateCount count_gates(const PauliPolynomial &poly) {
  GateCount g;
  for (const auto &[m, c] : poly.terms()) {
    if (m.empty() || c == 0.0)
      continue;
    g.one_qubit += 1;
    g.two_qubit += 2 * (m.size() - 1);
  }
  g.one_qubit += poly.qubits();
  return g;
}

} // namespace kdsp
