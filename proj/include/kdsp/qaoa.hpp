#pragma once

// Statevector QAOA for diagonal cost tables: cost-phase layers alternating
// with a transverse-field mixer, finite-difference training with restarts,
// and seeded Z-basis sampling reports.

#include <cmath>
#include <complex>
#include <cstdint>
#include <algorithm>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kdsp/error.hpp"
#include "kdsp/hamiltonian.hpp"
#include "kdsp/rng.hpp"

namespace kdsp {

struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  std::size_t layers() const { return gammas.size(); }
  void check() const {
    require(gammas.size() == betas.size(), ErrorKind::config,
            "gamma and beta lists differ in length");
  }
};

using Amplitude = std::complex<double>;

struct Statevector {
  std::size_t n = 0;
  std::vector<Amplitude> amplitudes;

  double norm_sq() const {
    double s = 0;
    for (const auto &a : amplitudes)
      s += std::norm(a);
    return s;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amplitudes.size());
    for (std::size_t z = 0; z < p.size(); ++z)
      p[z] = std::norm(amplitudes[z]);
    return p;
  }
};

/// Precomputed view of a diagonal for repeated circuit evaluation: the cost
/// phase is computed once per distinct energy level instead of per amplitude.
class QaoaSimulator {
public:
  explicit QaoaSimulator(const DiagonalCost &diag, std::size_t cap = default_statevector_cap)
      : diag_(&diag) {
    require(diag.n <= cap, ErrorKind::cap,
            "statevector of " + std::to_string(diag.n) + " qubits exceeds the cap of " +
                std::to_string(cap));
    std::unordered_map<double, std::uint32_t> index;
    level_of_.resize(diag.values.size());
    for (std::size_t z = 0; z < diag.values.size(); ++z) {
      auto [it, inserted] = index.try_emplace(diag.values[z], static_cast<std::uint32_t>(levels_.size()));
      if (inserted)
        levels_.push_back(diag.values[z]);
      level_of_[z] = it->second;
    }
  }

  std::size_t qubits() const { return diag_->n; }

  Statevector state(const QaoaParams &params) const {
    params.check();
    const std::size_t size = diag_->values.size();
    Statevector psi;
    psi.n = diag_->n;
    psi.amplitudes.assign(size, Amplitude(1.0 / std::sqrt(static_cast<double>(size)), 0.0));
    std::vector<Amplitude> phase(levels_.size());
    for (std::size_t t = 0; t < params.layers(); ++t) {
      for (std::size_t l = 0; l < levels_.size(); ++l)
        phase[l] = std::polar(1.0, -params.gammas[t] * levels_[l]);
      for (std::size_t z = 0; z < size; ++z)
        psi.amplitudes[z] *= phase[level_of_[z]];
      apply_mixer(psi, params.betas[t]);
    }
    return psi;
  }

  double expectation(const Statevector &psi) const {
    double e = 0;
    for (std::size_t z = 0; z < psi.amplitudes.size(); ++z)
      e += std::norm(psi.amplitudes[z]) * diag_->values[z];
    return e;
  }

  double cost(const QaoaParams &params) const { return expectation(state(params)); }

  /// exp(-i beta X) on every qubit.
  static void apply_mixer(Statevector &psi, double beta) {
    const double c = std::cos(beta), s = std::sin(beta);
    const std::size_t size = psi.amplitudes.size();
    auto *a = psi.amplitudes.data();
    for (std::size_t q = 0; q < psi.n; ++q) {
      const std::size_t bit = std::size_t{1} << q;
      for (std::size_t base = 0; base < size; base += 2 * bit)
        for (std::size_t z = base; z < base + bit; ++z) {
          const Amplitude x = a[z], y = a[z + bit];
          a[z] = Amplitude(c * x.real() + s * y.imag(), c * x.imag() - s * y.real());
          a[z + bit] = Amplitude(c * y.real() + s * x.imag(), c * y.imag() - s * x.real());
        }
    }
  }

private:
  const DiagonalCost *diag_;
  std::vector<double> levels_;
  std::vector<std::uint32_t> level_of_;
};

inline Statevector qaoa_state(const DiagonalCost &diag, const QaoaParams &params,
                              std::size_t cap = default_statevector_cap) {
  return QaoaSimulator(diag, cap).state(params);
}

inline double expectation(const Statevector &psi, const DiagonalCost &diag) {
  require(psi.n == diag.n, ErrorKind::config, "statevector and diagonal sizes differ");
  double e = 0;
  for (std::size_t z = 0; z < psi.amplitudes.size(); ++z)
    e += std::norm(psi.amplitudes[z]) * diag.values[z];
  return e;
}

// ---------------------------------------------------------------------------
// Training

enum class UpdateRule { adam, gradient_descent };

struct TrainingOptions {
  std::size_t max_epochs = 1000;
  double learning_rate = 0.001;
  double tol = 1e-6;
  std::size_t restarts = 4;
  double fd_step = 1e-5;
  UpdateRule rule = UpdateRule::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t statevector_cap = default_statevector_cap;
};

struct TrainingRun {
  QaoaParams params;            ///< best-seen parameters
  double expectation = 0;       ///< cost at `params`
  std::vector<double> trace;    ///< cost per epoch, entry 0 = initial
  std::size_t epochs = 0;
};

struct TrainingResult {
  QaoaParams params;
  double expectation = 0;
  std::size_t best_restart = 0;
  std::vector<TrainingRun> runs;
};

namespace detail {

inline TrainingRun train_once(const QaoaSimulator &sim, std::size_t p,
                              const TrainingOptions &opts, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(2 * p);
  for (auto &t : theta)
    t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  auto unpack = [p](const std::vector<double> &th) {
    QaoaParams q;
    q.gammas.assign(th.begin(), th.begin() + p);
    q.betas.assign(th.begin() + p, th.end());
    return q;
  };

  TrainingRun run;
  double current = sim.cost(unpack(theta));
  run.trace.push_back(current);
  run.params = unpack(theta);
  run.expectation = current;

  std::vector<double> grad(theta.size()), m1(theta.size(), 0.0), m2(theta.size(), 0.0);
  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double keep = theta[i];
      theta[i] = keep + opts.fd_step;
      const double up = sim.cost(unpack(theta));
      theta[i] = keep - opts.fd_step;
      const double down = sim.cost(unpack(theta));
      theta[i] = keep;
      grad[i] = (up - down) / (2.0 * opts.fd_step);
    }
    if (opts.rule == UpdateRule::adam) {
      const double b1t = 1.0 - std::pow(opts.adam_beta1, static_cast<double>(epoch));
      const double b2t = 1.0 - std::pow(opts.adam_beta2, static_cast<double>(epoch));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m1[i] = opts.adam_beta1 * m1[i] + (1.0 - opts.adam_beta1) * grad[i];
        m2[i] = opts.adam_beta2 * m2[i] + (1.0 - opts.adam_beta2) * grad[i] * grad[i];
        theta[i] -= opts.learning_rate * (m1[i] / b1t) / (std::sqrt(m2[i] / b2t) + opts.adam_eps);
      }
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] -= opts.learning_rate * grad[i];
    }
    const double next = sim.cost(unpack(theta));
    run.trace.push_back(next);
    run.epochs = epoch;
    if (next < run.expectation) {
      run.expectation = next;
      run.params = unpack(theta);
    }
    const bool converged = std::abs(next - current) < opts.tol;
    current = next;
    if (converged)
      break;
  }
  return run;
}

} // namespace detail

/// Multi-restart training of (gamma, beta) by minimizing the energy
/// expectation. Restart r is seeded with derive_seed(seed, r); the best run
/// (lowest expectation, earliest on ties) is returned.
inline TrainingResult train_qaoa(const DiagonalCost &diag, std::size_t p,
                                 const TrainingOptions &opts, std::uint64_t seed) {
  require(p >= 1, ErrorKind::config, "p must be >= 1 for training");
  require(opts.restarts >= 1, ErrorKind::config, "at least one restart is required");
  require(opts.learning_rate > 0 && opts.tol > 0 && opts.fd_step > 0, ErrorKind::config,
          "learning rate, tolerance and step must be positive");
  const QaoaSimulator sim(diag, opts.statevector_cap);
  std::vector<std::future<TrainingRun>> jobs;
  for (std::size_t r = 0; r < opts.restarts; ++r)
    jobs.push_back(std::async(std::launch::async, [&, r] {
      return detail::train_once(sim, p, opts, derive_seed(seed, r));
    }));
  TrainingResult out;
  for (auto &j : jobs)
    out.runs.push_back(j.get());
  for (std::size_t r = 1; r < out.runs.size(); ++r)
    if (out.runs[r].expectation < out.runs[out.best_restart].expectation)
      out.best_restart = r;
  out.params = out.runs[out.best_restart].params;
  out.expectation = out.runs[out.best_restart].expectation;
  return out;
}

inline QaoaParams optimize_params(const DiagonalCost &diag, std::size_t p,
                                  const TrainingOptions &opts, std::uint64_t seed) {
  return train_qaoa(diag, p, opts, seed).params;
}

// ---------------------------------------------------------------------------
// Sampling

struct RunReport {
  std::size_t n = 0;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  std::string generator = generator_name;
  QaoaParams params;
  std::map<std::uint64_t, std::uint64_t> counts;
  double energy_mean = 0;      ///< sampled mean of unpenalized vol^2
  double exact_expectation = 0; ///< <psi|H|psi> of the (possibly penalized) diagonal
  std::optional<double> penalized_energy_mean;
  std::vector<std::pair<double, std::uint64_t>> histogram; ///< unpenalized vol^2 bins
  std::vector<std::uint64_t> bin_states; ///< one sampled bitstring per histogram bin
  std::vector<std::pair<double, std::uint64_t>> penalized_histogram;
  std::vector<std::pair<double, double>> prob_below; ///< ascending thresholds
};

inline RunReport sample_report(const DiagonalCost &diag, const QaoaParams &params,
                               std::size_t shots, std::vector<double> thresholds,
                               std::uint64_t seed, std::size_t cap = default_statevector_cap) {
  require(shots >= 1, ErrorKind::config, "shots must be >= 1");
  const QaoaSimulator sim(diag, cap);
  const Statevector psi = sim.state(params);

  RunReport rep;
  rep.n = diag.n;
  rep.shots = shots;
  rep.seed = seed;
  rep.params = params;
  rep.exact_expectation = sim.expectation(psi);

  std::vector<double> cdf(psi.amplitudes.size());
  double acc = 0;
  for (std::size_t z = 0; z < cdf.size(); ++z)
    cdf[z] = (acc += std::norm(psi.amplitudes[z]));
  Rng rng(seed);
  for (std::size_t s = 0; s < shots; ++s)
    ++rep.counts[sample_cdf(cdf, rng.uniform())];

  const auto &raw = diag.unpenalized();
  std::map<double, std::uint64_t> bins, pbins;
  std::map<double, std::uint64_t> first_state;
  double sum = 0, psum = 0;
  for (const auto &[z, c] : rep.counts) {
    bins[raw[z]] += c;
    first_state.try_emplace(raw[z], z);
    sum += raw[z] * static_cast<double>(c);
    if (diag.penalized) {
      pbins[diag.values[z]] += c;
      psum += diag.values[z] * static_cast<double>(c);
    }
  }
  rep.energy_mean = sum / static_cast<double>(shots);
  rep.histogram.assign(bins.begin(), bins.end());
  for (const auto &b : first_state)
    rep.bin_states.push_back(b.second);
  if (diag.penalized) {
    rep.penalized_energy_mean = psum / static_cast<double>(shots);
    rep.penalized_histogram.assign(pbins.begin(), pbins.end());
  }

  std::sort(thresholds.begin(), thresholds.end());
  for (double t : thresholds) {
    std::uint64_t below = 0;
    for (const auto &[v, c] : rep.histogram)
      if (v <= t)
        below += c;
    rep.prob_below.emplace_back(t, static_cast<double>(below) / static_cast<double>(shots));
  }
  return rep;
}

} // namespace kdsp
