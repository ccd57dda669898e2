// kdsp command-line driver.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gmp.h>
#include <openssl/evp.h>

#include "CLI11.hpp"
#include "kdsp/kdsp.hpp"

namespace fs = std::filesystem;
using namespace kdsp;

namespace {

struct JobConfig {
  std::string command;
  std::string basis_path;
  std::size_t k = 2;
  std::optional<int> m_override;
  std::string delta_text = "750001/1000000";
  Rational delta;
  std::size_t p = 1;
  std::size_t shots = 10000;
  std::string thresholds_text = "5,10,20";
  std::vector<double> thresholds;
  std::uint64_t seed = 1;
  std::string penalize_text;
  std::optional<PenaltyScheme> penalty;
  bool penalize_auto = false;
  std::string out = "out";

  // subcommand extras
  bool preprocess_first = false;
  bool write_pauli = false;
  std::optional<std::size_t> n_override;
  std::optional<double> target;
  std::optional<std::size_t> iterations;
  std::size_t restarts = 4;
  std::size_t epochs = 1000;
  double lr = 0.001;
  double tol = 1e-6;
  std::string optimizer = "adam";
  std::size_t n_min = 3, n_max = 10;
  std::uint64_t scramble_seed = default_scramble_seed;
  std::size_t statevector_cap = default_statevector_cap;
};

int exit_code(ErrorKind k) {
  switch (k) {
  case ErrorKind::config:
    return 2;
  case ErrorKind::parse:
    return 3;
  case ErrorKind::cap:
    return 4;
  case ErrorKind::numerical:
    return 5;
  }
  return 1;
}

std::vector<double> parse_list(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty())
      continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      require(used == tok.size(), ErrorKind::config, "bad number in list: " + tok);
    } catch (const std::logic_error &) {
      fail(ErrorKind::config, "bad number in list: " + tok);
    }
  }
  return out;
}

// "exp:r,s", "quadratic:E" or "auto".
void parse_penalty(JobConfig &cfg) {
  const std::string &t = cfg.penalize_text;
  if (t.empty())
    return;
  if (t == "auto") {
    cfg.penalize_auto = true;
    return;
  }
  const auto colon = t.find(':');
  require(colon != std::string::npos, ErrorKind::config, "penalize expects exp:r,s | quadratic:E | auto");
  const std::string kind = t.substr(0, colon);
  const auto vals = parse_list(t.substr(colon + 1));
  PenaltyScheme s;
  if (kind == "exp") {
    require(vals.size() == 2 && vals[0] > 0 && vals[1] > 0, ErrorKind::config,
            "exp penalty needs positive r,s");
    s.kind = PenaltyScheme::Kind::exp;
    s.r = vals[0];
    s.s = vals[1];
  } else if (kind == "quadratic") {
    require(vals.size() == 1, ErrorKind::config, "quadratic penalty needs E");
    s.kind = PenaltyScheme::Kind::quadratic;
    s.e = vals[0];
  } else {
    fail(ErrorKind::config, "unknown penalty scheme " + kind);
  }
  cfg.penalty = s;
}

void validate(JobConfig &cfg) {
  cfg.delta = parse_rational(cfg.delta_text);
  check_delta(cfg.delta);
  cfg.thresholds = parse_list(cfg.thresholds_text);
  require(!cfg.thresholds.empty(), ErrorKind::config, "at least one threshold is required");
  require(cfg.k >= 1, ErrorKind::config, "k must be >= 1");
  require(cfg.shots >= 1, ErrorKind::config, "shots must be >= 1");
  if (cfg.m_override)
    require(*cfg.m_override >= 0 && *cfg.m_override <= 30, ErrorKind::config, "m out of range [0, 30]");
  require(cfg.restarts >= 1, ErrorKind::config, "restarts must be >= 1");
  require(cfg.lr > 0 && cfg.tol > 0, ErrorKind::config, "lr and tol must be positive");
  require(cfg.optimizer == "adam" || cfg.optimizer == "gd", ErrorKind::config,
          "optimizer must be adam or gd");
  require(cfg.n_min >= 2 && cfg.n_min <= cfg.n_max, ErrorKind::config, "bad N sweep range");
  parse_penalty(cfg);
  if (const char *env = std::getenv("KDSP_STATEVECTOR_CAP")) {
    try {
      const long v = std::stol(env);
      require(v >= 1 && v <= 40, ErrorKind::config, "KDSP_STATEVECTOR_CAP out of range");
      cfg.statevector_cap = static_cast<std::size_t>(v);
    } catch (const std::logic_error &) {
      fail(ErrorKind::config, "KDSP_STATEVECTOR_CAP is not an integer");
    }
  }
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

class Job {
public:
  explicit Job(const JobConfig &cfg) : cfg_(cfg) {}

  ArtifactSet &artifacts() { return files_; }

  void run() {
    const auto &c = cfg_.command;
    if (c == "preprocess")
      cmd_preprocess();
    else if (c == "budget")
      cmd_budget();
    else if (c == "exact")
      cmd_exact();
    else if (c == "spectrum")
      cmd_spectrum();
    else if (c == "grover")
      cmd_grover();
    else if (c == "qaoa")
      cmd_qaoa();
    else if (c == "gates")
      cmd_gates();
    else if (c == "report")
      cmd_report();
    else if (c == "plots")
      cmd_plots();
    else
      fail(ErrorKind::config, "unknown command " + c);
  }

private:
  const JobConfig &cfg_;
  ArtifactSet files_;
  std::optional<Basis> basis_;
  std::string basis_text_;

  fs::path out(const std::string &name) const { return fs::path(cfg_.out) / name; }

  void write(const std::string &name, std::string_view content) { files_.write(out(name), content); }

  const Basis &basis() {
    if (!basis_) {
      require(!cfg_.basis_path.empty(), ErrorKind::config, "--basis is required");
      basis_text_ = read_file(cfg_.basis_path);
      basis_ = parse_basis(basis_text_);
      (void)gso(*basis_); // rejects dependent rows
    }
    return *basis_;
  }

  int m() const { return cfg_.m_override.value_or(1); }

  EncodingConfig encoding(std::size_t k, std::size_t n_dim) const {
    return EncodingConfig(k, n_dim, m());
  }

  void check_k(const Basis &b) const {
    require(cfg_.k >= 1 && cfg_.k <= b.rank(), ErrorKind::config, "k out of range for basis rank");
  }

  // Diagonal for the loaded basis, penalized when requested.
  DiagonalCost diagonal(Json *gap_info = nullptr) {
    const Basis &b = basis();
    check_k(b);
    const EncodingConfig enc = encoding(cfg_.k, b.rank());
    DiagonalCost d = diagonal_vector(gram(b), enc, cfg_.statevector_cap);
    const auto e1 = min_nonzero(d);
    std::optional<double> bound_value;
    if (is_lll_reduced(b, cfg_.delta))
      bound_value = spectral_gap_bound(b, cfg_.k, cfg_.delta);
    if (gap_info) {
      (*gap_info)["min_nonzero"] = e1 ? Json(*e1) : Json(nullptr);
      (*gap_info)["lll_reduced"] = bound_value.has_value();
      (*gap_info)["gap_bound"] = bound_value ? Json(*bound_value) : Json(nullptr);
    }
    if (cfg_.penalize_auto) {
      require(e1.has_value(), ErrorKind::numerical, "no nontrivial sub-lattice in box");
      double upper = 0;
      for (double v : d.values)
        upper = std::max(upper, v);
      if (bound_value && *bound_value >= *e1)
        upper = std::min(upper, *bound_value);
      const double tol = 1e-6 * std::max(1.0, *e1);
      const double est = estimate_gap(d, upper, tol);
      // The estimate overshoots by at most tol, so est - tol is a valid lower bound.
      const double lower = std::max(est - tol, 0.5 * est);
      if (gap_info)
        (*gap_info)["gap_estimate"] = est;
      d = penalize(d, default_exp_penalty(est, lower));
    } else if (cfg_.penalty) {
      d = penalize(d, *cfg_.penalty);
    }
    return d;
  }

  Json job_json() const {
    Json j{{"command", cfg_.command}, {"k", cfg_.k}, {"m", m()}, {"delta", to_string(cfg_.delta)},
           {"alpha", lll_alpha(cfg_.delta)}, {"seed", cfg_.seed}, {"generator", generator_name}};
    return j;
  }

  void cmd_preprocess() {
    const Basis &b = basis();
    check_k(b);
    const PreprocessPlan plan = preprocess(b, cfg_.k, cfg_.delta);
    write("plan.json", dump(to_json(plan)));
  }

  void cmd_budget() {
    std::size_t n = 0;
    if (cfg_.n_override)
      n = *cfg_.n_override;
    else
      n = basis().rank();
    Json j{{"n_dim", n}, {"k", cfg_.k}, {"delta", to_string(cfg_.delta)}};
    j["lll"] = to_json(qubit_budget(n, cfg_.k, BudgetMode::lll, cfg_.delta));
    j["hkz"] = to_json(qubit_budget(n, cfg_.k, BudgetMode::hkz, cfg_.delta));
    write("budget.json", dump(j));
  }

  void cmd_exact() {
    const Basis &b = basis();
    check_k(b);
    Json j;
    if (!cfg_.preprocess_first) {
      const SolveResult r = brute_force_solve(gram(b), encoding(cfg_.k, b.rank()));
      j = to_json(r);
      Json spans = Json::array();
      for (const auto &x : r.solutions)
        spans.push_back(basis_to_json(Basis(multiply(to_rational(x), b.rows())))["rows"]);
      j["sublattice_bases"] = std::move(spans);
    } else {
      const PipelineResult res = preprocess_and_solve(b, cfg_.k, m(), cfg_.delta);
      if (res.reduced)
        j = to_json(*res.reduced);
      else
        j["min_vol_sq"] = to_string(res.vol_sq);
      j["lifted_min_vol_sq"] = to_string(res.vol_sq);
      j["lifted_basis"] = basis_to_json(res.solution)["rows"];
      j["plan"] = to_json(res.plan);
    }
    write("exact.json", dump(j));
  }

  void cmd_spectrum() {
    Json gap;
    const DiagonalCost d = diagonal(&gap);
    write("diagonal.bin", diagonal_to_binary(d));
    Json side = diagonal_sidecar(d);
    side["gap"] = gap;
    write("diagonal.json", dump(side));
    if (cfg_.write_pauli) {
      const Basis &b = basis();
      const auto poly = build_pauli_cost(gram(b), encoding(cfg_.k, b.rank()));
      write("pauli.jsonl", pauli_to_jsonl(poly));
    }
  }

  void cmd_grover() {
    const DiagonalCost d = diagonal();
    double t = 0;
    if (cfg_.target) {
      t = *cfg_.target;
    } else {
      const auto e1 = min_nonzero(d);
      require(e1.has_value(), ErrorKind::numerical, "empty target set");
      t = *e1;
    }
    const GroverResult g = grover_simulate(d, ThresholdTarget{t}, cfg_.iterations, cfg_.seed);
    const Basis &b = basis();
    const EncodingConfig enc = encoding(cfg_.k, b.rank());
    Json j{{"threshold", t},
           {"space", g.space},
           {"marked", g.marked},
           {"iterations", g.iterations},
           {"success_prob", g.success_prob},
           {"sample", g.sample},
           {"sample_vol_sq", to_string(eval_cost_direct(g.sample, gram(b), enc))},
           {"sample_x", int_matrix_to_json(decode_coefficients(g.sample, enc))},
           {"log2_runtime_estimate", grover_runtime_estimate(b.rank(), cfg_.k, static_cast<double>(g.marked))},
           {"seed", cfg_.seed},
           {"generator", generator_name}};
    write("grover.csv", grover_csv(g));
    write("grover.json", dump(j));
  }

  void cmd_qaoa() {
    Json gap;
    const DiagonalCost d = diagonal(&gap);
    const Basis &b = basis();
    const EncodingConfig enc = encoding(cfg_.k, b.rank());
    const std::string tag = "_p" + std::to_string(cfg_.p);

    QaoaParams params;
    std::vector<double> trace;
    Json training = nullptr;
    if (cfg_.p > 0) {
      TrainingOptions o;
      o.max_epochs = cfg_.epochs;
      o.learning_rate = cfg_.lr;
      o.tol = cfg_.tol;
      o.restarts = cfg_.restarts;
      o.rule = cfg_.optimizer == "gd" ? UpdateRule::gradient_descent : UpdateRule::adam;
      o.statevector_cap = cfg_.statevector_cap;
      const TrainingResult tr = train_qaoa(d, cfg_.p, o, derive_seed(cfg_.seed, 1));
      params = tr.params;
      trace = tr.runs[tr.best_restart].trace;
      Json runs = Json::array();
      for (const auto &r : tr.runs)
        runs.push_back(Json{{"expectation", r.expectation}, {"epochs", r.epochs}});
      training = Json{{"optimizer", cfg_.optimizer}, {"learning_rate", cfg_.lr}, {"tol", cfg_.tol},
                      {"max_epochs", cfg_.epochs}, {"restarts", runs}, {"best_restart", tr.best_restart}};
    }
    const RunReport rep = sample_report(d, params, cfg_.shots, cfg_.thresholds,
                                        derive_seed(cfg_.seed, 2), cfg_.statevector_cap);
    const CostEvaluator eval(gram(b), enc);
    std::vector<std::string> labels;
    for (auto z : rep.bin_states)
      labels.push_back(to_string(eval.exact(z)));

    Json j = to_json(rep, labels);
    j["job"] = job_json();
    j["penalty"] = d.penalty ? to_json(*d.penalty) : Json(nullptr);
    j["gap"] = gap;
    j["training"] = training;
    if (cfg_.p > 0)
      write("trace" + tag + ".csv", trace_csv(trace));
    write("histogram" + tag + ".csv", histogram_csv(rep, labels));
    write("run" + tag + ".json", dump(j));
  }

  void cmd_gates() {
    std::vector<GateRow> rows;
    for (const char *kind : {"good", "bad"})
      for (std::size_t n = cfg_.n_min; n <= cfg_.n_max; ++n) {
        require(cfg_.k < n, ErrorKind::config, "k must be below every swept N");
        Basis b = Basis::identity(n);
        if (std::string(kind) == "bad")
          b = scrambled(b, cfg_.scramble_seed);
        const EncodingConfig enc = encoding(cfg_.k, n);
        const auto poly = build_pauli_cost(gram(b), enc);
        rows.push_back(GateRow{kind, n, enc.qubits(), poly.size(), count_gates(poly)});
      }
    write("gates.csv", gates_csv(rows));
  }

  void cmd_report() {
    JobConfig sub = cfg_;
    auto run_sub = [&](const std::string &cmd) {
      sub.command = cmd;
      Job j(sub);
      try {
        j.run();
      } catch (...) {
        j.files_.remove_all();
        throw;
      }
      for (const auto &p : j.files_.paths())
        files_.write(p, read_file(p)); // adopt so a later failure removes it too
    };
    run_sub("preprocess");
    run_sub("budget");
    run_sub("exact");
    run_sub("spectrum");
    if (cfg_.k * basis().rank() * (m() + 1) <= grover_qubit_cap)
      run_sub("grover");
    run_sub("qaoa");
    run_sub("gates");

    Json inputs{{"basis", Json{{"path", fs::path(cfg_.basis_path).filename().string()},
                               {"git_sha1", git_blob_sha1(basis_text_)}}}};
    Json artifacts = Json::object();
    std::set<std::string> names;
    for (const auto &p : files_.paths())
      names.insert(p.filename().string());
    for (const auto &n : names)
      artifacts[n] = git_blob_sha1(read_file(out(n)));
    Json params = job_json();
    params["p"] = cfg_.p;
    params["shots"] = cfg_.shots;
    params["thresholds"] = cfg_.thresholds;
    params["penalize"] = cfg_.penalize_text.empty() ? Json(nullptr) : Json(cfg_.penalize_text);
    params["sub_seeds"] = Json{{"training", derive_seed(cfg_.seed, 1)}, {"sampling", derive_seed(cfg_.seed, 2)}};
    Json manifest{{"versions", Json{{"kdsp", version}, {"gmp", gmp_version}}},
                  {"parameters", params},
                  {"inputs", inputs},
                  {"artifacts", artifacts}};
    write("manifest.json", dump(manifest));
  }

  // Plot-ready tables from an existing report directory (--out).
  void cmd_plots() {
    const fs::path dir = cfg_.out;
    std::vector<fs::path> hists;
    if (fs::is_directory(dir))
      for (const auto &e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("histogram", 0) == 0 && e.path().extension() == ".csv")
          hists.push_back(e.path());
      }
    std::sort(hists.begin(), hists.end());
    const bool have_gates = fs::exists(dir / "gates.csv");
    require(!hists.empty() || have_gates, ErrorKind::config, "missing inputs");

    const double cut = cfg_.thresholds.back();
    std::string table = "p";
    for (double t : cfg_.thresholds)
      table += ",vol_sq_le_" + format_double(t);
    table += "\n";
    for (const auto &h : hists) {
      const auto rows = read_csv(read_file(h));
      require(!rows.empty() && rows[0].size() == 3 && rows[0][0] == "vol_sq", ErrorKind::parse,
              "bad histogram file " + h.string());
      double total = 0;
      for (std::size_t i = 1; i < rows.size(); ++i)
        total += std::stod(rows[i][1]);
      require(total > 0, ErrorKind::parse, "empty histogram " + h.string());
      std::string outcsv = "vol_sq,occurrences,probability,truncated\n";
      std::vector<double> below(cfg_.thresholds.size(), 0);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const double v = to_double(parse_rational(rows[i][0]));
        const double c = std::stod(rows[i][1]);
        outcsv += rows[i][0] + "," + rows[i][1] + "," + format_double(c / total) + "," +
                  (v > cut ? "1" : "0") + "\n";
        for (std::size_t t = 0; t < below.size(); ++t)
          if (v <= cfg_.thresholds[t])
            below[t] += c / total;
      }
      const std::string stem = h.stem().string();
      write("plots/" + stem + ".csv", outcsv);
      const auto ppos = stem.find("_p");
      table += ppos == std::string::npos ? stem : stem.substr(ppos + 2);
      for (double v : below)
        table += "," + format_double(v);
      table += "\n";
    }
    if (!hists.empty())
      write("plots/prob_table.csv", table);
    if (have_gates) {
      const auto rows = read_csv(read_file(dir / "gates.csv"));
      std::map<std::size_t, std::map<std::string, std::pair<std::string, std::string>>> series;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        require(rows[i].size() == 7, ErrorKind::parse, "bad gates.csv row");
        series[std::stoul(rows[i][1])][rows[i][0]] = {rows[i][5], rows[i][6]};
      }
      std::string g = "n_dim,good_two_qubit,bad_two_qubit,good_total,bad_total\n";
      for (const auto &[n, s] : series) {
        auto get = [&](const char *k, bool total) {
          auto it = s.find(k);
          return it == s.end() ? std::string() : (total ? it->second.second : it->second.first);
        };
        g += std::to_string(n) + "," + get("good", false) + "," + get("bad", false) + "," +
             get("good", true) + "," + get("bad", true) + "\n";
      }
      write("plots/gates_series.csv", g);
    }
  }
};

} // namespace

int main(int argc, char **argv) {
  JobConfig cfg;
  CLI::App app{"K-densest sub-lattice toolkit"};
  app.require_subcommand(1);

  auto common = [&](CLI::App *s, bool needs_basis) {
    auto *b = s->add_option("--basis", cfg.basis_path, "basis file (text rows or JSON {\"rows\": ...})");
    if (needs_basis)
      b->required();
    s->add_option("--k", cfg.k, "sub-lattice rank");
    s->add_option("--m", cfg.m_override, "bits per coefficient (qudit = m + 1 qubits, default 1)");
    s->add_option("--delta", cfg.delta_text, "LLL parameter as p/q");
    s->add_option("--p", cfg.p, "QAOA layers");
    s->add_option("--shots", cfg.shots, "samples");
    s->add_option("--thresholds", cfg.thresholds_text, "comma-separated vol^2 thresholds");
    s->add_option("--seed", cfg.seed, "master seed");
    s->add_option("--penalize", cfg.penalize_text, "exp:r,s | quadratic:E | auto");
    s->add_option("--out", cfg.out, "output directory");
  };

  auto *pre = app.add_subcommand("preprocess", "LLL, gap detection and dimension reduction");
  common(pre, true);
  auto *bud = app.add_subcommand("budget", "qubit budgets (LLL and HKZ bounds)");
  common(bud, false);
  bud->add_option("--n", cfg.n_override, "lattice rank when no basis is given");
  auto *ex = app.add_subcommand("exact", "exhaustive search");
  common(ex, true);
  ex->add_flag("--preprocess", cfg.preprocess_first, "reduce the instance first and lift the result");
  auto *spc = app.add_subcommand("spectrum", "diagonal export and gap");
  common(spc, true);
  spc->add_flag("--pauli", cfg.write_pauli, "also write the Z-polynomial as JSON lines");
  auto *gro = app.add_subcommand("grover", "simulated amplitude amplification");
  common(gro, true);
  gro->add_option("--target", cfg.target, "mark states with 0 < vol^2 <= target (default: gap)");
  gro->add_option("--iterations", cfg.iterations, "Grover iterations (default floor(pi/4 sqrt(S/M)))");
  auto *qa = app.add_subcommand("qaoa", "QAOA training and sampling");
  common(qa, true);
  auto training = [&](CLI::App *s) {
    s->add_option("--restarts", cfg.restarts, "training restarts");
    s->add_option("--epochs", cfg.epochs, "epoch limit");
    s->add_option("--lr", cfg.lr, "learning rate");
    s->add_option("--tol", cfg.tol, "stop when |dC| < tol");
    s->add_option("--optimizer", cfg.optimizer, "adam | gd");
  };
  training(qa);
  auto *gat = app.add_subcommand("gates", "one-layer gate counts over N");
  common(gat, false);
  auto sweep = [&](CLI::App *s) {
    s->add_option("--n-min", cfg.n_min, "smallest N");
    s->add_option("--n-max", cfg.n_max, "largest N");
    s->add_option("--scramble-seed", cfg.scramble_seed, "seed of the bad-basis transform");
  };
  sweep(gat);
  auto *rep = app.add_subcommand("report", "run the whole pipeline and write a manifest");
  common(rep, true);
  training(rep);
  sweep(rep);
  auto *plt = app.add_subcommand("plots", "plot-ready tables from a report directory");
  common(plt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error kind=config code=2 message=" << e.what() << "\n";
    return 2;
  }
  for (auto *s : app.get_subcommands())
    cfg.command = s->get_name();

  Job job(cfg);
  try {
    validate(cfg);
    job.run();
  } catch (const Error &e) {
    job.artifacts().remove_all();
    std::cerr << "error kind=" << to_string(e.kind()) << " code=" << exit_code(e.kind())
              << " message=" << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    job.artifacts().remove_all();
    std::cerr << "error kind=config code=2 message=" << e.what() << "\n";
    return 2;
  }
  return 0;
}
