#pragma once

// Text/JSON/CSV/binary serialization and atomic artifact writes.

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kdsp/error.hpp"
#include "kdsp/hamiltonian.hpp"
#include "kdsp/lattice.hpp"
#include "kdsp/pauli.hpp"
#include "kdsp/preprocess.hpp"
#include "kdsp/qaoa.hpp"
#include "kdsp/solvers.hpp"

namespace kdsp {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::config, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a temporary sibling and rename, so readers never see a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::config, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorKind::config, "write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

/// Records artifacts of one job so they can be removed if the job fails.
class ArtifactSet {
public:
  void write(const std::filesystem::path &path, std::string_view content) {
    write_file_atomic(path, content);
    paths_.push_back(path);
  }
  const std::vector<std::filesystem::path> &paths() const { return paths_; }
  void remove_all() noexcept {
    for (const auto &p : paths_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    paths_.clear();
  }

private:
  std::vector<std::filesystem::path> paths_;
};

// ---------------------------------------------------------------------------
// Basis

inline Basis parse_basis_text(std::string_view text) {
  RationalMatrix rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    RationalVector row;
    std::string tok;
    while (ls >> tok)
      row.push_back(parse_rational(tok));
    if (!row.empty())
      rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::parse, "basis text contains no rows");
  for (const auto &r : rows)
    require(r.size() == rows[0].size(), ErrorKind::parse, "basis rows have different lengths");
  return Basis(std::move(rows));
}

inline Rational rational_from_json(const Json &v) {
  if (v.is_number_integer())
    return v.is_number_unsigned() ? Rational(std::to_string(v.get<std::uint64_t>()))
                                  : Rational(std::to_string(v.get<std::int64_t>()));
  if (v.is_string())
    return parse_rational(v.get<std::string>());
  fail(ErrorKind::parse, "basis entries must be integers or \"p/q\" strings");
}

inline Basis parse_basis_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::parse, std::string("invalid JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("rows") && j["rows"].is_array(), ErrorKind::parse,
          "basis JSON needs a \"rows\" array");
  RationalMatrix rows;
  for (const auto &r : j["rows"]) {
    require(r.is_array(), ErrorKind::parse, "basis row is not an array");
    RationalVector row;
    for (const auto &v : r)
      row.push_back(rational_from_json(v));
    rows.push_back(std::move(row));
  }
  require(!rows.empty() && !rows[0].empty(), ErrorKind::parse, "basis JSON has no entries");
  for (const auto &r : rows)
    require(r.size() == rows[0].size(), ErrorKind::parse, "basis rows have different lengths");
  return Basis(std::move(rows));
}

/// JSON if the first non-space character is '{', text otherwise.
inline Basis parse_basis(std::string_view text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string_view::npos && text[pos] == '{')
    return parse_basis_json(text);
  return parse_basis_text(text);
}

inline Basis load_basis(const std::filesystem::path &path) { return parse_basis(read_file(path)); }

inline std::string format_basis_text(const Basis &b) {
  std::string out;
  for (const auto &row : b.rows()) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (a)
        out += ' ';
      out += to_string(row[a]);
    }
    out += '\n';
  }
  return out;
}

inline Json rational_to_json(const Rational &q) {
  if (is_integer(q) && q.get_num().fits_slong_p())
    return Json(q.get_num().get_si());
  return Json(to_string(q));
}

inline Json basis_to_json(const Basis &b) {
  Json rows = Json::array();
  for (const auto &row : b.rows()) {
    Json r = Json::array();
    for (const auto &v : row)
      r.push_back(rational_to_json(v));
    rows.push_back(std::move(r));
  }
  return Json{{"rows", std::move(rows)}};
}

inline Json int_matrix_to_json(const IntMatrix &x) {
  Json out = Json::array();
  for (const auto &row : x)
    out.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------
// Results

inline Json to_json(const PreprocessPlan &plan) {
  Json trace = Json::array();
  for (const auto &s : plan.trace) {
    Json step{{"action", to_string(s.kind)}};
    step["p"] = s.p ? Json(*s.p) : Json(nullptr);
    step["k"] = s.k;
    step["basis"] = basis_to_json(s.level_basis)["rows"];
    trace.push_back(std::move(step));
  }
  Json j{{"action", to_string(plan.action)}};
  j["p"] = plan.p ? Json(*plan.p) : Json(nullptr);
  j["k_reduced"] = plan.k_reduced;
  j["solved"] = plan.solved();
  j["delta"] = to_string(plan.delta);
  j["b_p"] = basis_to_json(plan.b_p)["rows"];
  j["trace"] = std::move(trace);
  return j;
}

inline Json to_json(const QubitBudget &b) {
  return Json{{"mode", to_string(b.mode)},
              {"n_dim", b.n_dim},
              {"k", b.k},
              {"m", b.bits_per_coordinate},
              {"qubits_per_coordinate", b.bits_per_coordinate + 1},
              {"total_qubits", b.total_qubits},
              {"coefficient_bound", b.coefficient_bound},
              {"alpha", b.alpha},
              {"closed_form_qubits", b.closed_form_qubits},
              {"log_product_bound", b.log_product_bound}};
}

inline Json to_json(const SolveResult &r) {
  Json sols = Json::array();
  for (const auto &x : r.solutions)
    sols.push_back(int_matrix_to_json(x));
  return Json{{"min_vol_sq", to_string(r.min_vol_sq)},
              {"m_count", r.m_count},
              {"states_scanned", r.states_scanned},
              {"bitstrings", r.bitstrings},
              {"solutions", std::move(sols)}};
}

inline Json to_json(const PenaltyScheme &s) {
  if (s.kind == PenaltyScheme::Kind::exp)
    return Json{{"scheme", "exp"}, {"r", s.r}, {"s", s.s}};
  return Json{{"scheme", "quadratic"}, {"E", s.e}};
}

inline Json to_json(const QaoaParams &p) {
  return Json{{"gammas", p.gammas}, {"betas", p.betas}};
}

/// `labels[i]` is the exact vol^2 of histogram bin i.
inline Json to_json(const RunReport &r, const std::vector<std::string> &labels) {
  require(labels.size() == r.histogram.size(), ErrorKind::config, "histogram label count mismatch");
  Json hist = Json::array();
  for (std::size_t i = 0; i < r.histogram.size(); ++i)
    hist.push_back(Json{{"vol_sq", labels[i]}, {"occurrences", r.histogram[i].second}});
  Json below = Json::array();
  for (const auto &[t, pr] : r.prob_below)
    below.push_back(Json{{"threshold", t}, {"probability", pr}});
  Json j{{"n", r.n},          {"shots", r.shots},
         {"seed", r.seed},    {"generator", r.generator},
         {"p", r.params.layers()}, {"params", to_json(r.params)},
         {"energy_mean", r.energy_mean}, {"exact_expectation", r.exact_expectation}};
  if (r.penalized_energy_mean)
    j["penalized_energy_mean"] = *r.penalized_energy_mean;
  j["prob_below"] = std::move(below);
  j["histogram"] = std::move(hist);
  if (!r.penalized_histogram.empty()) {
    Json ph = Json::array();
    for (const auto &[v, c] : r.penalized_histogram)
      ph.push_back(Json{{"value", v}, {"occurrences", c}});
    j["penalized_histogram"] = std::move(ph);
  }
  return j;
}

inline std::string dump(const Json &j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Pauli polynomial and diagonal export

/// One {"z": [...], "c": ...} object per line, in monomial order.
inline std::string pauli_to_jsonl(const PauliPolynomial &poly) {
  std::string out;
  for (const auto &[m, c] : poly.terms())
    out += Json{{"z", m}, {"c", c}}.dump() + "\n";
  return out;
}

inline PauliPolynomial pauli_from_jsonl(std::string_view text, std::size_t n) {
  PauliPolynomial poly(n);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    Json j;
    try {
      j = Json::parse(line);
      poly.add(j.at("z").get<Monomial>(), j.at("c").get<double>());
    } catch (const nlohmann::json::exception &e) {
      fail(ErrorKind::parse, std::string("bad Pauli line: ") + e.what());
    }
  }
  return poly;
}

/// Little-endian IEEE-754 float64 array.
inline std::string diagonal_to_binary(const DiagonalCost &d) {
  std::string out(d.values.size() * 8, '\0');
  for (std::size_t z = 0; z < d.values.size(); ++z) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(d.values[z]);
    for (int b = 0; b < 8; ++b)
      out[8 * z + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

inline std::vector<double> diagonal_from_binary(std::string_view bytes) {
  require(bytes.size() % 8 == 0, ErrorKind::parse, "binary diagonal length is not a multiple of 8");
  std::vector<double> v(bytes.size() / 8);
  for (std::size_t z = 0; z < v.size(); ++z) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= std::uint64_t{static_cast<unsigned char>(bytes[8 * z + b])} << (8 * b);
    v[z] = std::bit_cast<double>(bits);
  }
  return v;
}

inline Json diagonal_sidecar(const DiagonalCost &d) {
  Json j{{"n", d.n}, {"penalized", d.penalized}};
  j["params"] = d.penalty ? to_json(*d.penalty) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string histogram_csv(const RunReport &r, const std::vector<std::string> &labels) {
  require(labels.size() == r.histogram.size(), ErrorKind::config, "histogram label count mismatch");
  std::string out = "vol_sq,occurrences,probability\n";
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    const auto c = r.histogram[i].second;
    out += labels[i] + "," + std::to_string(c) + "," +
           format_double(static_cast<double>(c) / static_cast<double>(r.shots)) + "\n";
  }
  return out;
}

inline std::string trace_csv(const std::vector<double> &trace) {
  std::string out = "epoch,expectation\n";
  for (std::size_t e = 0; e < trace.size(); ++e)
    out += std::to_string(e) + "," + format_double(trace[e]) + "\n";
  return out;
}

inline std::string grover_csv(const GroverResult &g) {
  std::string out = "iteration,success_probability,closed_form\n";
  for (std::size_t j = 0; j < g.curve.size(); ++j)
    out += std::to_string(j) + "," + format_double(g.curve[j]) + "," +
           format_double(grover_closed_form(g.space, g.marked, j)) + "\n";
  return out;
}

struct GateRow {
  std::string basis;
  std::size_t n_dim = 0;
  std::size_t qubits = 0;
  std::size_t terms = 0;
  GateCount gates;
};

inline std::string gates_csv(const std::vector<GateRow> &rows) {
  std::string out = "basis,n_dim,qubits,terms,one_qubit,two_qubit,total\n";
  for (const auto &r : rows)
    out += r.basis + "," + std::to_string(r.n_dim) + "," + std::to_string(r.qubits) + "," +
           std::to_string(r.terms) + "," + std::to_string(r.gates.one_qubit) + "," +
           std::to_string(r.gates.two_qubit) + "," +
           std::to_string(r.gates.one_qubit + r.gates.two_qubit) + "\n";
  return out;
}

/// Minimal CSV reader for the files written above (no quoting).
inline std::vector<std::vector<std::string>> read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

} // namespace kdsp
