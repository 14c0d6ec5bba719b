#include "ssbmf/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ssbmf/error.hpp"

namespace ssbmf::io {

json instance_to_json(const SelectionMatrix& w, std::optional<std::uint64_t> seed) {
  json j;
  j["m"] = w.m();
  j["r"] = w.r();
  j["k"] = w.k();
  j["rows"] = w.rows();
  if (seed) j["seed"] = *seed;
  return j;
}

SelectionMatrix instance_from_json(const json& j) {
  try {
    auto rows = j.at("rows").get<std::vector<std::vector<std::uint32_t>>>();
    const auto m = j.at("m").get<std::size_t>();
    if (rows.size() != m) throw ParameterError("instance has " + std::to_string(rows.size()) + " rows, expected m");
    return SelectionMatrix(j.at("r").get<std::size_t>(), j.at("k").get<std::size_t>(), std::move(rows));
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed instance: ") + e.what());
  }
}

std::string hex_row(const GramMatrix& m, std::size_t a) {
  static constexpr char digits[] = "0123456789abcdef";
  const std::size_t nibbles = (m.m() + 3) / 4;
  std::string out(nibbles, '0');
  const auto row = m.row(a);
  for (std::size_t n = 0; n < nibbles; ++n) {
    const std::size_t bit = 4 * n;
    const unsigned value = static_cast<unsigned>((row[bit / 64] >> (bit % 64)) & 0xf);
    out[nibbles - 1 - n] = digits[value];
  }
  return out;
}

json gram_to_json(const GramMatrix& m) {
  json j;
  j["m"] = m.m();
  json rows = json::array();
  for (std::size_t a = 0; a < m.m(); ++a) rows.push_back(hex_row(m, a));
  j["hex_rows"] = std::move(rows);
  if (m.has_counts()) {
    json counts = json::array();
    for (std::size_t a = 0; a < m.m(); ++a) {
      json row = json::array();
      for (std::size_t b = 0; b < m.m(); ++b) row.push_back(m.count(a, b));
      counts.push_back(std::move(row));
    }
    j["counts"] = std::move(counts);
  }
  return j;
}

namespace {

GramMatrix parse_hex_rows(std::size_t m, const std::vector<std::string>& rows) {
  if (rows.size() != m) throw ParameterError("hex_rows must have m entries");
  const std::size_t nibbles = (m + 3) / 4, words = bits::words_for(m);
  std::vector<bits::Word> packed(m * words, 0);
  for (std::size_t a = 0; a < m; ++a) {
    if (rows[a].size() != nibbles) throw ParameterError("hex row " + std::to_string(a) + " has wrong length");
    for (std::size_t n = 0; n < nibbles; ++n) {
      const char c = rows[a][nibbles - 1 - n];
      unsigned v;
      if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
      else throw ParameterError("invalid hex digit in row " + std::to_string(a));
      for (unsigned b = 0; b < 4; ++b) {
        const std::size_t col = 4 * n + b;
        if (!((v >> b) & 1u)) continue;
        if (col >= m) throw ParameterError("hex row " + std::to_string(a) + " sets bits beyond m");
        packed[a * words + col / 64] |= bits::Word{1} << (col % 64);
      }
    }
  }
  return GramMatrix(m, std::move(packed));
}

}  // namespace

GramMatrix gram_from_json(const json& j) {
  try {
    const auto m = j.at("m").get<std::size_t>();
    if (!j.contains("counts")) return parse_hex_rows(m, j.at("hex_rows").get<std::vector<std::string>>());
    const auto counts = j.at("counts").get<std::vector<std::vector<int>>>();
    if (counts.size() != m) throw ParameterError("counts must have m rows");
    GramMatrix g = GramMatrix::from_dense(counts, Arithmetic::integer);
    if (j.contains("hex_rows")) {
      const GramMatrix hex = parse_hex_rows(m, j.at("hex_rows").get<std::vector<std::string>>());
      for (std::size_t a = 0; a < m; ++a)
        if (!std::equal(hex.row(a).begin(), hex.row(a).end(), g.row(a).begin()))
          throw ParameterError("hex_rows disagree with counts in row " + std::to_string(a));
    }
    return g;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed Gram matrix: ") + e.what());
  }
}

json mu_to_json(const MuTable& table) {
  json out = json::array();
  for (std::size_t t = 0; t <= table.t_max(); ++t) {
    const Rational v = table.value(t);
    out.push_back(numerator(v).str() + "/" + denominator(v).str());
  }
  return out;
}

json tensor_metadata(const IntersectionTensor& t, const std::string& mode) {
  json j;
  j["m"] = t.dim();
  j["k"] = t.k();
  j["mode"] = mode;
  j["anchors"] = std::vector<std::size_t>(t.rows().begin(), t.rows().end());
  return j;
}

json recovery_report(const RecoveredFactors& result, const std::optional<ColumnMatch>& match, bool include_timing) {
  json j;
  j["success"] = result.success;
  j["residual"] = result.residual ? json(*result.residual) : json(nullptr);
  j["retries"] = result.retries;
  j["eigen_gap"] = result.eigen_gap;
  j["max_rounding_deviation"] = result.max_rounding_deviation;
  j["anchors"] = result.anchors.size();
  if (!result.failure.empty()) j["failure"] = result.failure;
  if (match) {
    j["matched"] = match->matched;
    if (match->matched) j["permutation"] = match->permutation;
    else {
      j["unmatched_candidate"] = match->unmatched_candidate;
      j["unmatched_reference"] = match->unmatched_reference;
    }
  }
  if (include_timing) j["seconds"] = result.seconds;
  return j;
}

json csp_to_json(const csp::CspInstance& inst) {
  json j;
  j["m"] = inst.rows;
  j["r"] = inst.alphabet.r();
  j["k"] = inst.alphabet.k();
  j["mode"] = inst.mode == csp::Mode::integer ? "int" : "bool";
  json targets = json::array();
  if (inst.graph == csp::Graph::complete) {
    for (std::size_t u = 0; u < inst.rows; ++u)
      for (std::size_t v = u + 1; v < inst.rows; ++v) targets.push_back(inst.target(u, v));
  } else {
    j["graph"] = "bipartite";
    j["rows"] = inst.rows;
    j["cols"] = inst.cols;
    for (int t : inst.targets) targets.push_back(t);
  }
  j["targets"] = std::move(targets);
  return j;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string matrix_csv(const Eigen::MatrixXd& a) {
  std::string out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out += ',';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_csv(const ByteMatrix& a) {
  std::string out;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (j) out += ',';
      out += std::to_string(a(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_csv(const std::vector<std::vector<int>>& a) {
  std::string out;
  for (const auto& row : a) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(row[j]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      // Trim surrounding blanks.
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParameterError("bad CSV cell '" + cell + "' on row " + std::to_string(rows.size() + 1));
      row.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParameterError("ragged CSV");
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_file(path));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << text;
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace ssbmf::io
