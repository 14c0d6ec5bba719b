#pragma once

// JSON and CSV formats used by the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ssbmf/csp.hpp"
#include "ssbmf/instance.hpp"
#include "ssbmf/jennrich.hpp"
#include "ssbmf/mu.hpp"
#include "ssbmf/tensor.hpp"

namespace ssbmf::io {

using nlohmann::json;

/// {"m", "r", "k", "rows": [[...], ...], "seed"}; seed is omitted when absent.
json instance_to_json(const SelectionMatrix& w, std::optional<std::uint64_t> seed = std::nullopt);
SelectionMatrix instance_from_json(const json& j);

/// {"m", "hex_rows": [...]} plus "counts" when integer entries are stored.
/// Row a is the number sum_j M(a,j) 2^j written as ceil(m/4) hex digits,
/// most significant first.
json gram_to_json(const GramMatrix& m);
GramMatrix gram_from_json(const json& j);
std::string hex_row(const GramMatrix& m, std::size_t a);

/// ["num/den", ...] in lowest terms.
json mu_to_json(const MuTable& table);

json tensor_metadata(const IntersectionTensor& t, const std::string& mode);

/// {success, residual, retries, permutation?, ...}; `seconds` only when asked
/// for, so that reports are reproducible byte for byte by default.
json recovery_report(const RecoveredFactors& result, const std::optional<ColumnMatch>& match = std::nullopt,
                     bool include_timing = false);

/// {"m", "r", "k", "mode", "targets"}: targets is the upper triangle (u < v,
/// row by row) for complete instances and the full matrix, row-major, with
/// "graph": "bipartite", "rows", "cols" for bipartite ones.
json csp_to_json(const csp::CspInstance& inst);

std::string format_double(double v);

std::string matrix_csv(const Eigen::MatrixXd& a);
std::string matrix_csv(const ByteMatrix& a);
std::string matrix_csv(const std::vector<std::vector<int>>& a);
std::vector<std::vector<double>> parse_csv(const std::string& text);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);
/// Two-space indented with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace ssbmf::io
