#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssbmf/bits.hpp"
#include "ssbmf/rng.hpp"

namespace ssbmf {

enum class Arithmetic { boolean, integer };

/// m x r Boolean matrix whose rows each have exactly k ones. Row i is the
/// support set S_i; equivalently the incidence matrix of a k-uniform
/// hypergraph with one hyperedge per row.
///
/// Supports are kept both as sorted index lists and as packed r-bit masks.
class SelectionMatrix {
 public:
  SelectionMatrix(std::size_t r, std::size_t k, std::vector<std::vector<std::uint32_t>> rows);

  std::size_t m() const noexcept { return m_; }
  std::size_t r() const noexcept { return r_; }
  std::size_t k() const noexcept { return k_; }

  std::span<const std::uint32_t> support(std::size_t i) const {
    return {indices_.data() + i * k_, k_};
  }
  std::span<const bits::Word> mask(std::size_t i) const {
    return {masks_.data() + i * mask_words_, mask_words_};
  }
  std::size_t mask_words() const noexcept { return mask_words_; }
  bool contains(std::size_t row, std::size_t col) const { return bits::test(mask(row), col); }

  std::vector<std::vector<std::uint32_t>> rows() const;
  /// Column j as a packed m-bit vector.
  std::vector<bits::Word> column(std::size_t j) const;
  Eigen::MatrixXd to_dense() const;

  /// Result column j is input column perm[j].
  SelectionMatrix permute_columns(std::span<const std::size_t> perm) const;

  friend bool operator==(const SelectionMatrix& a, const SelectionMatrix& b) {
    return a.r_ == b.r_ && a.k_ == b.k_ && a.indices_ == b.indices_;
  }

 private:
  std::size_t m_ = 0, r_ = 0, k_ = 0, mask_words_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<bits::Word> masks_;
};

/// Square symmetric matrix WW^T. Boolean entries are always stored as packed
/// rows; integer entries |S_a ∩ S_b| are stored when the matrix was produced
/// over the integers.
class GramMatrix {
 public:
  /// Packed rows, words_for(m) words per row; padding bits must be zero.
  GramMatrix(std::size_t m, std::vector<bits::Word> bits);
  /// Integer entries, row-major m x m. Boolean rows are derived (entry > 0).
  static GramMatrix from_counts(std::size_t m, std::vector<std::uint16_t> counts);
  static GramMatrix from_dense(const std::vector<std::vector<int>>& entries, Arithmetic arithmetic);

  std::size_t m() const noexcept { return m_; }
  std::size_t words() const noexcept { return words_; }
  std::span<const bits::Word> row(std::size_t a) const { return {bits_.data() + a * words_, words_}; }
  bool bit(std::size_t a, std::size_t b) const { return bits::test(row(a), b); }

  bool has_counts() const noexcept { return counts_.has_value(); }
  std::uint16_t count(std::size_t a, std::size_t b) const { return (*counts_)[a * m_ + b]; }
  std::span<const std::uint16_t> counts() const { return *counts_; }
  /// Entry under the given arithmetic (integer requires stored counts).
  int entry(std::size_t a, std::size_t b, Arithmetic arithmetic) const;

  bool is_symmetric() const;

  friend bool operator==(const GramMatrix& a, const GramMatrix& b) {
    return a.m_ == b.m_ && a.bits_ == b.bits_ && a.counts_ == b.counts_;
  }

 private:
  GramMatrix() = default;
  std::size_t m_ = 0, words_ = 0;
  std::vector<bits::Word> bits_;
  std::optional<std::vector<std::uint16_t>> counts_;
};

/// Uniform k-subset of [0, r) by Floyd's algorithm, sorted.
std::vector<std::uint32_t> sample_k_subset(Rng& rng, std::size_t r, std::size_t k);

/// Rows drawn independently and uniformly from the C(r,k) k-subsets. Row i
/// uses generator stream i under `seed`, so the result does not depend on
/// thread count.
SelectionMatrix gen_selection_matrix(std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed);

GramMatrix gram(const SelectionMatrix& w, Arithmetic arithmetic);

/// ||M - gram(W)||_0 over the full matrix (both triangles and the diagonal),
/// or over off-diagonal entries only.
std::size_t factorization_error(const GramMatrix& m, const SelectionMatrix& w, Arithmetic arithmetic,
                                bool off_diagonal_only = false);

}  // namespace ssbmf
