#include "ssbmf/instance.hpp"

#include <algorithm>
#include <string>

#include "ssbmf/error.hpp"
#include "ssbmf/kernels.hpp"
#include "ssbmf/rng.hpp"

namespace ssbmf {

SelectionMatrix::SelectionMatrix(std::size_t r, std::size_t k, std::vector<std::vector<std::uint32_t>> rows)
    : m_(rows.size()), r_(r), k_(k), mask_words_(bits::words_for(r)) {
  if (r == 0 || k == 0 || k > r) throw ParameterError("selection matrix needs 1 <= k <= r");
  indices_.reserve(m_ * k_);
  masks_.assign(m_ * mask_words_, 0);
  for (std::size_t i = 0; i < m_; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end())
      throw ParameterError("row " + std::to_string(i) + " has a repeated index");
    if (row.size() != k_)
      throw ParameterError("row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                           " entries, expected k = " + std::to_string(k_));
    if (!row.empty() && row.back() >= r_)
      throw ParameterError("row " + std::to_string(i) + " has an index outside [0, r)");
    std::span<bits::Word> mk{masks_.data() + i * mask_words_, mask_words_};
    for (auto j : row) {
      indices_.push_back(j);
      bits::set(mk, j);
    }
  }
}

std::vector<std::vector<std::uint32_t>> SelectionMatrix::rows() const {
  std::vector<std::vector<std::uint32_t>> out(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    auto s = support(i);
    out[i].assign(s.begin(), s.end());
  }
  return out;
}

std::vector<bits::Word> SelectionMatrix::column(std::size_t j) const {
  std::vector<bits::Word> col(bits::words_for(m_), 0);
  for (std::size_t i = 0; i < m_; ++i)
    if (contains(i, j)) bits::set(col, i);
  return col;
}

Eigen::MatrixXd SelectionMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(r_));
  for (std::size_t i = 0; i < m_; ++i)
    for (auto j : support(i)) d(static_cast<Eigen::Index>(i), j) = 1.0;
  return d;
}

SelectionMatrix SelectionMatrix::permute_columns(std::span<const std::size_t> perm) const {
  if (perm.size() != r_) throw DimensionError("permutation length must equal r");
  std::vector<std::size_t> inverse(r_, r_);
  for (std::size_t j = 0; j < r_; ++j) {
    if (perm[j] >= r_ || inverse[perm[j]] != r_) throw ParameterError("not a permutation");
    inverse[perm[j]] = j;
  }
  auto out = rows();
  for (auto& row : out)
    for (auto& j : row) j = static_cast<std::uint32_t>(inverse[j]);
  return SelectionMatrix(r_, k_, std::move(out));
}

GramMatrix::GramMatrix(std::size_t m, std::vector<bits::Word> packed)
    : m_(m), words_(bits::words_for(m)), bits_(std::move(packed)) {
  if (bits_.size() != m_ * words_) throw DimensionError("packed Gram rows have the wrong length");
  if (words_ > 0) {
    const bits::Word tail = bits::tail_mask(m_);
    for (std::size_t a = 0; a < m_; ++a)
      if (bits_[a * words_ + words_ - 1] & ~tail) throw DimensionError("nonzero padding bits in Gram row");
  }
}

GramMatrix GramMatrix::from_counts(std::size_t m, std::vector<std::uint16_t> counts) {
  if (counts.size() != m * m) throw DimensionError("count matrix must be m x m");
  GramMatrix g;
  g.m_ = m;
  g.words_ = bits::words_for(m);
  g.bits_.assign(m * g.words_, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (counts[a * m + b] > 0) bits::set({g.bits_.data() + a * g.words_, g.words_}, b);
  g.counts_ = std::move(counts);
  return g;
}

GramMatrix GramMatrix::from_dense(const std::vector<std::vector<int>>& entries, Arithmetic arithmetic) {
  const std::size_t m = entries.size();
  std::vector<std::uint16_t> counts(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    if (entries[a].size() != m) throw DimensionError("dense Gram matrix must be square");
    for (std::size_t b = 0; b < m; ++b) {
      const int v = entries[a][b];
      if (v < 0 || v > 65535 || (arithmetic == Arithmetic::boolean && v > 1))
        throw ParameterError("Gram entry out of range");
      counts[a * m + b] = static_cast<std::uint16_t>(v);
    }
  }
  GramMatrix g = from_counts(m, std::move(counts));
  if (arithmetic == Arithmetic::boolean) g.counts_.reset();
  return g;
}

int GramMatrix::entry(std::size_t a, std::size_t b, Arithmetic arithmetic) const {
  if (arithmetic == Arithmetic::boolean) return bit(a, b) ? 1 : 0;
  if (!counts_) throw ParameterError("integer entries requested from a Boolean-only Gram matrix");
  return count(a, b);
}

bool GramMatrix::is_symmetric() const {
  for (std::size_t a = 0; a < m_; ++a)
    for (std::size_t b = a + 1; b < m_; ++b) {
      if (bit(a, b) != bit(b, a)) return false;
      if (counts_ && count(a, b) != count(b, a)) return false;
    }
  return true;
}

std::vector<std::uint32_t> sample_k_subset(Rng& rng, std::size_t r, std::size_t k) {
  // Floyd: for j = r-k .. r-1 draw t in [0, j]; take t unless already taken, else j.
  std::vector<std::uint32_t> chosen;
  chosen.reserve(k);
  for (std::size_t j = r - k; j < r; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.below(j + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
      chosen.push_back(t);
    else
      chosen.push_back(static_cast<std::uint32_t>(j));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

SelectionMatrix gen_selection_matrix(std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed) {
  if (m == 0 || r == 0 || k == 0) throw ParameterError("m, r and k must be positive");
  if (k > r) throw ParameterError("k must not exceed r");
  std::vector<std::vector<std::uint32_t>> rows(m);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i) {
    Rng rng(seed, i);
    rows[i] = sample_k_subset(rng, r, k);
  }
  return SelectionMatrix(r, k, std::move(rows));
}

GramMatrix gram(const SelectionMatrix& w, Arithmetic arithmetic) {
  if (arithmetic == Arithmetic::integer)
    return GramMatrix::from_counts(w.m(), kernels::gram_counts(w, Exec::parallel));
  return GramMatrix(w.m(), kernels::gram_bits(w, Exec::parallel));
}

std::size_t factorization_error(const GramMatrix& mat, const SelectionMatrix& w, Arithmetic arithmetic,
                                bool off_diagonal_only) {
  if (mat.m() != w.m()) throw DimensionError("Gram matrix and W have different row counts");
  if (arithmetic == Arithmetic::integer && !mat.has_counts())
    throw ParameterError("integer factorization error needs an integer Gram matrix");
  const std::size_t m = w.m();
  std::size_t diff = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : diff)
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (off_diagonal_only && a == b) continue;
      int predicted;
      if (arithmetic == Arithmetic::integer)
        predicted = static_cast<int>(bits::popcount_and(w.mask(a), w.mask(b)));
      else
        predicted = bits::intersects(w.mask(a), w.mask(b)) ? 1 : 0;
      if (predicted != mat.entry(a, b, arithmetic)) ++diff;
    }
  }
  return diff;
}

}  // namespace ssbmf
