#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssbmf/instance.hpp"

namespace ssbmf::csp {

/// All k-subsets of [r], addressed by colexicographic rank. Letters are
/// never materialized; r is limited to 64 so a letter fits one word.
class Alphabet {
 public:
  Alphabet(std::size_t r, std::size_t k);

  std::size_t r() const noexcept { return r_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }

  std::uint64_t rank(std::span<const std::uint32_t> letter) const;
  std::vector<std::uint32_t> unrank(std::uint64_t rank) const;
  std::uint64_t mask(std::uint64_t rank) const;

 private:
  std::uint64_t choose(std::size_t n, std::size_t j) const { return n < j ? 0 : binom_[n * (k_ + 1) + j]; }
  std::size_t r_, k_;
  std::uint64_t size_;
  std::vector<std::uint64_t> binom_;
};

enum class Mode { integer, boolean };
enum class Graph { complete, bipartite };

/// Max 2-CSP whose letters are k-sparse indicator vectors.
///
/// complete: vertices 0..m-1, one edge per pair u < v, target M(u,v).
/// bipartite: left vertices 0..rows-1, right vertices rows..rows+cols-1,
/// one edge per (i, j), target M(i,j).
/// An edge is satisfied when <sigma(u), sigma(v)> equals the target
/// (integer mode) or when [<sigma(u), sigma(v)> > 0] does (boolean mode).
struct CspInstance {
  Alphabet alphabet;
  Mode mode = Mode::integer;
  Graph graph = Graph::complete;
  std::size_t rows = 0, cols = 0;
  /// rows x cols, row-major; for complete graphs rows == cols and the
  /// matrix is symmetric. The diagonal of a complete instance is kept for
  /// reporting but carries no constraint.
  std::vector<int> targets;

  std::size_t vertices() const noexcept { return graph == Graph::complete ? rows : rows + cols; }
  std::size_t edges() const noexcept { return graph == Graph::complete ? rows * (rows - (rows > 0)) / 2 : rows * cols; }
  int target(std::size_t i, std::size_t j) const { return targets[i * cols + j]; }
};

/// One letter rank per vertex.
using Sigma = std::vector<std::uint64_t>;

struct Assignment {
  Sigma sigma;
  std::size_t value = 0;
  /// Value of the starting point the search improved from (local search only).
  std::size_t initial_value = 0;
};

/// Integer mode needs stored counts in {0..k}; boolean mode uses the bits.
CspInstance reduce_symmetric(const GramMatrix& m, std::size_t r, std::size_t k, Mode mode);
/// Entries must lie in {0..k}; rows may differ in length only if empty.
CspInstance reduce_asymmetric(const std::vector<std::vector<int>>& m, std::size_t r, std::size_t k);

std::size_t evaluate(const CspInstance& inst, std::span<const std::uint64_t> sigma);

/// Exhaustive search; throws BudgetError when |alphabet|^vertices > budget.
/// Among optimal assignments returns the lexicographically smallest.
Assignment solve_exact(const CspInstance& inst, std::uint64_t budget = 10'000'000);

/// Random restarts, each followed by best-improvement single-vertex moves
/// (scanning the whole alphabet, ties to the lowest vertex then the lowest
/// rank) until no move helps or `iters` moves were made. Restart i draws its
/// start from stream i under `seed`; restarts run in parallel.
Assignment solve_local(const CspInstance& inst, std::size_t restarts, std::size_t iters, std::uint64_t seed);

struct Factors {
  /// Symmetric: W_hat. Bipartite: U_hat (left vertices).
  SelectionMatrix w;
  /// Bipartite only: rows of V_hat^T (right vertices).
  std::vector<std::vector<std::uint32_t>> v_rows;
  std::size_t value = 0;
  std::size_t edges = 0;
  /// Entries of the target matrix missed by the factors, off the diagonal
  /// (every entry for bipartite instances).
  std::size_t off_diagonal_error = 0;
  /// Same including the diagonal (complete instances only).
  std::size_t full_error = 0;
};

Factors assignment_to_factors(const CspInstance& inst, std::span<const std::uint64_t> sigma);

}  // namespace ssbmf::csp
