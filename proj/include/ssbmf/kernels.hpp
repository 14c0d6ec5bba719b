#pragma once

// Bit-packed counting kernels. Each kernel has a plain serial reference that
// follows the definition and an OpenMP variant; tests check that they agree
// and the bench target times them against each other.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssbmf/bits.hpp"
#include "ssbmf/instance.hpp"

namespace ssbmf {

enum class Exec { serial, parallel };

namespace kernels {

std::vector<bits::Word> gram_bits(const SelectionMatrix& w, Exec exec);
std::vector<std::uint16_t> gram_counts(const SelectionMatrix& w, Exec exec);

/// Number of columns l with M(a, l) = 0 for every a in `rows`.
std::size_t zero_count(const GramMatrix& m, std::span<const std::size_t> rows);

/// out[i * cols.size() + j] = zero_count(M, {rows[i], cols[j]}).
void pair_zero_counts(const GramMatrix& m, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols, std::span<std::uint32_t> out, Exec exec);

/// Scratch for zero_slice; one per thread.
struct SliceWorkspace {
  std::vector<std::size_t> zero_columns;
  std::vector<bits::Word> restricted;
};

/// Triple zero counts for anchor row `a` against every pair drawn from
/// idx[from..n): out[q * n + s] for from <= q <= s < n, where n = idx.size().
///
/// Restricts M to the columns L_a = {l : M(a,l) = 0}, complements, and forms
/// the restricted matrix times its transpose with AND + popcount.
void zero_slice(const GramMatrix& m, std::size_t a, std::span<const std::size_t> idx, std::size_t from,
                std::span<std::uint32_t> out, SliceWorkspace& ws);

}  // namespace kernels
}  // namespace ssbmf
