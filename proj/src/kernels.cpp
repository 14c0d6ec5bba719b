#include "ssbmf/kernels.hpp"

#include <algorithm>

#include "ssbmf/error.hpp"

namespace ssbmf::kernels {

namespace {

void gram_bits_row(const SelectionMatrix& w, std::size_t a, std::span<bits::Word> out) {
  for (std::size_t b = 0; b < w.m(); ++b)
    if (bits::intersects(w.mask(a), w.mask(b))) bits::set(out, b);
}

}  // namespace

std::vector<bits::Word> gram_bits(const SelectionMatrix& w, Exec exec) {
  const std::size_t m = w.m(), words = bits::words_for(m);
  std::vector<bits::Word> out(m * words, 0);
  if (exec == Exec::serial) {
    for (std::size_t a = 0; a < m; ++a) gram_bits_row(w, a, {out.data() + a * words, words});
    return out;
  }
  // Each thread owns whole output rows.
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t a = 0; a < m; ++a) gram_bits_row(w, a, {out.data() + a * words, words});
  return out;
}

std::vector<std::uint16_t> gram_counts(const SelectionMatrix& w, Exec exec) {
  const std::size_t m = w.m();
  std::vector<std::uint16_t> out(m * m);
  auto fill_row = [&](std::size_t a) {
    for (std::size_t b = 0; b < m; ++b)
      out[a * m + b] = static_cast<std::uint16_t>(bits::popcount_and(w.mask(a), w.mask(b)));
  };
  if (exec == Exec::serial) {
    for (std::size_t a = 0; a < m; ++a) fill_row(a);
  } else {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t a = 0; a < m; ++a) fill_row(a);
  }
  return out;
}

std::size_t zero_count(const GramMatrix& mat, std::span<const std::size_t> rows) {
  for (auto a : rows)
    if (a >= mat.m()) throw DimensionError("row index out of range");
  if (rows.empty() || mat.m() == 0) return rows.empty() ? mat.m() : 0;
  const std::size_t words = mat.words();
  const bits::Word tail = bits::tail_mask(mat.m());
  std::size_t total = 0;
  for (std::size_t wi = 0; wi < words; ++wi) {
    bits::Word acc = wi + 1 == words ? tail : ~bits::Word{0};
    for (auto a : rows) acc &= ~mat.row(a)[wi];
    total += static_cast<std::size_t>(std::popcount(acc));
  }
  return total;
}

void pair_zero_counts(const GramMatrix& mat, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols, std::span<std::uint32_t> out, Exec exec) {
  if (out.size() != rows.size() * cols.size()) throw DimensionError("pair count buffer has wrong size");
  const std::size_t words = mat.words();
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const std::size_t pair[2] = {rows[i], cols[j]};
        out[i * cols.size() + j] = static_cast<std::uint32_t>(zero_count(mat, pair));
      }
    return;
  }
  // Complemented rows once, then AND + popcount.
  const std::size_t m = mat.m();
  const bits::Word tail = bits::tail_mask(m);
  std::vector<bits::Word> comp(m * words);
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t wi = 0; wi < words; ++wi) comp[a * words + wi] = ~mat.row(a)[wi];
    if (words > 0) comp[a * words + words - 1] &= tail;
  }
  for (auto a : rows)
    if (a >= m) throw DimensionError("row index out of range");
  for (auto a : cols)
    if (a >= m) throw DimensionError("row index out of range");
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::span<const bits::Word> ra{comp.data() + rows[i] * words, words};
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::span<const bits::Word> rb{comp.data() + cols[j] * words, words};
      out[i * cols.size() + j] = static_cast<std::uint32_t>(bits::popcount_and(ra, rb));
    }
  }
}

void zero_slice(const GramMatrix& mat, std::size_t a, std::span<const std::size_t> idx, std::size_t from,
                std::span<std::uint32_t> out, SliceWorkspace& ws) {
  const std::size_t n = idx.size();
  if (out.size() != n * n) throw DimensionError("slice buffer has wrong size");

  // L_a: columns where row a is zero.
  ws.zero_columns.clear();
  const auto row_a = mat.row(a);
  for (std::size_t l = 0; l < mat.m(); ++l)
    if (!bits::test(row_a, l)) ws.zero_columns.push_back(l);
  const std::size_t len = ws.zero_columns.size();
  const std::size_t rw = bits::words_for(len);

  // Restricted complement: bit p of row q is 1 - M(idx[q], L_a[p]).
  ws.restricted.assign(n * rw, 0);
  for (std::size_t q = from; q < n; ++q) {
    const auto row = mat.row(idx[q]);
    bits::Word* dst = ws.restricted.data() + q * rw;
    for (std::size_t p = 0; p < len; ++p)
      if (!bits::test(row, ws.zero_columns[p])) dst[p / bits::kWordBits] |= bits::Word{1} << (p % bits::kWordBits);
  }

  for (std::size_t q = from; q < n; ++q) {
    std::span<const bits::Word> rq{ws.restricted.data() + q * rw, rw};
    for (std::size_t s = q; s < n; ++s) {
      std::span<const bits::Word> rs{ws.restricted.data() + s * rw, rw};
      out[q * n + s] = static_cast<std::uint32_t>(bits::popcount_and(rq, rs));
    }
  }
}

}  // namespace ssbmf::kernels
