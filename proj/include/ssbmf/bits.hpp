#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ssbmf::bits {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t n) noexcept { return (n + kWordBits - 1) / kWordBits; }

inline bool test(std::span<const Word> row, std::size_t j) noexcept {
  return (row[j / kWordBits] >> (j % kWordBits)) & 1U;
}
inline void set(std::span<Word> row, std::size_t j) noexcept {
  row[j / kWordBits] |= Word{1} << (j % kWordBits);
}

/// Mask of valid bits in the last word of an n-bit row.
constexpr Word tail_mask(std::size_t n) noexcept {
  const std::size_t rem = n % kWordBits;
  return rem == 0 ? ~Word{0} : ((Word{1} << rem) - 1);
}

inline std::size_t popcount(std::span<const Word> a) noexcept {
  std::size_t n = 0;
  for (Word w : a) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

inline std::size_t popcount_and(std::span<const Word> a, std::span<const Word> b) noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return n;
}

inline std::size_t popcount_and3(std::span<const Word> a, std::span<const Word> b,
                                 std::span<const Word> c) noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(a[i] & b[i] & c[i]));
  return n;
}

inline bool intersects(std::span<const Word> a, std::span<const Word> b) noexcept {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & b[i]) return true;
  return false;
}

}  // namespace ssbmf::bits
