#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <array>

#include <boost/multiprecision/cpp_int.hpp>

#include "ssbmf/instance.hpp"
#include "ssbmf/kernels.hpp"

namespace ssbmf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// C(n, k); zero when k < 0, k > n or n < 0.
BigInt binomial(long n, long k);

/// Non-intersection probabilities mu_t = C(r - t, k) / C(r, k): the chance a
/// uniform k-subset of [r] misses a fixed set of size t. Stored exactly as
/// numerators over the common denominator C(r, k).
class MuTable {
 public:
  MuTable(std::size_t r, std::size_t k, std::size_t t_max);

  std::size_t r() const noexcept { return r_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t t_max() const noexcept { return numerators_.size() - 1; }

  const BigInt& numerator(std::size_t t) const { return numerators_.at(t); }
  const BigInt& denominator() const noexcept { return denominator_; }
  Rational value(std::size_t t) const;
  double approx(std::size_t t) const;

  /// argmin_t |mu_t - count/total| with ties going to the smaller t.
  std::size_t invert(std::uint64_t count, std::uint64_t total) const;
  std::size_t invert(const Rational& fraction) const;

  /// Smallest count c with invert(c, total) <= t, for t < t_max.
  std::uint64_t count_threshold(std::size_t t, std::uint64_t total) const;

 private:
  std::size_t r_, k_;
  std::vector<BigInt> numerators_;
  BigInt denominator_;
};

/// Default t_max = min(3k, r - k).
MuTable mu_table(std::size_t r, std::size_t k, std::optional<std::size_t> t_max = std::nullopt);

/// Nearest mu_t to an observed fraction, compared exactly (a double is an
/// exact dyadic rational).
std::size_t invert_fraction(double fraction, const MuTable& table);

/// Precomputed count -> union size map for one population size.
class InversionLookup {
 public:
  InversionLookup(const MuTable& table, std::uint64_t total);
  std::uint8_t operator()(std::uint64_t count) const { return t_.at(count); }
  std::uint64_t total() const noexcept { return t_.size() - 1; }

 private:
  std::vector<std::uint8_t> t_;
};

enum class Inversion { nearest, likelihood };

/// How zero counts become union sizes.
struct InversionPolicy {
  /// nearest: argmin_t |mu_t - Z/N| on the joint zero count alone.
  /// likelihood: maximize the multinomial likelihood of the full miss/hit
  /// pattern of the other rows, recovered from nested zero counts.
  Inversion method = Inversion::likelihood;
  /// Only consider union sizes compatible with the Boolean entries of M and
  /// with the pair unions already fixed (see TensorOptions).
  bool constrained = true;
};

/// Maximum-likelihood inversion over a bounded range of union sizes.
///
/// Each row l outside the queried set misses a set of queried supports with
/// probability mu of their union, so the pattern counts are multinomial in
/// the mu values. Cells with zero model probability but a nonzero count are
/// scored as probability 1/2 over C(r,k) instead of minus infinity, so
/// contradictory data still produce a deterministic answer. Candidates that
/// give some cell a negative probability are skipped unless every candidate
/// does. Ties go to the smaller union.
class LikelihoodInverter {
 public:
  explicit LikelihoodInverter(const MuTable& table);

  /// |S_a ∪ S_b| in [lo, hi] from zero counts z_a, z_b, z_ab over n rows.
  int pair(std::uint64_t z_a, std::uint64_t z_b, std::uint64_t z_ab, std::uint64_t n, int lo, int hi) const;

  /// |S_a ∪ S_b ∪ S_c| in [lo, hi]. z1 = (z_a, z_b, z_c), z2 = (z_ab, z_ac,
  /// z_bc) with matching pair unions t2, z3 = z_abc, all over n rows.
  int triple(const std::array<std::uint64_t, 3>& z1, const std::array<std::uint64_t, 3>& z2, std::uint64_t z3,
             std::uint64_t n, const std::array<int, 3>& t2, int lo, int hi) const;

  int max_union() const noexcept { return static_cast<int>(num_.size()) - 1; }

  /// count * log(numerator), the log-likelihood of one cell up to a constant.
  double score(std::int64_t count, std::int64_t numerator) const;

 private:
  std::int64_t num(int t) const { return num_[static_cast<std::size_t>(std::min(t, max_union()))]; }
  int k_;
  std::vector<std::int64_t> num_;
};

/// Number of l in [m] with M(a, l) = 0 for every listed row a.
std::size_t zero_cooccurrence(const GramMatrix& m, std::span<const std::size_t> rows);

/// Population used to turn a zero count over `distinct` queried rows into a
/// fraction. The queried rows themselves always have M(a,a) = 1, so they
/// never contribute and are excluded.
inline std::uint64_t effective_population(std::size_t m, std::size_t distinct) {
  return m > distinct ? m - distinct : 1;
}

/// Square matrix of small integers.
struct ByteMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint8_t> data;

  ByteMatrix() = default;
  ByteMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows(rows), cols(cols), data(rows * cols, fill) {}
  std::uint8_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Zero count of each listed row on its own.
std::vector<std::uint32_t> single_zero_counts(const GramMatrix& m, std::span<const std::size_t> rows);

/// Entry (a, b) is the inverted union size |S_a ∪ S_b|; diagonal is k.
/// When the policy is constrained, the Boolean entry M(a,b) is used as well:
/// 0 pins the union to 2k, 1 restricts it to [k, 2k-1].
ByteMatrix pairwise_union_sizes(const GramMatrix& m, const MuTable& table, Exec exec = Exec::parallel,
                                InversionPolicy policy = {});

/// Union sizes between listed rows and listed columns of M (rows of W).
ByteMatrix union_sizes(const GramMatrix& m, const MuTable& table, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols, Exec exec = Exec::parallel, InversionPolicy policy = {});

/// Smallest m >= 1 with m >= c0 * (t^2 r / k) * ln(m^3 / delta).
std::uint64_t required_sample_size(std::size_t r, std::size_t k, std::size_t t, double delta, double c0 = 8.0);

}  // namespace ssbmf
