#include "ssbmf/mu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssbmf/error.hpp"

namespace ssbmf {

BigInt binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (long i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

MuTable::MuTable(std::size_t r, std::size_t k, std::size_t t_max) : r_(r), k_(k) {
  if (k == 0 || k > r) throw ParameterError("mu table needs 1 <= k <= r");
  if (t_max > r) throw ParameterError("t_max must not exceed r");
  denominator_ = binomial(static_cast<long>(r), static_cast<long>(k));
  numerators_.reserve(t_max + 1);
  for (std::size_t t = 0; t <= t_max; ++t)
    numerators_.push_back(binomial(static_cast<long>(r - t), static_cast<long>(k)));
}

Rational MuTable::value(std::size_t t) const { return Rational(numerator(t), denominator_); }

double MuTable::approx(std::size_t t) const {
  return static_cast<double>(value(t));
}

std::size_t MuTable::invert(std::uint64_t count, std::uint64_t total) const {
  if (total == 0) throw ParameterError("empty population");
  // mu_t is nonincreasing in t, so the nearest value is the first t whose
  // midpoint with mu_{t+1} lies at or below the observed fraction.
  const BigInt lhs = BigInt(2) * count * denominator_;
  for (std::size_t t = 0; t < t_max(); ++t)
    if (lhs >= (numerators_[t] + numerators_[t + 1]) * total) return t;
  return t_max();
}

std::size_t MuTable::invert(const Rational& fraction) const {
  for (std::size_t t = 0; t < t_max(); ++t)
    if (2 * fraction * denominator_ >= numerators_[t] + numerators_[t + 1]) return t;
  return t_max();
}

std::uint64_t MuTable::count_threshold(std::size_t t, std::uint64_t total) const {
  // ceil((num_t + num_{t+1}) * total / (2 * den))
  const BigInt num = (numerators_.at(t) + numerators_.at(t + 1)) * total;
  const BigInt den = 2 * denominator_;
  BigInt q = num / den;
  if (q * den < num) ++q;
  return static_cast<std::uint64_t>(q);
}

MuTable mu_table(std::size_t r, std::size_t k, std::optional<std::size_t> t_max) {
  if (k == 0 || k > r) throw ParameterError("mu table needs 1 <= k <= r");
  return MuTable(r, k, t_max.value_or(std::min(3 * k, r - k)));
}

std::size_t invert_fraction(double fraction, const MuTable& table) {
  if (!std::isfinite(fraction)) throw ParameterError("fraction must be finite");
  int exponent = 0;
  const double mantissa = std::frexp(fraction, &exponent);
  // fraction = mantissa * 2^exponent with |mantissa| in [0.5, 1): scale to an integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  Rational exact(scaled);
  const int shift = exponent - 53;
  if (shift >= 0)
    exact *= Rational(BigInt(1) << shift);
  else
    exact /= Rational(BigInt(1) << -shift);
  return table.invert(exact);
}

InversionLookup::InversionLookup(const MuTable& table, std::uint64_t total) {
  if (total == 0) throw ParameterError("empty population");
  t_.assign(total + 1, static_cast<std::uint8_t>(table.t_max()));
  // Thresholds are nonincreasing in t; fill from the largest t down.
  for (std::size_t t = table.t_max(); t-- > 0;) {
    const std::uint64_t from = std::min<std::uint64_t>(table.count_threshold(t, total), total + 1);
    std::fill(t_.begin() + static_cast<std::ptrdiff_t>(from), t_.end(), static_cast<std::uint8_t>(t));
  }
}

std::size_t zero_cooccurrence(const GramMatrix& m, std::span<const std::size_t> rows) {
  return kernels::zero_count(m, rows);
}

LikelihoodInverter::LikelihoodInverter(const MuTable& table) : k_(static_cast<int>(table.k())) {
  const std::size_t r = table.r(), k = table.k();
  if (table.denominator() > BigInt(std::int64_t{1} << 60))
    throw ParameterError("likelihood inversion needs C(r,k) < 2^60");
  for (std::size_t t = 0; t <= std::min(3 * k, r); ++t)
    num_.push_back(static_cast<std::int64_t>(binomial(static_cast<long>(r - t), static_cast<long>(k))));
}

// Cell probabilities are kept as numerators over C(r,k); the common
// denominator only shifts every candidate's score by the same amount.
double LikelihoodInverter::score(std::int64_t count, std::int64_t numerator) const {
  if (count <= 0) return 0.0;
  return static_cast<double>(count) * (numerator > 0 ? std::log(static_cast<double>(numerator)) : std::log(0.5));
}

namespace {

// Running argmax over candidate unions. A candidate whose cell numerators
// include a negative value is not a distribution; it is only used when no
// candidate is.
class Best {
 public:
  explicit Best(int lo) : any_(lo), valid_(-1) {}

  template <std::size_t N, class Inverter>
  void offer(int t, const std::array<std::int64_t, N>& cells, const std::array<std::int64_t, N>& counts,
             const Inverter& inv) {
    double s = 0.0;
    bool valid = true;
    for (std::size_t i = 0; i < N; ++i) {
      valid = valid && cells[i] >= 0;
      s += inv.score(counts[i], cells[i]);
    }
    if (s > any_score_) {
      any_score_ = s;
      any_ = t;
    }
    if (valid && s > valid_score_) {
      valid_score_ = s;
      valid_ = t;
    }
  }

  int value() const { return valid_ >= 0 ? valid_ : any_; }

 private:
  int any_, valid_;
  double any_score_ = -std::numeric_limits<double>::infinity();
  double valid_score_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

int LikelihoodInverter::pair(std::uint64_t z_a, std::uint64_t z_b, std::uint64_t z_ab, std::uint64_t n, int lo,
                             int hi) const {
  const auto both = static_cast<std::int64_t>(z_ab);
  const auto only_a = static_cast<std::int64_t>(z_a) - both;
  const auto only_b = static_cast<std::int64_t>(z_b) - both;
  const auto neither = static_cast<std::int64_t>(n) - both - only_a - only_b;
  Best best(lo);
  for (int t = lo; t <= hi; ++t) {
    const std::int64_t miss_one = num(k_) - num(t);
    const std::array<std::int64_t, 4> cells{num(t), miss_one, miss_one, num(0) - 2 * num(k_) + num(t)};
    const std::array<std::int64_t, 4> counts{both, only_a, only_b, neither};
    best.offer(t, cells, counts, *this);
  }
  return best.value();
}

int LikelihoodInverter::triple(const std::array<std::uint64_t, 3>& z1, const std::array<std::uint64_t, 3>& z2,
                               std::uint64_t z3, std::uint64_t n, const std::array<int, 3>& t2, int lo,
                               int hi) const {
  // Pair order is (ab, ac, bc); row a sits in pairs 0 and 1, b in 0 and 2, c in 1 and 2.
  constexpr int pairs_of[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  const auto all = static_cast<std::int64_t>(z3);
  std::array<std::int64_t, 3> pair_only{}, single_only{};
  for (int i = 0; i < 3; ++i) pair_only[i] = static_cast<std::int64_t>(z2[i]) - all;
  for (int i = 0; i < 3; ++i)
    single_only[i] = static_cast<std::int64_t>(z1[i]) - static_cast<std::int64_t>(z2[pairs_of[i][0]]) -
                     static_cast<std::int64_t>(z2[pairs_of[i][1]]) + all;
  std::int64_t none = static_cast<std::int64_t>(n) - all;
  for (int i = 0; i < 3; ++i) none -= pair_only[i] + single_only[i];

  const std::int64_t pair_sum = num(t2[0]) + num(t2[1]) + num(t2[2]);
  Best best(lo);
  for (int t = lo; t <= hi; ++t) {
    const std::int64_t u = num(t);
    std::array<std::int64_t, 8> cells{u, num(0) - 3 * num(k_) + pair_sum - u};
    std::array<std::int64_t, 8> counts{all, none};
    for (int i = 0; i < 3; ++i) {
      cells[2 + i] = num(t2[i]) - u;
      counts[2 + i] = pair_only[i];
      cells[5 + i] = num(k_) - num(t2[pairs_of[i][0]]) - num(t2[pairs_of[i][1]]) + u;
      counts[5 + i] = single_only[i];
    }
    best.offer(t, cells, counts, *this);
  }
  return best.value();
}

std::vector<std::uint32_t> single_zero_counts(const GramMatrix& m, std::span<const std::size_t> rows) {
  std::vector<std::uint32_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t one[1] = {rows[i]};
    out[i] = static_cast<std::uint32_t>(kernels::zero_count(m, one));
  }
  return out;
}

ByteMatrix union_sizes(const GramMatrix& m, const MuTable& table, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols, Exec exec, InversionPolicy policy) {
  std::vector<std::uint32_t> counts(rows.size() * cols.size());
  kernels::pair_zero_counts(m, rows, cols, counts, exec);
  const int k = static_cast<int>(table.k());
  const std::uint64_t population = effective_population(m.m(), 2);

  std::optional<InversionLookup> lookup;
  std::optional<LikelihoodInverter> inverter;
  std::vector<std::uint32_t> z_rows, z_cols;
  if (policy.method == Inversion::nearest) {
    lookup.emplace(table, population);
  } else {
    inverter.emplace(table);
    z_rows = single_zero_counts(m, rows);
    z_cols = single_zero_counts(m, cols);
  }

  ByteMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const std::size_t a = rows[i], b = cols[j];
      if (a == b) {
        out(i, j) = static_cast<std::uint8_t>(k);
        continue;
      }
      const bool meets = m.bit(a, b);
      const std::uint32_t z_ab = counts[i * cols.size() + j];
      int t;
      if (lookup) {
        t = (*lookup)(z_ab);
        if (policy.constrained) t = meets ? std::clamp(t, k, 2 * k - 1) : 2 * k;
      } else {
        int lo = k, hi = std::min(2 * k, inverter->max_union());
        if (policy.constrained) {
          if (meets)
            hi = std::min(hi, 2 * k - 1);
          else
            lo = hi = 2 * k;
        }
        // Single zero counts range over all l; drop l in {a, b}.
        const std::uint64_t z_a = z_rows[i] - (meets ? 0 : 1), z_b = z_cols[j] - (meets ? 0 : 1);
        t = lo == hi ? lo : inverter->pair(z_a, z_b, z_ab, population, lo, hi);
      }
      out(i, j) = static_cast<std::uint8_t>(t);
    }
  return out;
}

ByteMatrix pairwise_union_sizes(const GramMatrix& m, const MuTable& table, Exec exec, InversionPolicy policy) {
  std::vector<std::size_t> all(m.m());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return union_sizes(m, table, all, all, exec, policy);
}

std::uint64_t required_sample_size(std::size_t r, std::size_t k, std::size_t t, double delta, double c0) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (t == 0 || k == 0 || r == 0) throw ParameterError("r, k and t must be positive");
  if (!(c0 > 0.0)) throw ParameterError("sample-size constant must be positive");
  const double scale = c0 * static_cast<double>(t * t) * static_cast<double>(r) / static_cast<double>(k);
  auto bound = [&](double m) { return scale * std::log(m * m * m / delta); };
  // Iterating from below converges to the smallest fixed point because the
  // bound is increasing in m.
  std::uint64_t m = 1;
  for (int iter = 0; iter < 10000; ++iter) {
    const double need = bound(static_cast<double>(m));
    if (static_cast<double>(m) >= need) return m;
    m = std::max<std::uint64_t>(m + 1, static_cast<std::uint64_t>(std::ceil(need)));
  }
  throw Error("sample-size iteration did not converge");
}

}  // namespace ssbmf
