#include "ssbmf/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ssbmf/error.hpp"
#include "ssbmf/rng.hpp"

namespace ssbmf::probes {

namespace {

// Calls f(subset) for every k-subset of [r] in lexicographic order.
template <typename F>
void for_each_subset(std::size_t r, std::size_t k, F&& f) {
  if (k > r) return;
  std::vector<std::size_t> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  while (true) {
    f(std::span<const std::size_t>(s));
    std::size_t i = k;
    while (i > 0 && s[i - 1] == r - k + i - 1) --i;
    if (i == 0) return;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t out = 1 % p;
  a %= p;
  for (; e; e >>= 1) {
    if (e & 1) out = mulmod(out, a, p);
    a = mulmod(a, a, p);
  }
  return out;
}

}  // namespace

BigInt krawtchouk(std::size_t r, std::size_t k, std::size_t lambda) {
  if (lambda > r || k > r) throw ParameterError("krawtchouk needs lambda <= r and k <= r");
  BigInt out = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    const BigInt term = binomial(static_cast<long>(lambda), static_cast<long>(i)) *
                        binomial(static_cast<long>(r - lambda), static_cast<long>(k - i));
    if (i % 2) out -= term;
    else out += term;
  }
  return out;
}

Rational f2_zero_probability(std::size_t r, std::size_t k, std::size_t lambda) {
  if (lambda > r || k > r) throw ParameterError("need lambda <= r and k <= r");
  BigInt even = 0;
  for (std::size_t i = 0; i <= k; i += 2)
    even += binomial(static_cast<long>(lambda), static_cast<long>(i)) *
            binomial(static_cast<long>(r - lambda), static_cast<long>(k - i));
  return Rational(even, binomial(static_cast<long>(r), static_cast<long>(k)));
}

Rational f2_zero_probability_enumerated(std::size_t r, std::size_t k, std::size_t lambda) {
  if (lambda > r || k > r) throw ParameterError("need lambda <= r and k <= r");
  BigInt even = 0, total = 0;
  for_each_subset(r, k, [&](std::span<const std::size_t> s) {
    const auto overlap = std::count_if(s.begin(), s.end(), [&](std::size_t c) { return c < lambda; });
    ++total;
    if (overlap % 2 == 0) ++even;
  });
  return Rational(even, total);
}

std::size_t rank_f2(const SelectionMatrix& w) {
  // XOR basis of the row masks keyed by leading bit.
  const std::size_t words = w.mask_words();
  std::vector<std::vector<bits::Word>> basis(w.r());
  std::vector<bool> used(w.r(), false);
  std::size_t rank = 0;
  std::vector<bits::Word> row(words);
  for (std::size_t i = 0; i < w.m() && rank < w.r(); ++i) {
    std::copy(w.mask(i).begin(), w.mask(i).end(), row.begin());
    for (std::size_t bit = w.r(); bit-- > 0;) {
      if (!bits::test(row, bit)) continue;
      if (!used[bit]) {
        basis[bit] = row;
        used[bit] = true;
        ++rank;
        break;
      }
      for (std::size_t q = 0; q < words; ++q) row[q] ^= basis[bit][q];
    }
  }
  return rank;
}

std::size_t rank_mod_p(const SelectionMatrix& w, std::uint64_t p) {
  if (p < 2) throw ParameterError("modulus must be at least 2");
  const std::size_t m = w.m(), r = w.r();
  std::vector<std::uint64_t> a(m * r, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (auto c : w.support(i)) a[i * r + c] = 1 % p;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < r && rank < m; ++c) {
    std::size_t pivot = rank;
    while (pivot < m && a[pivot * r + c] == 0) ++pivot;
    if (pivot == m) continue;
    if (pivot != rank)
      for (std::size_t j = 0; j < r; ++j) std::swap(a[pivot * r + j], a[rank * r + j]);
    const std::uint64_t inv = powmod(a[rank * r + c], p - 2, p);
    for (std::size_t i = rank + 1; i < m; ++i) {
      const std::uint64_t f = mulmod(a[i * r + c], inv, p);
      if (f == 0) continue;
      for (std::size_t j = c; j < r; ++j) {
        const std::uint64_t sub = mulmod(f, a[rank * r + j], p);
        a[i * r + j] = a[i * r + j] >= sub ? a[i * r + j] - sub : a[i * r + j] + p - sub;
      }
    }
    ++rank;
  }
  return rank;
}

std::size_t rank_bareiss(const SelectionMatrix& w) {
  const std::size_t m = w.m(), r = w.r();
  std::vector<BigInt> a(m * r, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (auto c : w.support(i)) a[i * r + c] = 1;
  BigInt prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < r && rank < m; ++c) {
    std::size_t pivot = rank;
    while (pivot < m && a[pivot * r + c] == 0) ++pivot;
    if (pivot == m) continue;
    if (pivot != rank)
      for (std::size_t j = 0; j < r; ++j) std::swap(a[pivot * r + j], a[rank * r + j]);
    const BigInt& piv = a[rank * r + c];
    for (std::size_t i = rank + 1; i < m; ++i) {
      const BigInt f = a[i * r + c];
      for (std::size_t j = c + 1; j < r; ++j) a[i * r + j] = (a[i * r + j] * piv - f * a[rank * r + j]) / prev;
      a[i * r + c] = 0;
    }
    prev = piv;
    ++rank;
  }
  return rank;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
    if (n % p == 0) return n == p;
  std::uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  // These bases are deterministic for every 64-bit n.
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s && composite; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) composite = false;
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> random_primes(std::size_t count, std::uint64_t seed) {
  Rng rng(seed, 0x7072696d6573ULL);
  std::vector<std::uint64_t> out;
  while (out.size() < count) {
    const std::uint64_t candidate = (std::uint64_t{1} << 61) | (rng.next() >> 3) | 1;
    if (is_prime(candidate) && std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(candidate);
  }
  return out;
}

RankReport rank_report(const SelectionMatrix& w, std::span<const std::uint64_t> primes, std::uint64_t seed) {
  RankReport out;
  out.rank_f2 = rank_f2(w);
  std::vector<std::uint64_t> all(primes.begin(), primes.end());
  for (auto p : all)
    if (!is_prime(p)) throw ParameterError(std::to_string(p) + " is not prime");
  for (auto p : random_primes(3, seed)) all.push_back(p);
  for (auto p : all) {
    const std::size_t rk = rank_mod_p(w, p);
    out.rank_mod.emplace_back(p, rk);
    out.rank_real = std::max(out.rank_real, rk);
  }
  const std::size_t full = std::min(w.m(), w.r());
  if (out.rank_real == full) {
    out.certified = true;
    out.method = "modular elimination reached min(m, r)";
  } else if (w.r() <= 200) {
    out.rank_real = rank_bareiss(w);
    out.certified = true;
    out.method = "fraction-free elimination";
  } else {
    out.method = "largest modular rank (uncertified lower bound)";
  }
  return out;
}

Proportion wilson(std::size_t successes, std::size_t trials, double z) {
  Proportion p{successes, trials, 0.0, 0.0, 1.0};
  if (trials == 0) return p;
  const double n = static_cast<double>(trials);
  const double f = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (f + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(f * (1 - f) / n + z2 / (4 * n * n));
  p.frequency = f;
  p.ci_low = std::max(0.0, centre - half);
  p.ci_high = std::min(1.0, centre + half);
  return p;
}

SingularityRecord singularity_experiment(std::size_t m, std::size_t r, std::size_t k, std::size_t trials,
                                         std::uint64_t seed) {
  if (trials == 0) throw ParameterError("need at least one trial");
  if (k == 0 || k > r || m == 0) throw ParameterError("need m >= 1 and 1 <= k <= r");
  const auto primes = random_primes(3, seed);
  std::size_t f2 = 0, real = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : f2, real)
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    const SelectionMatrix w = gen_selection_matrix(m, r, k, rng.next());
    f2 += rank_f2(w) == r;
    // A full modular rank certifies full real rank; otherwise decide exactly.
    bool full = std::any_of(primes.begin(), primes.end(), [&](std::uint64_t p) { return rank_mod_p(w, p) == r; });
    if (!full && r <= 200) full = rank_bareiss(w) == r;
    real += full;
  }
  return {m, r, k, wilson(f2, trials), wilson(real, trials)};
}

BoundCheck krawtchouk_bound_check(std::size_t r, std::size_t k) {
  if (r == 0 || 100 * k > 16 * r) throw ParameterError("bound check needs k <= 0.16 r");
  BoundCheck out;
  const BigInt c = binomial(static_cast<long>(r), static_cast<long>(k));
  // |K| <= C(r,k) ((r - 2k) / r)^lambda  <=>  |K| r^lambda <= C(r,k) (r - 2k)^lambda.
  BigInt r_pow = 1, gap_pow = 1;
  for (std::size_t lambda = 0; 2 * lambda <= r; ++lambda) {
    BigInt kv = krawtchouk(r, k, lambda);
    if (kv < 0) kv = -kv;
    ++out.checked;
    if (kv * r_pow > c * gap_pow && !out.violation) out.violation = lambda;
    r_pow *= r;
    gap_pow *= r - 2 * k;
  }
  return out;
}

FibreStats fibre_stats(std::span<const long> x) {
  std::map<long, std::size_t> counts;
  FibreStats out;
  for (long v : x) {
    out.largest = std::max(out.largest, ++counts[v]);
    out.support += v != 0;
  }
  return out;
}

namespace {

long reduce(long value, std::uint64_t q) {
  if (q == 0) return value;
  const auto qq = static_cast<long>(q);
  return ((value % qq) + qq) % qq;
}

}  // namespace

Anticoncentration anticoncentration_estimate(std::span<const long> x, std::size_t k, std::uint64_t q,
                                             std::size_t samples, std::uint64_t seed, double constant) {
  const std::size_t r = x.size();
  if (samples == 0) throw ParameterError("need at least one sample");
  if (k == 0 || k > r) throw ParameterError("need 1 <= k <= r");
  Rng rng(seed, 0x616e7469ULL);
  std::map<long, std::size_t> atoms;
  std::size_t best = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    long sum = 0;
    for (auto c : sample_k_subset(rng, r, k)) sum += x[c];
    best = std::max(best, ++atoms[reduce(sum, q)]);
  }
  Anticoncentration out;
  out.max_atom = static_cast<double>(best) / static_cast<double>(samples);
  out.s = r - fibre_stats(x).largest;
  out.envelope = out.s == 0 ? std::numeric_limits<double>::infinity()
                            : constant * std::sqrt(static_cast<double>(r) / (static_cast<double>(out.s * k)));
  out.within = out.max_atom <= out.envelope;
  return out;
}

double anticoncentration_exact(std::span<const long> x, std::size_t k, std::uint64_t q) {
  const std::size_t r = x.size();
  if (k == 0 || k > r) throw ParameterError("need 1 <= k <= r");
  std::map<long, std::size_t> atoms;
  std::size_t best = 0, total = 0;
  for_each_subset(r, k, [&](std::span<const std::size_t> s) {
    long sum = 0;
    for (auto c : s) sum += x[c];
    best = std::max(best, ++atoms[reduce(sum, q)]);
    ++total;
  });
  return static_cast<double>(best) / static_cast<double>(total);
}

}  // namespace ssbmf::probes
