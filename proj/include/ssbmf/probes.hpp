#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssbmf/instance.hpp"
#include "ssbmf/mu.hpp"

namespace ssbmf::probes {

/// K_k^r(lambda) = sum_i (-1)^i C(lambda, i) C(r - lambda, k - i).
BigInt krawtchouk(std::size_t r, std::size_t k, std::size_t lambda);

/// Pr[<w, u> = 0 mod 2] for uniform k-sparse w and a fixed u of weight
/// lambda: sum over even i in 0..k of C(lambda, i) C(r - lambda, k - i) / C(r, k).
Rational f2_zero_probability(std::size_t r, std::size_t k, std::size_t lambda);

/// Same probability by enumerating every k-subset against u = {0..lambda-1}.
Rational f2_zero_probability_enumerated(std::size_t r, std::size_t k, std::size_t lambda);

std::size_t rank_f2(const SelectionMatrix& w);
/// Rank modulo a prime p < 2^63.
std::size_t rank_mod_p(const SelectionMatrix& w, std::uint64_t p);
/// Exact rank over the rationals by fraction-free (Bareiss) elimination.
std::size_t rank_bareiss(const SelectionMatrix& w);

bool is_prime(std::uint64_t n);
/// `count` distinct primes in [2^61, 2^62) drawn from stream `seed`.
std::vector<std::uint64_t> random_primes(std::size_t count, std::uint64_t seed);

struct RankReport {
  std::size_t rank_f2 = 0;
  std::vector<std::pair<std::uint64_t, std::size_t>> rank_mod;
  std::size_t rank_real = 0;
  /// True when rank_real is exact: either some modular rank reached
  /// min(m, r), or fraction-free elimination confirmed it.
  bool certified = false;
  std::string method;
};

/// Ranks over F2, modulo each listed prime, and over the reals. The real
/// rank is the largest modular rank over `primes` plus three random 62-bit
/// primes, confirmed by Bareiss elimination when it falls short of
/// min(m, r) and r <= 200.
RankReport rank_report(const SelectionMatrix& w, std::span<const std::uint64_t> primes = {},
                       std::uint64_t seed = 0);

struct Proportion {
  std::size_t successes = 0, trials = 0;
  double frequency = 0.0, ci_low = 0.0, ci_high = 0.0;
};

/// Wilson score interval.
Proportion wilson(std::size_t successes, std::size_t trials, double z = 1.96);

struct SingularityRecord {
  std::size_t m = 0, r = 0, k = 0;
  Proportion full_f2, full_real;
};

/// Fraction of random W (trial t uses generator stream t under `seed`) with
/// full column rank over F2 and over the reals.
SingularityRecord singularity_experiment(std::size_t m, std::size_t r, std::size_t k, std::size_t trials,
                                         std::uint64_t seed);

struct BoundCheck {
  std::size_t checked = 0;
  /// First lambda with |K| > C(r,k)(1 - 2k/r)^lambda, if any.
  std::optional<std::size_t> violation;
};

/// Exact check of |K_k^r(lambda)| <= C(r,k) (1 - 2k/r)^lambda for every
/// lambda <= r/2. Requires k <= 0.16 r.
BoundCheck krawtchouk_bound_check(std::size_t r, std::size_t k);

struct FibreStats {
  std::size_t largest = 0;
  std::size_t support = 0;
};

FibreStats fibre_stats(std::span<const long> x);

struct Anticoncentration {
  double max_atom = 0.0;
  /// r minus the largest fibre.
  std::size_t s = 0;
  /// constant * sqrt(r / (s k)); infinite when s = 0.
  double envelope = 0.0;
  bool within = false;
};

/// Monte-Carlo estimate of max_a Pr[<w, x> = a] over uniform k-sparse w,
/// with the inner product reduced mod q when q > 0.
Anticoncentration anticoncentration_estimate(std::span<const long> x, std::size_t k, std::uint64_t q,
                                             std::size_t samples, std::uint64_t seed, double constant = 3.0);

/// Exact max atom by enumerating all C(r, k) supports.
double anticoncentration_exact(std::span<const long> x, std::size_t k, std::uint64_t q);

}  // namespace ssbmf::probes
