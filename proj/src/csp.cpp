#include "ssbmf/csp.hpp"

#include <bit>
#include <limits>

#include "ssbmf/error.hpp"
#include "ssbmf/rng.hpp"

namespace ssbmf::csp {

Alphabet::Alphabet(std::size_t r, std::size_t k) : r_(r), k_(k) {
  if (k == 0 || k > r) throw ParameterError("alphabet needs 1 <= k <= r");
  if (r > 64) throw ParameterError("alphabet supports r <= 64");
  binom_.assign((r + 1) * (k + 1), 0);
  for (std::size_t n = 0; n <= r; ++n) {
    binom_[n * (k + 1)] = 1;
    for (std::size_t j = 1; j <= std::min(n, k); ++j)
      binom_[n * (k + 1) + j] = binom_[(n - 1) * (k + 1) + j - 1] + (j <= n - 1 ? binom_[(n - 1) * (k + 1) + j] : 0);
  }
  size_ = choose(r, k);
}

std::uint64_t Alphabet::rank(std::span<const std::uint32_t> letter) const {
  if (letter.size() != k_) throw ParameterError("letter must have k entries");
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < k_; ++i) {
    if (letter[i] >= r_ || (i > 0 && letter[i] <= letter[i - 1]))
      throw ParameterError("letter must be strictly increasing indices below r");
    out += choose(letter[i], i + 1);
  }
  return out;
}

std::vector<std::uint32_t> Alphabet::unrank(std::uint64_t rank) const {
  if (rank >= size_) throw ParameterError("rank outside the alphabet");
  std::vector<std::uint32_t> out(k_);
  std::size_t c = r_;
  for (std::size_t i = k_; i-- > 0;) {
    // Largest c with C(c, i + 1) <= rank.
    do --c;
    while (choose(c, i + 1) > rank);
    out[i] = static_cast<std::uint32_t>(c);
    rank -= choose(c, i + 1);
  }
  return out;
}

std::uint64_t Alphabet::mask(std::uint64_t rank) const {
  std::uint64_t out = 0;
  for (auto c : unrank(rank)) out |= std::uint64_t{1} << c;
  return out;
}

namespace {

int max_target(Mode mode, std::size_t k) { return mode == Mode::integer ? static_cast<int>(k) : 1; }

bool satisfied(const CspInstance& inst, std::uint64_t a, std::uint64_t b, int target) {
  const int overlap = std::popcount(a & b);
  return inst.mode == Mode::integer ? overlap == target : (overlap > 0) == (target != 0);
}

// Letter masks, built once per solve.
std::vector<std::uint64_t> all_masks(const Alphabet& alphabet) {
  std::vector<std::uint64_t> out(alphabet.size());
  for (std::uint64_t i = 0; i < alphabet.size(); ++i) out[i] = alphabet.mask(i);
  return out;
}

// Calls f(u, v, target) for every edge.
template <typename F>
void for_each_edge(const CspInstance& inst, F&& f) {
  if (inst.graph == Graph::complete) {
    for (std::size_t u = 0; u < inst.rows; ++u)
      for (std::size_t v = u + 1; v < inst.rows; ++v) f(u, v, inst.target(u, v));
  } else {
    for (std::size_t i = 0; i < inst.rows; ++i)
      for (std::size_t j = 0; j < inst.cols; ++j) f(i, inst.rows + j, inst.target(i, j));
  }
}

// Neighbours of u with the target on the connecting edge.
template <typename F>
void for_each_neighbour(const CspInstance& inst, std::size_t u, F&& f) {
  if (inst.graph == Graph::complete) {
    for (std::size_t v = 0; v < inst.rows; ++v)
      if (v != u) f(v, inst.target(u, v));
  } else if (u < inst.rows) {
    for (std::size_t j = 0; j < inst.cols; ++j) f(inst.rows + j, inst.target(u, j));
  } else {
    for (std::size_t i = 0; i < inst.rows; ++i) f(i, inst.target(i, u - inst.rows));
  }
}

std::size_t evaluate_masks(const CspInstance& inst, const std::vector<std::uint64_t>& letters) {
  std::size_t value = 0;
  for_each_edge(inst, [&](std::size_t u, std::size_t v, int t) { value += satisfied(inst, letters[u], letters[v], t); });
  return value;
}

}  // namespace

CspInstance reduce_symmetric(const GramMatrix& m, std::size_t r, std::size_t k, Mode mode) {
  CspInstance inst{Alphabet(r, k), mode, Graph::complete, m.m(), m.m(), {}};
  if (!m.is_symmetric()) throw ParameterError("Gram matrix must be symmetric");
  if (mode == Mode::integer && !m.has_counts()) throw ParameterError("integer mode needs integer Gram entries");
  inst.targets.resize(m.m() * m.m());
  const Arithmetic arith = mode == Mode::integer ? Arithmetic::integer : Arithmetic::boolean;
  for (std::size_t a = 0; a < m.m(); ++a)
    for (std::size_t b = 0; b < m.m(); ++b) {
      const int e = m.entry(a, b, arith);
      if (e < 0 || e > max_target(mode, k))
        throw ParameterError("entry (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
      inst.targets[a * m.m() + b] = e;
    }
  return inst;
}

CspInstance reduce_asymmetric(const std::vector<std::vector<int>>& m, std::size_t r, std::size_t k) {
  const std::size_t rows = m.size(), cols = rows ? m.front().size() : 0;
  CspInstance inst{Alphabet(r, k), Mode::integer, Graph::bipartite, rows, cols, {}};
  inst.targets.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (m[i].size() != cols) throw DimensionError("target matrix rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (m[i][j] < 0 || m[i][j] > static_cast<int>(k))
        throw ParameterError("entry (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
      inst.targets.push_back(m[i][j]);
    }
  }
  return inst;
}

std::size_t evaluate(const CspInstance& inst, std::span<const std::uint64_t> sigma) {
  if (sigma.size() != inst.vertices()) throw DimensionError("assignment must cover every vertex");
  std::vector<std::uint64_t> letters(sigma.size());
  for (std::size_t u = 0; u < sigma.size(); ++u) letters[u] = inst.alphabet.mask(sigma[u]);
  return evaluate_masks(inst, letters);
}

Assignment solve_exact(const CspInstance& inst, std::uint64_t budget) {
  const std::size_t n = inst.vertices();
  const std::uint64_t q = inst.alphabet.size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > budget / q) throw BudgetError("search space exceeds budget of " + std::to_string(budget));
    total *= q;
  }
  if (total > budget) throw BudgetError("search space exceeds budget of " + std::to_string(budget));

  const auto masks = all_masks(inst.alphabet);
  Sigma sigma(n, 0);
  std::vector<std::uint64_t> letters(n, masks[0]);
  Assignment best{sigma, evaluate_masks(inst, letters), 0};
  best.initial_value = best.value;
  for (std::uint64_t step = 1; step < total && best.value < inst.edges(); ++step) {
    // Odometer with the last vertex fastest, so the first optimum found is
    // the lexicographically smallest.
    std::size_t pos = n;
    while (pos-- > 0) {
      if (++sigma[pos] < q) break;
      sigma[pos] = 0;
    }
    for (std::size_t u = pos; u < n; ++u) letters[u] = masks[sigma[u]];
    const std::size_t value = evaluate_masks(inst, letters);
    if (value > best.value) {
      best.value = value;
      best.sigma = sigma;
    }
  }
  return best;
}

Assignment solve_local(const CspInstance& inst, std::size_t restarts, std::size_t iters, std::uint64_t seed) {
  if (restarts == 0) throw ParameterError("need at least one restart");
  const std::size_t n = inst.vertices();
  const std::uint64_t q = inst.alphabet.size();
  const auto masks = all_masks(inst.alphabet);
  std::vector<Assignment> results(restarts);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t run = 0; run < restarts; ++run) {
    Rng rng(seed, run);
    Sigma sigma(n);
    for (auto& s : sigma) s = rng.below(q);
    std::vector<std::uint64_t> letters(n);
    for (std::size_t u = 0; u < n; ++u) letters[u] = masks[sigma[u]];
    Assignment a{sigma, evaluate_masks(inst, letters), 0};
    a.initial_value = a.value;

    for (std::size_t it = 0; it < iters; ++it) {
      long best_gain = 0;
      std::size_t best_u = 0;
      std::uint64_t best_letter = 0;
      for (std::size_t u = 0; u < n; ++u) {
        auto incident = [&](std::uint64_t mask) {
          long count = 0;
          for_each_neighbour(inst, u, [&](std::size_t v, int t) { count += satisfied(inst, mask, letters[v], t); });
          return count;
        };
        const long current = incident(letters[u]);
        for (std::uint64_t x = 0; x < q; ++x) {
          const long gain = incident(masks[x]) - current;
          if (gain > best_gain) {
            best_gain = gain;
            best_u = u;
            best_letter = x;
          }
        }
      }
      if (best_gain <= 0) break;
      a.sigma[best_u] = best_letter;
      letters[best_u] = masks[best_letter];
      a.value += static_cast<std::size_t>(best_gain);
    }
    results[run] = std::move(a);
  }

  std::size_t best = 0;
  for (std::size_t run = 1; run < restarts; ++run)
    if (results[run].value > results[best].value) best = run;
  return results[best];
}

Factors assignment_to_factors(const CspInstance& inst, std::span<const std::uint64_t> sigma) {
  if (sigma.size() != inst.vertices()) throw DimensionError("assignment must cover every vertex");
  std::vector<std::vector<std::uint32_t>> left(inst.rows);
  for (std::size_t u = 0; u < inst.rows; ++u) left[u] = inst.alphabet.unrank(sigma[u]);
  Factors out{SelectionMatrix(inst.alphabet.r(), inst.alphabet.k(), std::move(left)), {}, evaluate(inst, sigma),
              inst.edges(), 0, 0};

  std::vector<std::uint64_t> letters(sigma.size());
  for (std::size_t u = 0; u < sigma.size(); ++u) letters[u] = inst.alphabet.mask(sigma[u]);
  auto entry = [&](std::uint64_t a, std::uint64_t b) {
    const int overlap = std::popcount(a & b);
    return inst.mode == Mode::integer ? overlap : static_cast<int>(overlap > 0);
  };
  if (inst.graph == Graph::complete) {
    for (std::size_t a = 0; a < inst.rows; ++a)
      for (std::size_t b = 0; b < inst.rows; ++b) {
        const bool differs = entry(letters[a], letters[b]) != inst.target(a, b);
        out.full_error += differs;
        if (a != b) out.off_diagonal_error += differs;
      }
  } else {
    for (std::size_t j = 0; j < inst.cols; ++j) out.v_rows.push_back(inst.alphabet.unrank(sigma[inst.rows + j]));
    for (std::size_t i = 0; i < inst.rows; ++i)
      for (std::size_t j = 0; j < inst.cols; ++j)
        out.off_diagonal_error += entry(letters[i], letters[inst.rows + j]) != inst.target(i, j);
    out.full_error = out.off_diagonal_error;
  }
  return out;
}

}  // namespace ssbmf::csp
