#include "ssbmf/tensor.hpp"

#include <algorithm>
#include <array>
#include <initializer_list>
#include <limits>
#include <tuple>

#include "ssbmf/error.hpp"

namespace ssbmf {

namespace {

int checked(int value, std::size_t k, bool clamp, std::size_t a, std::size_t b, std::size_t c) {
  if (value >= 0 && value <= static_cast<int>(k)) return value;
  if (clamp) return std::clamp(value, 0, static_cast<int>(k));
  throw InconsistencyError(a, b, c, value);
}

// Zero counts for a triple of distinct rows, as computed over all m columns.
struct TripleCounts {
  std::array<std::uint64_t, 3> single;  // a, b, c
  std::array<std::uint64_t, 3> pair;    // ab, ac, bc
  std::uint64_t all;
};

// The counts over all m columns also see l in {a, b, c} whenever the
// relevant Gram entries vanish; the model only covers the other rows.
TripleCounts exclude_queried(TripleCounts z, const std::array<bool, 3>& meets) {
  const bool ab = !meets[0], ac = !meets[1], bc = !meets[2];
  z.single[0] -= ab + ac;
  z.single[1] -= ab + bc;
  z.single[2] -= ac + bc;
  z.pair[0] -= ac && bc;
  z.pair[1] -= ab && bc;
  z.pair[2] -= ab && ac;
  return z;
}

// Turns zero counts of a distinct triple into T(a,b,c) under one policy.
// May return a value outside [0, k]; callers decide whether that is fatal.
class TripleResolver {
 public:
  TripleResolver(const MuTable& table, std::size_t m, InversionPolicy policy)
      : r_(static_cast<int>(table.r())), k_(static_cast<int>(table.k())), population_(effective_population(m, 3)),
        policy_(policy), lookup_(table, population_) {
    if (policy.method == Inversion::likelihood) inverter_.emplace(table);
  }

  // meets = (M(a,b), M(a,c), M(b,c)); t2 = pair unions in the same order.
  int operator()(const std::array<int, 3>& t2, const std::array<bool, 3>& meets, const TripleCounts& z) const {
    const int offset = t2[0] + t2[1] + t2[2] - 3 * k_;
    int lo_t = std::max({t2[0], t2[1], t2[2]});
    int hi_t = std::min(3 * k_, r_);
    if (policy_.constrained) {
      const int i_ab = 2 * k_ - t2[0], i_ac = 2 * k_ - t2[1], i_bc = 2 * k_ - t2[2];
      const int ceiling = std::min({i_ab, i_ac, i_bc, r_ - offset});
      const int floor = std::max({0, i_ab + i_ac - k_, i_ab + i_bc - k_, i_ac + i_bc - k_});
      if (floor > ceiling) return -1;
      lo_t = floor + offset;
      hi_t = ceiling + offset;
    }
    int t;
    if (!inverter_) {
      t = lookup_(z.all);
      if (policy_.constrained) t = std::clamp(t, lo_t, hi_t);
    } else if (lo_t >= hi_t) {
      t = lo_t;
    } else {
      const TripleCounts x = exclude_queried(z, meets);
      t = inverter_->triple(x.single, x.pair, x.all, population_, t2, lo_t, hi_t);
    }
    return t - offset;
  }

 private:
  int r_, k_;
  std::uint64_t population_;
  InversionPolicy policy_;
  InversionLookup lookup_;
  std::optional<LikelihoodInverter> inverter_;
};

}  // namespace

struct IntersectionTensor::LazyState {
  std::shared_ptr<const GramMatrix> gram;
  std::size_t k;
  MuTable table;
  TensorOptions options;
  TripleResolver resolver;
  std::optional<ByteMatrix> pairwise;

  int pair_union(std::size_t a, std::size_t b) const {
    if (a == b) return static_cast<int>(k);
    if (pairwise) return (*pairwise)(a, b);
    const std::size_t one[1] = {a}, other[1] = {b};
    return union_sizes(*gram, table, one, other, Exec::serial, options.inversion)(0, 0);
  }

  std::uint64_t zero_count(std::initializer_list<std::size_t> rows) const {
    const std::vector<std::size_t> list(rows);
    return kernels::zero_count(*gram, list);
  }
};

IntersectionTensor::IntersectionTensor(std::size_t n, std::size_t k, std::vector<std::uint8_t> entries,
                                       std::vector<std::size_t> rows)
    : n_(n), k_(k), entries_(std::move(entries)), rows_(std::move(rows)) {
  if (entries_.size() != n_ * n_ * n_) throw DimensionError("tensor storage must hold n^3 entries");
  if (rows_.empty()) {
    rows_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) rows_[i] = i;
  }
  if (rows_.size() != n_) throw DimensionError("tensor row map must have n entries");
}

IntersectionTensor IntersectionTensor::lazy(std::shared_ptr<const GramMatrix> m, std::size_t r, std::size_t k,
                                            std::optional<ByteMatrix> pairwise, const TensorOptions& options) {
  if (!m) throw ParameterError("lazy tensor needs a Gram matrix");
  const std::size_t size = m->m();
  if (pairwise && (pairwise->rows != size || pairwise->cols != size))
    throw DimensionError("pairwise union matrix must be m x m");
  MuTable table = mu_table(r, k);
  TripleResolver resolver(table, size, options.inversion);
  IntersectionTensor t;
  t.n_ = size;
  t.k_ = k;
  t.rows_.resize(size);
  for (std::size_t i = 0; i < size; ++i) t.rows_[i] = i;
  t.lazy_ = std::make_shared<const LazyState>(
      LazyState{std::move(m), k, std::move(table), options, std::move(resolver), std::move(pairwise)});
  return t;
}

int IntersectionTensor::operator()(std::size_t a, std::size_t b, std::size_t c) const {
  if (a >= n_ || b >= n_ || c >= n_) throw DimensionError("tensor index out of range");
  if (!lazy_) return entries_[(a * n_ + b) * n_ + c];

  const LazyState& s = *lazy_;
  const bool clamp = s.options.clamp;
  std::array<std::size_t, 3> idx{a, b, c};
  std::sort(idx.begin(), idx.end());
  const auto [x, y, z] = idx;
  if (x == z) return static_cast<int>(k_);
  if (x == y || y == z) {
    const std::size_t other = x == y ? z : x;
    return checked(2 * static_cast<int>(k_) - s.pair_union(y, other), k_, clamp, a, b, c);
  }
  const GramMatrix& g = *s.gram;
  const TripleCounts counts{{s.zero_count({x}), s.zero_count({y}), s.zero_count({z})},
                            {s.zero_count({x, y}), s.zero_count({x, z}), s.zero_count({y, z})},
                            s.zero_count({x, y, z})};
  const int value = s.resolver({s.pair_union(x, y), s.pair_union(x, z), s.pair_union(y, z)},
                               {g.bit(x, y), g.bit(x, z), g.bit(y, z)}, counts);
  return checked(value, k_, clamp, a, b, c);
}

Eigen::MatrixXd IntersectionTensor::slice(std::size_t c) const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd out(n, n);
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (*this)(a, b, c);
  return out;
}

IntersectionTensor build_tensor_anchored(const GramMatrix& m, std::size_t r, std::size_t k,
                                         std::span<const std::size_t> anchors, const TensorOptions& options) {
  const std::size_t n = anchors.size();
  if (n == 0) throw ParameterError("tensor needs at least one row");
  for (std::size_t i = 0; i < n; ++i) {
    if (anchors[i] >= m.m()) throw DimensionError("anchor index out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (anchors[i] == anchors[j]) throw ParameterError("anchors must be distinct");
  }

  const MuTable table = mu_table(r, k);
  const ByteMatrix pairs = union_sizes(m, table, anchors, anchors, options.exec, options.inversion);
  const TripleResolver resolver(table, m.m(), options.inversion);
  const std::vector<std::uint32_t> singles = single_zero_counts(m, anchors);
  std::vector<std::uint32_t> pair_counts(n * n);
  kernels::pair_zero_counts(m, anchors, anchors, pair_counts, options.exec);
  const int two_k = 2 * static_cast<int>(k);

  std::vector<std::uint8_t> entries(n * n * n);
  auto store = [&](std::size_t p, std::size_t q, std::size_t s, std::uint8_t v) {
    for (auto [i, j, l] : {std::tuple{p, q, s}, std::tuple{p, s, q}, std::tuple{q, p, s}, std::tuple{q, s, p},
                           std::tuple{s, p, q}, std::tuple{s, q, p}})
      entries[(i * n + j) * n + l] = v;
  };

  // Value for sorted positions p <= q <= s given the triple zero count.
  auto entry = [&](std::size_t p, std::size_t q, std::size_t s, std::uint32_t triple_count) -> int {
    if (p == s) return static_cast<int>(k);
    if (p == q) return two_k - pairs(p, s);
    if (q == s) return two_k - pairs(p, q);
    const TripleCounts counts{{singles[p], singles[q], singles[s]},
                              {pair_counts[p * n + q], pair_counts[p * n + s], pair_counts[q * n + s]},
                              triple_count};
    return resolver({pairs(p, q), pairs(p, s), pairs(q, s)},
                    {m.bit(anchors[p], anchors[q]), m.bit(anchors[p], anchors[s]), m.bit(anchors[q], anchors[s])},
                    counts);
  };

  using Triple = std::tuple<std::size_t, std::size_t, std::size_t>;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  Triple first_bad{kNone, kNone, kNone};
  long first_bad_value = 0;

  auto handle = [&](std::size_t p, std::size_t q, std::size_t s, int value, Triple& bad, long& bad_value) {
    if (value < 0 || value > static_cast<int>(k)) {
      if (!options.clamp) {
        if (Triple{p, q, s} < bad) {
          bad = {p, q, s};
          bad_value = value;
        }
        return;
      }
      value = std::clamp(value, 0, static_cast<int>(k));
    }
    store(p, q, s, static_cast<std::uint8_t>(value));
  };

  if (options.exec == Exec::serial) {
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p; q < n; ++q)
        for (std::size_t s = q; s < n; ++s) {
          const std::size_t rows3[3] = {anchors[p], anchors[q], anchors[s]};
          const auto count = static_cast<std::uint32_t>(kernels::zero_count(m, rows3));
          handle(p, q, s, entry(p, q, s, count), first_bad, first_bad_value);
        }
  } else {
#pragma omp parallel
    {
      kernels::SliceWorkspace ws;
      std::vector<std::uint32_t> slice(n * n);
      Triple bad{kNone, kNone, kNone};
      long bad_value = 0;
#pragma omp for schedule(dynamic, 1)
      for (std::size_t p = 0; p < n; ++p) {
        kernels::zero_slice(m, anchors[p], anchors, p, slice, ws);
        for (std::size_t q = p; q < n; ++q)
          for (std::size_t s = q; s < n; ++s) handle(p, q, s, entry(p, q, s, slice[q * n + s]), bad, bad_value);
      }
#pragma omp critical
      if (bad < first_bad) {
        first_bad = bad;
        first_bad_value = bad_value;
      }
    }
  }

  if (std::get<0>(first_bad) != kNone) {
    const auto [p, q, s] = first_bad;
    throw InconsistencyError(anchors[p], anchors[q], anchors[s], first_bad_value);
  }
  return IntersectionTensor(n, k, std::move(entries), std::vector<std::size_t>(anchors.begin(), anchors.end()));
}

IntersectionTensor build_tensor(const GramMatrix& m, std::size_t r, std::size_t k, const TensorOptions& options) {
  std::vector<std::size_t> all(m.m());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return build_tensor_anchored(m, r, k, all, options);
}

IntersectionTensor oracle_tensor(const SelectionMatrix& w) {
  const std::size_t n = w.m();
  std::vector<std::uint8_t> entries(n * n * n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        entries[(a * n + b) * n + c] =
            static_cast<std::uint8_t>(bits::popcount_and3(w.mask(a), w.mask(b), w.mask(c)));
  return IntersectionTensor(n, w.k(), std::move(entries), {});
}

IntersectionTensor tensor_from_columns(const std::vector<std::vector<std::uint8_t>>& columns) {
  if (columns.empty()) throw ParameterError("need at least one column");
  const std::size_t n = columns.front().size();
  std::vector<unsigned> sums(n * n * n, 0);
  for (const auto& col : columns) {
    if (col.size() != n) throw DimensionError("columns must have equal length");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) sums[(a * n + b) * n + c] += unsigned{col[a]} * col[b] * col[c];
  }
  std::vector<std::uint8_t> entries(sums.size());
  unsigned largest = 0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (sums[i] > 255) throw ParameterError("tensor entry exceeds 255");
    entries[i] = static_cast<std::uint8_t>(sums[i]);
    largest = std::max(largest, sums[i]);
  }
  return IntersectionTensor(n, largest, std::move(entries), {});
}

Eigen::MatrixXd contract(const IntersectionTensor& t, const Eigen::VectorXd& v) {
  const std::size_t n = t.dim();
  if (static_cast<std::size_t>(v.size()) != n) throw DimensionError("contraction vector has wrong length");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ni, ni);
  // Lazy entries may throw, which must not cross an OpenMP region.
#pragma omp parallel for schedule(static) if (t.materialized())
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += v(static_cast<Eigen::Index>(c)) * t(a, b, c);
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
      out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = acc;
    }
  return out;
}

}  // namespace ssbmf
