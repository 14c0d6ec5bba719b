#include "ssbmf/jennrich.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "ssbmf/error.hpp"
#include "ssbmf/rng.hpp"

namespace ssbmf {

namespace {

constexpr std::uint64_t kContractionStream = 0x6a656e6e72696368ULL;
constexpr std::uint64_t kAnchorStream = 0x616e63686f727321ULL;

Eigen::VectorXd random_unit_vector(Rng& rng, std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v / v.norm();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double cutoff) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double limit = s.size() > 0 ? cutoff * s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > limit) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Real representative of a complex eigenvector: rotate so the largest entry is real.
Eigen::VectorXd real_eigenvector(const Eigen::VectorXcd& v) {
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  const std::complex<double> phase = std::conj(v(largest)) / std::abs(v(largest));
  return (v * phase).real();
}

std::vector<std::size_t> choose_anchors(std::size_t m, std::size_t count, std::uint64_t seed) {
  if (count >= m) {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  Rng rng(seed, kAnchorStream);
  auto picked = sample_k_subset(rng, m, count);
  return {picked.begin(), picked.end()};
}

}  // namespace

Decomposition jennrich_decompose(const IntersectionTensor& t, std::size_t r, std::uint64_t seed,
                                 const JennrichOptions& options) {
  const std::size_t n = t.dim();
  if (r == 0 || r > n) throw ParameterError("need 1 <= r <= tensor dimension");
  const auto rr = static_cast<Eigen::Index>(r);
  Rng rng(seed, kContractionStream);

  std::string last_problem;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    Decomposition out;
    out.retries = attempt;
    out.v1 = random_unit_vector(rng, n);
    out.v2 = random_unit_vector(rng, n);
    const Eigen::MatrixXd m1 = contract(t, out.v1);
    const Eigen::MatrixXd m2 = contract(t, out.v2);

    // Contractions are symmetric, so |eigenvalues| are the singular values.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(m1);
    const Eigen::VectorXd& lambda = sym.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(lambda.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
    const double sigma_max = std::abs(lambda(order.front()));
    const auto numerical_rank = static_cast<std::size_t>(std::count_if(
        order.begin(), order.end(), [&](Eigen::Index i) { return std::abs(lambda(i)) > options.rank_cutoff * sigma_max; }));
    if (sigma_max == 0.0 || numerical_rank < r)
      throw RankDeficiencyError("contraction has numerical rank " + std::to_string(numerical_rank) + " < r = " +
                                std::to_string(r));

    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), rr);
    for (Eigen::Index j = 0; j < rr; ++j) basis.col(j) = sym.eigenvectors().col(order[static_cast<std::size_t>(j)]);

    const Eigen::MatrixXd a1 = basis.transpose() * m1 * basis;
    const Eigen::MatrixXd a2 = basis.transpose() * m2 * basis;
    Eigen::EigenSolver<Eigen::MatrixXd> eig(a1 * pseudo_inverse(a2, options.rank_cutoff));
    if (eig.info() != Eigen::Success) {
      last_problem = "eigen solver did not converge";
      continue;
    }
    const Eigen::VectorXcd& mu = eig.eigenvalues();
    const double scale = mu.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      last_problem = "vanishing eigenvalues";
      continue;
    }
    double worst_imag = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      worst_imag = std::max(worst_imag, std::abs(mu(i).imag()));
      for (Eigen::Index j = i + 1; j < mu.size(); ++j) gap = std::min(gap, std::abs(mu(i) - mu(j)));
    }
    gap /= scale;
    if (worst_imag > options.gap_tolerance * scale) {
      last_problem = "complex eigenvalues";
      continue;
    }
    if (r > 1 && gap < options.gap_tolerance) {
      last_problem = "eigenvalue gap " + std::to_string(gap) + " below tolerance";
      continue;
    }
    out.eigen_gap = r > 1 ? gap : 1.0;
    for (Eigen::Index i = 0; i < rr; ++i) {
      out.components.push_back(basis * real_eigenvector(eig.eigenvectors().col(i)));
      out.eigenvalues.push_back(mu(i).real());
    }
    return out;
  }
  throw DegeneracyError(last_problem + " after " + std::to_string(options.max_retries) + " retries");
}

std::vector<std::uint8_t> round_boolean(const Eigen::VectorXd& v, double tol, double* max_deviation) {
  if (v.size() == 0) throw ParameterError("cannot round an empty vector");
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  const double pivot = v(largest);
  if (pivot == 0.0 || !std::isfinite(pivot)) throw ParameterError("cannot round the zero vector");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(v.size()));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i) / pivot;
    const double to_zero = std::abs(x), to_one = std::abs(x - 1.0);
    const double dev = std::min(to_zero, to_one);
    if (!(dev <= tol)) throw RoundingError(static_cast<std::size_t>(i), dev);
    out[static_cast<std::size_t>(i)] = to_one < to_zero ? 1 : 0;
    worst = std::max(worst, dev);
  }
  if (max_deviation) *max_deviation = worst;
  return out;
}

SelectionMatrix extend_from_anchors(const Eigen::MatrixXd& block, std::span<const std::size_t> anchors,
                                    const GramMatrix& m, const MuTable& table, std::size_t k, Exec exec,
                                    InversionPolicy policy) {
  const std::size_t n0 = anchors.size();
  const auto r = static_cast<std::size_t>(block.cols());
  if (static_cast<std::size_t>(block.rows()) != n0) throw DimensionError("anchor block must have one row per anchor");
  if (n0 < r) throw RankDeficiencyError("fewer anchors than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
  qr.setThreshold(1e-9);
  if (static_cast<std::size_t>(qr.rank()) < r)
    throw RankDeficiencyError("anchor block has rank " + std::to_string(qr.rank()) + " < r = " + std::to_string(r));

  std::vector<std::vector<std::uint32_t>> rows(m.m());
  std::vector<bool> is_anchor(m.m(), false);
  for (std::size_t p = 0; p < n0; ++p) {
    is_anchor[anchors[p]] = true;
    for (std::size_t j = 0; j < r; ++j)
      if (block(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) > 0.5)
        rows[anchors[p]].push_back(static_cast<std::uint32_t>(j));
    if (rows[anchors[p]].size() != k)
      throw ExtensionError(anchors[p], "anchor row has " + std::to_string(rows[anchors[p]].size()) + " ones");
  }

  std::vector<std::size_t> others;
  for (std::size_t a = 0; a < m.m(); ++a)
    if (!is_anchor[a]) others.push_back(a);
  const ByteMatrix unions = union_sizes(m, table, others, anchors, exec, policy);

  const int two_k = 2 * static_cast<int>(k);
  std::vector<std::string> problems(others.size());
#pragma omp parallel for schedule(dynamic, 32) if (exec == Exec::parallel)
  for (std::size_t i = 0; i < others.size(); ++i) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(n0));
    for (std::size_t p = 0; p < n0; ++p) c(static_cast<Eigen::Index>(p)) = two_k - unions(i, p);
    const Eigen::VectorXd x = qr.solve(c);
    std::vector<std::uint32_t> support;
    for (std::size_t j = 0; j < r; ++j)
      if (x(static_cast<Eigen::Index>(j)) >= 0.5) support.push_back(static_cast<std::uint32_t>(j));
    if (support.size() != k) {
      problems[i] = "rounded row has " + std::to_string(support.size()) + " ones";
      continue;
    }
    for (std::size_t p = 0; p < n0 && problems[i].empty(); ++p) {
      double hit = 0.0;
      for (auto j : support) hit += block(static_cast<Eigen::Index>(p), j);
      if (hit != c(static_cast<Eigen::Index>(p)))
        problems[i] = "intersection with anchor " + std::to_string(anchors[p]) + " not reproduced";
    }
    rows[others[i]] = std::move(support);
  }
  for (std::size_t i = 0; i < others.size(); ++i)
    if (!problems[i].empty()) throw ExtensionError(others[i], problems[i]);
  return SelectionMatrix(r, k, std::move(rows));
}

std::size_t default_anchor_count(std::size_t m, std::size_t r) { return std::min(m, std::max(4 * r, r + 16)); }

RecoveredFactors tensor_recover(const GramMatrix& m, std::size_t r, std::size_t k, const RecoveryConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (r == 0 || k == 0 || k > r) throw ParameterError("need 1 <= k <= r");
  if (m.m() < r) throw ParameterError("need at least r rows");

  RecoveredFactors out;
  const std::size_t n0 = config.mode == TensorMode::full
                             ? m.m()
                             : std::min(m.m(), config.anchors ? config.anchors : default_anchor_count(m.m(), r));
  if (n0 < r) throw ParameterError("anchor count must be at least r");
  out.anchors = choose_anchors(m.m(), n0, config.seed);

  try {
    const MuTable table = mu_table(r, k);
    const IntersectionTensor t = build_tensor_anchored(m, r, k, out.anchors, config.tensor);
    const Decomposition dec = jennrich_decompose(t, r, config.seed, config.jennrich);
    out.retries = dec.retries;
    out.eigen_gap = dec.eigen_gap;

    Eigen::MatrixXd block(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j) {
      double dev = 0.0;
      const auto col = round_boolean(dec.components[j], config.round_tol, &dev);
      out.max_rounding_deviation = std::max(out.max_rounding_deviation, dev);
      for (std::size_t p = 0; p < n0; ++p) block(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = col[p];
    }

    if (n0 == m.m()) {
      std::vector<std::vector<std::uint32_t>> rows(n0);
      for (std::size_t p = 0; p < n0; ++p) {
        for (std::size_t j = 0; j < r; ++j)
          if (block(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) > 0.5)
            rows[out.anchors[p]].push_back(static_cast<std::uint32_t>(j));
        if (rows[out.anchors[p]].size() != k)
          throw ExtensionError(out.anchors[p], "recovered row has " + std::to_string(rows[out.anchors[p]].size()) +
                                                   " ones, expected " + std::to_string(k));
      }
      out.w_hat.emplace(r, k, std::move(rows));
    } else {
      out.w_hat.emplace(extend_from_anchors(block, out.anchors, m, table, k, config.tensor.exec,
                                                  config.tensor.inversion));
    }

    out.residual = factorization_error(m, *out.w_hat, Arithmetic::boolean);
    out.success = *out.residual == 0;
    if (!out.success) out.failure = "verification failed: residual " + std::to_string(*out.residual);
  } catch (const ParameterError&) {
    throw;
  } catch (const DimensionError&) {
    throw;
  } catch (const Error& e) {
    out.success = false;
    out.failure = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ColumnMatch match_columns(const PackedColumns& candidate, const PackedColumns& reference) {
  if (candidate.size() != reference.size()) throw DimensionError("column counts differ");
  ColumnMatch out;
  std::vector<bool> used(reference.size(), false);
  for (std::size_t j = 0; j < candidate.size(); ++j) {
    std::size_t hit = reference.size();
    for (std::size_t i = 0; i < reference.size() && hit == reference.size(); ++i)
      if (!used[i] && reference[i] == candidate[j]) hit = i;
    if (hit == reference.size()) {
      out.unmatched_candidate.push_back(j);
      continue;
    }
    used[hit] = true;
    out.permutation.push_back(hit);
  }
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (!used[i]) out.unmatched_reference.push_back(i);
  out.matched = out.unmatched_candidate.empty();
  if (!out.matched) out.permutation.clear();
  return out;
}

ColumnMatch match_columns(const SelectionMatrix& candidate, const SelectionMatrix& reference) {
  if (candidate.m() != reference.m() || candidate.r() != reference.r()) throw DimensionError("shapes differ");
  PackedColumns a, b;
  for (std::size_t j = 0; j < candidate.r(); ++j) {
    a.push_back(candidate.column(j));
    b.push_back(reference.column(j));
  }
  return match_columns(a, b);
}

}  // namespace ssbmf
