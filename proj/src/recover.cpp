#include "ssbmf/recover.hpp"

#include <cmath>
#include <limits>

#include "ssbmf/error.hpp"

namespace ssbmf::recover {

InstaHideInstance gen_instahide(const Dataset& x, std::size_t m, std::size_t k, std::uint64_t seed) {
  const auto r = static_cast<std::size_t>(x.x.rows());
  if (k < 2 || k > r) throw ParameterError("need 2 <= k <= r");
  if (m == 0) throw ParameterError("need m >= 1");
  if (!x.x.allFinite()) throw ParameterError("dataset has non-finite entries");
  SelectionMatrix w = gen_selection_matrix(m, r, k, seed);
  Eigen::MatrixXd y = w.to_dense() * x.x;
  Eigen::MatrixXd z = y.cwiseAbs();
  GramMatrix g = gram(w, Arithmetic::boolean);
  return {SyntheticDataset{std::move(z), std::move(w), std::move(y)}, std::move(g)};
}

double expected_square_inner(const Eigen::VectorXd& p, std::size_t r, std::size_t k) {
  if (r < 2) throw ParameterError("need r >= 2");
  if (k > r) throw ParameterError("need k <= r");
  if (static_cast<std::size_t>(p.size()) != r) throw DimensionError("p must have r entries");
  const double rr = static_cast<double>(r), kk = static_cast<double>(k);
  const double sum = p.sum();
  return kk * (rr - kk) / (rr * (rr - 1)) * p.squaredNorm() + kk * (kk - 1) / (rr * (rr - 1)) * sum * sum;
}

Eigen::VectorXd squared_estimate(const SelectionMatrix& w, const Eigen::VectorXd& z) {
  const std::size_t m = w.m(), r = w.r(), k = w.k();
  if (r < 3 || r < 2 * k) throw ParameterError("estimator needs r >= 2k and r >= 3");
  if (static_cast<std::size_t>(z.size()) != m) throw DimensionError("z must have m entries");
  const double shift = static_cast<double>(k - 1) / static_cast<double>(r - 2);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r));
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sq = z(static_cast<Eigen::Index>(i)) * z(static_cast<Eigen::Index>(i));
    total += sq;
    for (auto j : w.support(i)) acc(j) += sq;
  }
  const double scale = static_cast<double>(r * (r - 1)) / static_cast<double>(k * (r - 2 * k + 1));
  return (acc.array() - shift * total) / static_cast<double>(m) * scale;
}

Eigen::VectorXd get_heavy_coordinates(const SelectionMatrix& w, const Eigen::VectorXd& z,
                                      const HeavyRecoveryConfig& config) {
  if (!(config.eta > 0.0) || !(config.c_heavy > 0.0)) throw ParameterError("eta and c_heavy must be positive");
  if ((z.array() < 0.0).any()) throw ParameterError("observations must be nonnegative");
  return squared_estimate(w, z).cwiseMax(0.0).cwiseSqrt();
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> heavy_mask(const Eigen::MatrixXd& magnitudes, std::size_t k,
                                                              double c_heavy) {
  const double ratio = c_heavy * static_cast<double>(k) / static_cast<double>(magnitudes.rows());
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(magnitudes.rows(), magnitudes.cols());
  for (Eigen::Index j = 0; j < magnitudes.cols(); ++j) {
    const double mass = magnitudes.col(j).sum();
    for (Eigen::Index i = 0; i < magnitudes.rows(); ++i) out(i, j) = mass > 0.0 && magnitudes(i, j) >= ratio * mass;
  }
  return out;
}

namespace {

Eigen::MatrixXd estimate_columns(const SelectionMatrix& w, const Eigen::MatrixXd& z,
                                 const HeavyRecoveryConfig& config) {
  if (static_cast<std::size_t>(z.rows()) != w.m()) throw DimensionError("z must have m rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(w.r()), z.cols());
  // Validate once outside the parallel loop; the per-column call cannot throw after that.
  if (z.cols() > 0) out.col(0) = get_heavy_coordinates(w, z.col(0), config);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 1; j < z.cols(); ++j) out.col(j) = get_heavy_coordinates(w, z.col(j), config);
  return out;
}

}  // namespace

DatasetRecovery recover_with_factors(const SelectionMatrix& w, const Eigen::MatrixXd& z,
                                     const HeavyRecoveryConfig& config) {
  if ((z.array() < 0.0).any()) throw ParameterError("observations must be nonnegative");
  DatasetRecovery out;
  out.factors.success = true;
  out.factors.w_hat = w;
  out.estimate = estimate_columns(w, z, config);
  out.heavy = heavy_mask(out.estimate, w.k(), config.c_heavy);
  out.success = true;
  return out;
}

DatasetRecovery recover_dataset(const GramMatrix& m, const Eigen::MatrixXd& z, std::size_t r, std::size_t k,
                                const HeavyRecoveryConfig& config, const RecoveryConfig& recovery) {
  if (static_cast<std::size_t>(z.rows()) != m.m()) throw DimensionError("z must have one row per Gram row");
  if (!(config.eta > 0.0) || !(config.c_heavy > 0.0)) throw ParameterError("eta and c_heavy must be positive");
  if (r < 3 || r < 2 * k) throw ParameterError("estimator needs r >= 2k and r >= 3");
  if ((z.array() < 0.0).any()) throw ParameterError("observations must be nonnegative");
  DatasetRecovery out;
  out.factors = tensor_recover(m, r, k, recovery);
  if (!out.factors.success) {
    out.failure = out.factors.failure;
    return out;
  }
  out.estimate = estimate_columns(*out.factors.w_hat, z, config);
  out.heavy = heavy_mask(out.estimate, k, config.c_heavy);
  out.success = true;
  return out;
}

RecoveryEvaluation evaluate_recovery(const DatasetRecovery& result, const Dataset& truth,
                                     const SelectionMatrix& w_true, const HeavyRecoveryConfig& config) {
  if (!result.success || !result.factors.w_hat) throw ParameterError("nothing to evaluate: recovery failed");
  const ColumnMatch match = match_columns(*result.factors.w_hat, w_true);
  if (!match.matched) throw Error("recovered factors are not a column permutation of the true ones");
  const Eigen::MatrixXd& x = truth.x;
  if (x.rows() != result.estimate.rows() || x.cols() != result.estimate.cols())
    throw DimensionError("truth and estimate shapes differ");

  RecoveryEvaluation ev;
  ev.rows = static_cast<std::size_t>(x.rows());
  ev.cols = static_cast<std::size_t>(x.cols());
  ev.entries.resize(ev.rows * ev.cols);
  const double ratio = config.c_heavy * static_cast<double>(w_true.k()) / static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double abs_mass = x.col(j).cwiseAbs().sum();
    const double signed_mass = std::abs(x.col(j).sum());
    for (std::size_t c = 0; c < ev.rows; ++c) {
      const auto i = static_cast<Eigen::Index>(match.permutation[c]);
      EntryComparison& e = ev.entries[static_cast<std::size_t>(i) * ev.cols + static_cast<std::size_t>(j)];
      e.estimate = result.estimate(static_cast<Eigen::Index>(c), j);
      e.truth = std::abs(x(i, j));
      e.relative_error = e.truth > 0.0 ? std::abs(e.estimate - e.truth) / e.truth
                                       : (e.estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      e.heavy_abs = e.truth > 0.0 && e.truth >= ratio * abs_mass;
      e.heavy_signed = e.truth > 0.0 && e.truth >= ratio * signed_mass;
      if (e.heavy_abs) {
        ++ev.heavy_total;
        if (e.relative_error <= config.eta) ++ev.heavy_within_eta;
      }
    }
  }
  return ev;
}

ExactSolve solve_exact(const SelectionMatrix& w, const Eigen::MatrixXd& y) {
  if (static_cast<std::size_t>(y.rows()) != w.m()) throw DimensionError("Y must have m rows");
  const Eigen::MatrixXd a = w.to_dense();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (static_cast<std::size_t>(qr.rank()) < w.r())
    throw RankDeficiencyError("W has rank " + std::to_string(qr.rank()) + " < r = " + std::to_string(w.r()));
  ExactSolve out;
  out.x.x = qr.solve(y);
  out.residual = (a * out.x.x - y).norm();
  return out;
}

}  // namespace ssbmf::recover
