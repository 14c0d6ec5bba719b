#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssbmf/instance.hpp"
#include "ssbmf/jennrich.hpp"

namespace ssbmf::recover {

/// r x d matrix of private vectors, one per row.
struct Dataset {
  Eigen::MatrixXd x;
};

/// Observed mixtures. Row i of z is |sum_{j in S_i} x_j| entrywise. The
/// generating W and the signed sums are kept for the simulator and tests;
/// the attack path never reads them.
struct SyntheticDataset {
  Eigen::MatrixXd z;
  std::optional<SelectionMatrix> w;
  std::optional<Eigen::MatrixXd> y;
};

struct HeavyRecoveryConfig {
  double eta = 0.25;
  double c_heavy = 6.0;
};

struct InstaHideInstance {
  SyntheticDataset data;
  GramMatrix gram;
};

/// W drawn as in gen_selection_matrix with r = rows of X; the Gram matrix is
/// the Boolean similarity oracle. Requires 2 <= k <= r.
InstaHideInstance gen_instahide(const Dataset& x, std::size_t m, std::size_t k, std::uint64_t seed);

/// E over uniform k-subsets S of <e_S, p>^2.
double expected_square_inner(const Eigen::VectorXd& p, std::size_t r, std::size_t k);

/// Magnitude estimates p_hat from one observed column z with |W p| = z.
///
/// p' = (1/m) sum_i (w_i - (k-1)/(r-2) 1) z_i^2 is rescaled by
/// r(r-1) / (k(r-2k+1)) into an estimate of p_i^2, clamped at 0 and square
/// rooted. Needs r >= 2k and r >= 3.
Eigen::VectorXd get_heavy_coordinates(const SelectionMatrix& w, const Eigen::VectorXd& z,
                                      const HeavyRecoveryConfig& config = {});

/// The rescaled estimate q_hat of p^2 before the square root.
Eigen::VectorXd squared_estimate(const SelectionMatrix& w, const Eigen::VectorXd& z);

/// Entries with p_hat_i >= c_heavy (k/r) sum_j p_hat_j, per column.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> heavy_mask(const Eigen::MatrixXd& magnitudes, std::size_t k,
                                                              double c_heavy);

struct DatasetRecovery {
  bool success = false;
  std::string failure;
  RecoveredFactors factors;
  /// Magnitudes |X|, rows in the column order of factors.w_hat. Empty on failure.
  Eigen::MatrixXd estimate;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> heavy;
};

/// Recovers W_hat from M, then runs the heavy-coordinate estimator on every
/// column of z (in parallel over columns).
DatasetRecovery recover_dataset(const GramMatrix& m, const Eigen::MatrixXd& z, std::size_t r, std::size_t k,
                                const HeavyRecoveryConfig& config = {}, const RecoveryConfig& recovery = {});

/// Heavy-coordinate estimation with a known W (the estimator on its own).
DatasetRecovery recover_with_factors(const SelectionMatrix& w, const Eigen::MatrixXd& z,
                                     const HeavyRecoveryConfig& config = {});

struct EntryComparison {
  double estimate = 0.0;
  double truth = 0.0;
  double relative_error = 0.0;
  /// |x| >= c (k/r) sum |x| over the column.
  bool heavy_abs = false;
  /// |x| >= c (k/r) |sum x| over the column.
  bool heavy_signed = false;
};

struct RecoveryEvaluation {
  /// row-major r x d, rows in the order of the true X.
  std::vector<EntryComparison> entries;
  std::size_t rows = 0, cols = 0;
  std::size_t heavy_total = 0, heavy_within_eta = 0;
};

/// Aligns estimate rows to X through the column matching of W_hat and W.
RecoveryEvaluation evaluate_recovery(const DatasetRecovery& result, const Dataset& truth,
                                     const SelectionMatrix& w_true, const HeavyRecoveryConfig& config = {});

struct ExactSolve {
  Dataset x;
  /// Frobenius norm of W X - Y.
  double residual = 0.0;
};

/// Least-squares solve of W X = Y. Throws RankDeficiencyError unless W has
/// full column rank.
ExactSolve solve_exact(const SelectionMatrix& w, const Eigen::MatrixXd& y);

}  // namespace ssbmf::recover
