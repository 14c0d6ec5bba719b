#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssbmf/instance.hpp"
#include "ssbmf/mu.hpp"
#include "ssbmf/tensor.hpp"

namespace ssbmf {

struct JennrichOptions {
  /// Singular values below cutoff * sigma_max count as zero.
  double rank_cutoff = 1e-8;
  /// Minimum separation between eigenvalues, relative to the largest.
  double gap_tolerance = 1e-6;
  /// Fresh contraction vectors drawn after the first attempt before giving up.
  int max_retries = 5;
};

struct Decomposition {
  std::vector<Eigen::VectorXd> components;
  /// Eigenvalues of the reduced pencil, one per component.
  std::vector<double> eigenvalues;
  Eigen::VectorXd v1, v2;
  int retries = 0;
  double eigen_gap = 0.0;
};

/// Simultaneous diagonalization of two random contractions.
///
/// With U an orthonormal basis of the column space of T(I,I,v1), the reduced
/// matrices A_i = U^T T(I,I,v_i) U satisfy A1 pinv(A2) = B D B^{-1}, where the
/// columns of U B are the components. Throws RankDeficiencyError when the
/// contraction has numerical rank below r and DegeneracyError when the
/// eigenvalues stay too close (or complex) after every retry.
Decomposition jennrich_decompose(const IntersectionTensor& t, std::size_t r, std::uint64_t seed,
                                 const JennrichOptions& options = {});

/// Scales by the signed entry of largest magnitude, then snaps to {0,1}.
/// Throws RoundingError if any scaled entry is farther than tol from both.
std::vector<std::uint8_t> round_boolean(const Eigen::VectorXd& v, double tol = 0.25,
                                        double* max_deviation = nullptr);

/// Reads every non-anchor row off the recovered anchor block.
///
/// For row a the intersections c_b = 2k - |S_a ∪ S_b| against each anchor b
/// come from mu-inversion; a least-squares solve of block * x = c, rounded to
/// {0,1}, must have k ones and reproduce c exactly.
SelectionMatrix extend_from_anchors(const Eigen::MatrixXd& anchor_block, std::span<const std::size_t> anchors,
                                    const GramMatrix& m, const MuTable& table, std::size_t k,
                                    Exec exec = Exec::parallel, InversionPolicy policy = {});

enum class TensorMode { full, anchored };

struct RecoveryConfig {
  TensorMode mode = TensorMode::full;
  /// Anchor count for anchored mode; 0 selects min(m, max(4r, r + 16)).
  std::size_t anchors = 0;
  std::uint64_t seed = 0;
  double round_tol = 0.25;
  JennrichOptions jennrich;
  TensorOptions tensor;
};

std::size_t default_anchor_count(std::size_t m, std::size_t r);

struct RecoveredFactors {
  bool success = false;
  std::optional<SelectionMatrix> w_hat;
  /// Boolean factorization error of w_hat against M, when w_hat exists.
  std::optional<std::size_t> residual;
  int retries = 0;
  double eigen_gap = 0.0;
  double max_rounding_deviation = 0.0;
  std::vector<std::size_t> anchors;
  /// Empty on success.
  std::string failure;
  double seconds = 0.0;
};

/// Full pipeline: tensor, decomposition, rounding, optional extension from
/// anchors, then mandatory verification gram(W_hat) == M. Algorithmic
/// failures are reported through `failure`; ParameterError and
/// DimensionError propagate.
RecoveredFactors tensor_recover(const GramMatrix& m, std::size_t r, std::size_t k, const RecoveryConfig& config = {});

struct ColumnMatch {
  bool matched = false;
  /// permutation[j] = reference column equal to column j of the candidate.
  std::vector<std::size_t> permutation;
  std::vector<std::size_t> unmatched_candidate, unmatched_reference;
};

using PackedColumns = std::vector<std::vector<bits::Word>>;

ColumnMatch match_columns(const PackedColumns& candidate, const PackedColumns& reference);
ColumnMatch match_columns(const SelectionMatrix& candidate, const SelectionMatrix& reference);

}  // namespace ssbmf
