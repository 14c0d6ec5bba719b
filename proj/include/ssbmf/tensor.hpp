#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssbmf/instance.hpp"
#include "ssbmf/kernels.hpp"
#include "ssbmf/mu.hpp"

namespace ssbmf {

struct TensorOptions {
  /// Clamp out-of-range inclusion-exclusion values into [0, k] instead of
  /// raising InconsistencyError.
  bool clamp = false;
  /// serial: per-entry zero counts straight from the definition.
  /// parallel: restricted-column slice products, OpenMP over anchors.
  Exec exec = Exec::parallel;
  /// Union-size inversion. When constrained, M(a,b) = 0 pins |S_a ∪ S_b|
  /// to 2k, M(a,b) = 1 limits it to k..2k-1, and a triple union is limited
  /// to values whose intersection respects the bounds implied by its pairs
  /// (at most each pair intersection, triple union at least each pair union
  /// and at most r). An empty range counts as an inconsistency.
  InversionPolicy inversion;
};

/// Third-order tensor T(a,b,c) = |S_a ∩ S_b ∩ S_c| = sum_i W_i ⊗ W_i ⊗ W_i.
///
/// Either materialized (n^3 bytes, indices refer to `rows()` of the Gram
/// matrix) or a lazy handle that evaluates entries from M on demand.
class IntersectionTensor {
 public:
  IntersectionTensor(std::size_t n, std::size_t k, std::vector<std::uint8_t> entries,
                     std::vector<std::size_t> rows);

  /// Entries computed on access from M. `pairwise` may hold the full
  /// pairwise union matrix; otherwise pair unions are estimated per query.
  static IntersectionTensor lazy(std::shared_ptr<const GramMatrix> m, std::size_t r, std::size_t k,
                                 std::optional<ByteMatrix> pairwise = std::nullopt, const TensorOptions& options = {});

  std::size_t dim() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  bool materialized() const noexcept { return lazy_ == nullptr; }
  /// Gram-matrix row behind each tensor index.
  std::span<const std::size_t> rows() const noexcept { return rows_; }

  int operator()(std::size_t a, std::size_t b, std::size_t c) const;
  /// T(:, :, c) as a dense matrix.
  Eigen::MatrixXd slice(std::size_t c) const;

 private:
  IntersectionTensor() = default;
  struct LazyState;
  std::size_t n_ = 0, k_ = 0;
  std::vector<std::uint8_t> entries_;
  std::vector<std::size_t> rows_;
  std::shared_ptr<const LazyState> lazy_;
};

/// Full tensor over all m rows of M.
IntersectionTensor build_tensor(const GramMatrix& m, std::size_t r, std::size_t k, const TensorOptions& options = {});

/// Tensor over the sub-block indexed by `anchors` (distinct rows of M). Zero
/// counts still range over every column of M.
IntersectionTensor build_tensor_anchored(const GramMatrix& m, std::size_t r, std::size_t k,
                                         std::span<const std::size_t> anchors, const TensorOptions& options = {});

/// Ground truth straight from the supports.
IntersectionTensor oracle_tensor(const SelectionMatrix& w);

/// sum_i c_i ⊗ c_i ⊗ c_i for small nonnegative integer column vectors.
IntersectionTensor tensor_from_columns(const std::vector<std::vector<std::uint8_t>>& columns);

/// T(I, I, v) = sum_c v_c T(:, :, c).
Eigen::MatrixXd contract(const IntersectionTensor& t, const Eigen::VectorXd& v);

}  // namespace ssbmf
