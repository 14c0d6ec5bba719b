#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ssbmf::bench {

struct Timing {
  std::string kernel;
  std::string size;
  double serial_seconds = 0.0;
  double parallel_seconds = 0.0;
  /// Outputs of the two variants were identical.
  bool agree = false;
  int threads = 1;
};

struct BenchConfig {
  std::size_t m = 2000;
  std::size_t r = 16;
  std::size_t k = 3;
  /// Anchor count for the tensor kernel.
  std::size_t anchors = 128;
  int repeats = 3;
  std::uint64_t seed = 1;
};

/// Times serial reference against OpenMP variant for the Gram, pair zero
/// count and anchored tensor kernels; each figure is the best of `repeats`.
std::vector<Timing> run_kernels(const BenchConfig& config);

std::string timings_csv(const std::vector<Timing>& timings);

}  // namespace ssbmf::bench
