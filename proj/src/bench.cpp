#include "ssbmf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <omp.h>

#include "ssbmf/instance.hpp"
#include "ssbmf/io.hpp"
#include "ssbmf/kernels.hpp"
#include "ssbmf/tensor.hpp"

namespace ssbmf::bench {

namespace {

template <typename F>
auto best_of(int repeats, F&& f, double& seconds) {
  seconds = std::numeric_limits<double>::infinity();
  decltype(f()) result{};
  for (int i = 0; i < std::max(repeats, 1); ++i) {
    const auto start = std::chrono::steady_clock::now();
    result = f();
    seconds = std::min(seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return result;
}

template <typename F>
Timing compare(const std::string& kernel, const std::string& size, int repeats, F&& f) {
  Timing t{kernel, size};
  t.threads = omp_get_max_threads();
  const auto serial = best_of(repeats, [&] { return f(Exec::serial); }, t.serial_seconds);
  const auto parallel = best_of(repeats, [&] { return f(Exec::parallel); }, t.parallel_seconds);
  t.agree = serial == parallel;
  return t;
}

}  // namespace

std::vector<Timing> run_kernels(const BenchConfig& c) {
  const SelectionMatrix w = gen_selection_matrix(c.m, c.r, c.k, c.seed);
  const GramMatrix g = gram(w, Arithmetic::boolean);
  const std::string dims = "m=" + std::to_string(c.m) + " r=" + std::to_string(c.r) + " k=" + std::to_string(c.k);
  std::vector<Timing> out;

  out.push_back(compare("gram_bits", dims, c.repeats, [&](Exec e) { return kernels::gram_bits(w, e); }));
  out.push_back(compare("gram_counts", dims, c.repeats, [&](Exec e) { return kernels::gram_counts(w, e); }));

  std::vector<std::size_t> all(c.m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::size_t n0 = std::min(c.anchors, c.m);
  const std::span<const std::size_t> anchors(all.data(), n0);
  out.push_back(compare("pair_zero_counts", dims + " rows=" + std::to_string(c.m) + " cols=" + std::to_string(n0),
                        c.repeats, [&](Exec e) {
                          std::vector<std::uint32_t> counts(c.m * n0);
                          kernels::pair_zero_counts(g, all, anchors, counts, e);
                          return counts;
                        }));
  out.push_back(compare("tensor_anchored", dims + " anchors=" + std::to_string(n0), c.repeats, [&](Exec e) {
    TensorOptions options;
    options.exec = e;
    options.clamp = true;
    const IntersectionTensor t = build_tensor_anchored(g, c.r, c.k, anchors, options);
    std::vector<int> entries;
    entries.reserve(n0 * n0 * n0);
    for (std::size_t a = 0; a < n0; ++a)
      for (std::size_t b = 0; b < n0; ++b)
        for (std::size_t d = 0; d < n0; ++d) entries.push_back(t(a, b, d));
    return entries;
  }));
  return out;
}

std::string timings_csv(const std::vector<Timing>& timings) {
  std::string out = "kernel,size,threads,serial_seconds,parallel_seconds,speedup,agree\n";
  for (const auto& t : timings) {
    out += t.kernel + ",\"" + t.size + "\"," + std::to_string(t.threads) + "," + io::format_double(t.serial_seconds) +
           "," + io::format_double(t.parallel_seconds) + "," +
           io::format_double(t.parallel_seconds > 0 ? t.serial_seconds / t.parallel_seconds : 0.0) + "," +
           (t.agree ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace ssbmf::bench
