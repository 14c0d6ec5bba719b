// Serial reference kernels against their OpenMP variants.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ssbmf/bench.hpp"

int main(int argc, char** argv) {
  ssbmf::bench::BenchConfig config;
  CLI::App app{"Time serial and OpenMP kernels"};
  app.add_option("--m", config.m, "rows of W");
  app.add_option("--r", config.r, "columns of W");
  app.add_option("--k", config.k, "ones per row");
  app.add_option("--anchors", config.anchors, "anchor rows for the tensor kernel");
  app.add_option("--repeats", config.repeats, "runs per variant, best kept");
  app.add_option("--seed", config.seed, "instance seed");
  CLI11_PARSE(app, argc, argv);

  const auto timings = ssbmf::bench::run_kernels(config);
  std::cout << ssbmf::bench::timings_csv(timings);
  for (const auto& t : timings)
    if (!t.agree) {
      std::fprintf(stderr, "%s: serial and parallel outputs differ\n", t.kernel.c_str());
      return 1;
    }
  return 0;
}
