// ssbmf: command-line front end.
//
// Exit codes: 0 success, 2 bad parameters or usage, 3 recovery or
// verification failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ssbmf/bench.hpp"
#include "ssbmf/csp.hpp"
#include "ssbmf/error.hpp"
#include "ssbmf/io.hpp"
#include "ssbmf/jennrich.hpp"
#include "ssbmf/probes.hpp"
#include "ssbmf/recover.hpp"

namespace {

using ssbmf::io::json;

constexpr int kOk = 0;
constexpr int kParameter = 2;
constexpr int kFailure = 3;

struct Output {
  std::string out;
  std::string report = "pretty";
};

void add_output(CLI::App* cmd, Output& o) {
  cmd->add_option("--out", o.out, "write the result here (JSON)");
  cmd->add_option("--report", o.report, "stdout format")->check(CLI::IsMember({"json", "csv", "pretty"}));
}

std::string scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Flat objects print as key/value lines (pretty) or a header plus one row (csv).
void emit(const Output& o, const json& j) {
  if (!o.out.empty()) ssbmf::io::write_json(o.out, j);
  if (o.report == "json") {
    std::cout << j.dump(2) << "\n";
  } else if (o.report == "csv") {
    std::string head, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_structured()) continue;
      head += (head.empty() ? "" : ",") + it.key();
      row += (row.empty() ? "" : ",") + scalar(it.value());
    }
    std::cout << head << "\n" << row << "\n";
  } else {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!it.value().is_structured() || it.value().size() <= 16)
        std::cout << it.key() << ": " << scalar(it.value()) << "\n";
  }
}

ssbmf::TensorMode parse_mode(const std::string& s) {
  return s == "full" ? ssbmf::TensorMode::full : ssbmf::TensorMode::anchored;
}

ssbmf::Inversion parse_inversion(const std::string& s) {
  return s == "nearest" ? ssbmf::Inversion::nearest : ssbmf::Inversion::likelihood;
}

struct RecoveryFlags {
  std::size_t r = 0, k = 0, anchors = 0;
  std::string mode = "full", inversion = "likelihood";
  std::uint64_t seed = 0;
  double round_tol = 0.25;
  bool unconstrained = false, clamp = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--r", r, "columns of W")->required();
    cmd->add_option("--k", k, "ones per row")->required();
    cmd->add_option("--mode", mode, "tensor over all rows or an anchor subset")
        ->check(CLI::IsMember({"full", "anchored"}));
    cmd->add_option("--anchors", anchors, "anchor count (0: min(m, max(4r, r+16)))");
    cmd->add_option("--seed", seed, "seed for anchors and contraction vectors");
    cmd->add_option("--round-tol", round_tol, "rounding tolerance");
    cmd->add_option("--inversion", inversion, "union-size inversion rule")
        ->check(CLI::IsMember({"likelihood", "nearest"}));
    cmd->add_flag("--unconstrained", unconstrained, "ignore Gram entries when inverting union sizes");
    cmd->add_flag("--clamp", clamp, "clamp out-of-range tensor entries instead of failing");
  }

  ssbmf::RecoveryConfig config() const {
    ssbmf::RecoveryConfig c;
    c.mode = parse_mode(mode);
    c.anchors = anchors;
    c.seed = seed;
    c.round_tol = round_tol;
    c.tensor.clamp = clamp;
    c.tensor.inversion.method = parse_inversion(inversion);
    c.tensor.inversion.constrained = !unconstrained;
    return c;
  }
};

int run_gen(std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed, std::size_t d, const std::string& x_out,
            const std::string& z_out, const std::string& gram_out, const Output& o) {
  if (d == 0) {
    const auto w = ssbmf::gen_selection_matrix(m, r, k, seed);
    const json j = ssbmf::io::instance_to_json(w, seed);
    if (!o.out.empty()) ssbmf::io::write_json(o.out, j);
    std::cout << "generated W: m=" << m << " r=" << r << " k=" << k << " seed=" << seed << "\n";
    return kOk;
  }
  // Private rows X ~ N(0, 1), observed Z = |W X| and the similarity Gram.
  ssbmf::recover::Dataset x{Eigen::MatrixXd(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d))};
  ssbmf::Rng rng(seed, 0x78ULL);
  for (Eigen::Index i = 0; i < x.x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.x.cols(); ++j) x.x(i, j) = rng.normal();
  const auto inst = ssbmf::recover::gen_instahide(x, m, k, seed);
  if (!o.out.empty()) ssbmf::io::write_json(o.out, ssbmf::io::instance_to_json(*inst.data.w, seed));
  if (!x_out.empty()) ssbmf::io::write_file(x_out, ssbmf::io::matrix_csv(x.x));
  if (!z_out.empty()) ssbmf::io::write_file(z_out, ssbmf::io::matrix_csv(inst.data.z));
  if (!gram_out.empty()) ssbmf::io::write_json(gram_out, ssbmf::io::gram_to_json(inst.gram));
  std::cout << "generated W, X, Z: m=" << m << " r=" << r << " k=" << k << " d=" << d << " seed=" << seed << "\n";
  return kOk;
}

int run_gram(const std::string& in, const std::string& arith, const std::string& csv_out, const Output& o) {
  const auto w = ssbmf::io::instance_from_json(ssbmf::io::read_json(in));
  const auto g =
      ssbmf::gram(w, arith == "int" ? ssbmf::Arithmetic::integer : ssbmf::Arithmetic::boolean);
  if (!o.out.empty()) ssbmf::io::write_json(o.out, ssbmf::io::gram_to_json(g));
  if (!csv_out.empty()) {
    std::vector<std::vector<int>> dense(g.m(), std::vector<int>(g.m()));
    const auto a = g.has_counts() ? ssbmf::Arithmetic::integer : ssbmf::Arithmetic::boolean;
    for (std::size_t i = 0; i < g.m(); ++i)
      for (std::size_t j = 0; j < g.m(); ++j) dense[i][j] = g.entry(i, j, a);
    ssbmf::io::write_file(csv_out, ssbmf::io::matrix_csv(dense));
  }
  std::cout << "gram: m=" << g.m() << " arithmetic=" << arith << "\n";
  return kOk;
}

int run_attack(const std::string& gram_path, const RecoveryFlags& f, const std::string& truth,
               const std::string& w_out, bool timings, const Output& o) {
  const auto g = ssbmf::io::gram_from_json(ssbmf::io::read_json(gram_path));
  const auto result = ssbmf::tensor_recover(g, f.r, f.k, f.config());
  std::optional<ssbmf::ColumnMatch> match;
  if (!truth.empty() && result.w_hat)
    match = ssbmf::match_columns(*result.w_hat, ssbmf::io::instance_from_json(ssbmf::io::read_json(truth)));
  if (!w_out.empty() && result.w_hat)
    ssbmf::io::write_json(w_out, ssbmf::io::instance_to_json(*result.w_hat));
  emit(o, ssbmf::io::recovery_report(result, match, timings));
  if (timings) std::fprintf(stderr, "attack took %.3f s\n", result.seconds);
  const bool ok = result.success && (!match || match->matched);
  return ok ? kOk : kFailure;
}

int run_recover(const std::string& gram_path, const std::string& synthetic, const RecoveryFlags& f, double eta,
                double c_heavy, const std::string& x_out, const std::string& truth_x, const std::string& truth_w,
                const Output& o) {
  const auto g = ssbmf::io::gram_from_json(ssbmf::io::read_json(gram_path));
  const Eigen::MatrixXd z = ssbmf::io::read_matrix_csv(synthetic);
  const ssbmf::recover::HeavyRecoveryConfig cfg{eta, c_heavy};
  const auto result = ssbmf::recover::recover_dataset(g, z, f.r, f.k, cfg, f.config());
  json j;
  j["success"] = result.success;
  j["recovery"] = ssbmf::io::recovery_report(result.factors);
  if (!result.success) {
    j["failure"] = result.failure;
    emit(o, j);
    return kFailure;
  }
  if (!x_out.empty()) ssbmf::io::write_file(x_out, ssbmf::io::matrix_csv(result.estimate));
  const Eigen::Index rows = result.estimate.rows(), cols = result.estimate.cols();
  std::size_t heavy = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) heavy += result.heavy(i, c);
  j["rows"] = rows;
  j["cols"] = cols;
  j["heavy_entries"] = heavy;
  if (!truth_x.empty() && !truth_w.empty()) {
    const ssbmf::recover::Dataset x{ssbmf::io::read_matrix_csv(truth_x)};
    const auto w = ssbmf::io::instance_from_json(ssbmf::io::read_json(truth_w));
    const auto ev = ssbmf::recover::evaluate_recovery(result, x, w, cfg);
    json entries = json::array();
    for (std::size_t i = 0; i < ev.rows; ++i)
      for (std::size_t c = 0; c < ev.cols; ++c) {
        const auto& e = ev.entries[i * ev.cols + c];
        entries.push_back({{"row", i},
                           {"col", c},
                           {"estimate", e.estimate},
                           {"heavy_flag", e.heavy_abs},
                           {"heavy_signed_flag", e.heavy_signed},
                           {"relative_error", e.relative_error}});
      }
    j["entries"] = std::move(entries);
    j["heavy_truth"] = ev.heavy_total;
    j["heavy_within_eta"] = ev.heavy_within_eta;
  }
  emit(o, j);
  return kOk;
}

int run_csp(const std::string& gram_path, std::size_t r, std::size_t k, const std::string& mode,
            const std::string& solver, std::size_t restarts, std::size_t iters, std::uint64_t seed,
            std::uint64_t budget, const std::string& instance_out, const Output& o) {
  const auto g = ssbmf::io::gram_from_json(ssbmf::io::read_json(gram_path));
  const auto inst =
      ssbmf::csp::reduce_symmetric(g, r, k, mode == "int" ? ssbmf::csp::Mode::integer : ssbmf::csp::Mode::boolean);
  if (!instance_out.empty()) ssbmf::io::write_json(instance_out, ssbmf::io::csp_to_json(inst));
  const auto a = solver == "exact" ? ssbmf::csp::solve_exact(inst, budget)
                                   : ssbmf::csp::solve_local(inst, restarts, iters, seed);
  const auto f = ssbmf::csp::assignment_to_factors(inst, a.sigma);
  json j;
  j["value"] = a.value;
  j["edges"] = f.edges;
  j["gap"] = f.edges ? static_cast<double>(f.edges - a.value) / static_cast<double>(f.edges) : 0.0;
  j["residual_off_diagonal"] = f.off_diagonal_error;
  j["residual_full"] = f.full_error;
  j["solver"] = solver;
  j["rows"] = f.w.rows();
  emit(o, j);
  return kOk;
}

std::vector<long> parse_vector(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ssbmf::ParameterError("bad vector entry '" + cell + "'");
    }
  }
  return out;
}

json proportion_json(const ssbmf::probes::Proportion& p) {
  return {{"successes", p.successes}, {"trials", p.trials}, {"frequency", p.frequency},
          {"ci_low", p.ci_low},       {"ci_high", p.ci_high}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse symmetric Boolean matrix factorization toolkit"};
  app.require_subcommand(1);
  Output out;

  // gen
  std::size_t m = 0, r = 0, k = 0, d = 0;
  std::uint64_t seed = 0;
  std::string x_out, z_out, gram_out;
  auto* gen = app.add_subcommand("gen", "sample a random k-sparse W (and optionally X, Z)");
  gen->add_option("--m", m, "rows")->required();
  gen->add_option("--r", r, "columns")->required();
  gen->add_option("--k", k, "ones per row")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--d", d, "also sample X (r x d) and write Z = |W X|");
  gen->add_option("--x-out", x_out, "CSV for X");
  gen->add_option("--z-out", z_out, "CSV for Z");
  gen->add_option("--gram-out", gram_out, "JSON for the similarity Gram matrix");
  add_output(gen, out);

  // gram
  std::string in, arith = "bool", csv_out;
  auto* gram = app.add_subcommand("gram", "Gram matrix of an instance");
  gram->add_option("--in", in, "instance JSON")->required();
  gram->add_option("--arith", arith, "Boolean or integer entries")->check(CLI::IsMember({"bool", "int"}));
  gram->add_option("--csv", csv_out, "also write a dense CSV");
  add_output(gram, out);

  // attack
  std::string gram_path, truth, w_out;
  bool timings = false;
  RecoveryFlags rf;
  auto* attack = app.add_subcommand("attack", "recover W from its Boolean Gram matrix");
  attack->add_option("--gram", gram_path, "Gram JSON")->required();
  rf.add(attack);
  attack->add_option("--truth", truth, "instance JSON to match recovered columns against");
  attack->add_option("--w-out", w_out, "write the recovered W as instance JSON");
  attack->add_flag("--timings", timings, "include wall-clock seconds in the report");
  add_output(attack, out);

  // recover
  std::string synthetic, truth_x, truth_w;
  double eta = 0.25, c_heavy = 6.0;
  RecoveryFlags rf2;
  auto* rec = app.add_subcommand("recover", "recover W, then heavy magnitudes of X");
  rec->add_option("--gram", gram_path, "Gram JSON")->required();
  rec->add_option("--synthetic", synthetic, "CSV of Z (m x d)")->required();
  rf2.add(rec);
  rec->add_option("--eta", eta, "target relative error");
  rec->add_option("--c-heavy", c_heavy, "heaviness constant");
  rec->add_option("--x-out", x_out, "CSV for the magnitude estimates");
  rec->add_option("--truth-x", truth_x, "CSV of the true X, for per-entry errors");
  rec->add_option("--truth-w", truth_w, "instance JSON of the true W, for row alignment");
  add_output(rec, out);

  // csp
  std::string csp_mode = "int", solver = "exact", csp_out;
  std::size_t restarts = 50, iters = 1000;
  std::uint64_t budget = 10'000'000;
  std::size_t cr = 0, ck = 0;
  auto* cspc = app.add_subcommand("csp", "solve the Max 2-CSP reduction of a Gram matrix");
  cspc->add_option("--gram", gram_path, "Gram JSON")->required();
  cspc->add_option("--r", cr, "columns")->required();
  cspc->add_option("--k", ck, "ones per row")->required();
  cspc->add_option("--mode", csp_mode, "integer or Boolean constraints")->check(CLI::IsMember({"int", "bool"}));
  cspc->add_option("--solver", solver, "solver")->check(CLI::IsMember({"exact", "local"}));
  cspc->add_option("--restarts", restarts, "local search restarts");
  cspc->add_option("--iters", iters, "local search moves per restart");
  cspc->add_option("--seed", seed, "local search seed");
  cspc->add_option("--budget", budget, "exact search budget");
  cspc->add_option("--instance-out", csp_out, "write the CSP instance JSON");
  add_output(cspc, out);

  // probe
  auto* probe = app.add_subcommand("probe", "validation probes");
  probe->require_subcommand(1);
  std::vector<std::uint64_t> primes;
  auto* p_rank = probe->add_subcommand("rank", "ranks of an instance over F2, mod p and the reals");
  p_rank->add_option("--in", in, "instance JSON")->required();
  p_rank->add_option("--primes", primes, "extra primes");
  p_rank->add_option("--seed", seed, "seed for the random primes");
  add_output(p_rank, out);

  std::size_t pr = 0, pk = 0;
  std::optional<std::size_t> lambda;
  auto* p_kraw = probe->add_subcommand("krawtchouk", "Krawtchouk values, F2 zero probabilities, bound check");
  p_kraw->add_option("--r", pr, "r")->required();
  p_kraw->add_option("--k", pk, "k")->required();
  p_kraw->add_option("--lambda", lambda, "single lambda (default: all)");
  add_output(p_kraw, out);

  std::size_t trials = 100;
  auto* p_sing = probe->add_subcommand("singularity", "full-rank frequency of random W");
  p_sing->add_option("--m", m, "rows")->required();
  p_sing->add_option("--r", pr, "columns")->required();
  p_sing->add_option("--k", pk, "ones per row")->required();
  p_sing->add_option("--trials", trials, "trials");
  p_sing->add_option("--seed", seed, "seed");
  add_output(p_sing, out);

  std::string xs;
  std::uint64_t q = 0;
  std::size_t samples = 10000;
  double constant = 3.0;
  auto* p_anti = probe->add_subcommand("anticoncentration", "largest atom of <w, x>");
  p_anti->add_option("--x", xs, "comma-separated integer vector")->required();
  p_anti->add_option("--k", pk, "ones per row")->required();
  p_anti->add_option("--q", q, "modulus (0: over the integers)");
  p_anti->add_option("--samples", samples, "samples");
  p_anti->add_option("--seed", seed, "seed");
  p_anti->add_option("--constant", constant, "envelope constant");
  add_output(p_anti, out);

  std::size_t pt = 0;
  double delta = 0.1, c0 = 8.0;
  auto* p_size = probe->add_subcommand("sample-size", "smallest m with m >= c0 (t^2 r / k) ln(m^3 / delta)");
  p_size->add_option("--r", pr, "r")->required();
  p_size->add_option("--k", pk, "k")->required();
  p_size->add_option("--t", pt, "union size (default 3k)");
  p_size->add_option("--delta", delta, "failure probability");
  p_size->add_option("--c0", c0, "constant");
  add_output(p_size, out);

  // bench
  ssbmf::bench::BenchConfig bc;
  auto* bench = app.add_subcommand("bench", "serial against OpenMP kernel timings (CSV)");
  bench->add_option("--m", bc.m, "rows");
  bench->add_option("--r", bc.r, "columns");
  bench->add_option("--k", bc.k, "ones per row");
  bench->add_option("--anchors", bc.anchors, "anchor rows for the tensor kernel");
  bench->add_option("--repeats", bc.repeats, "runs per variant");
  bench->add_option("--seed", bc.seed, "seed");
  bench->add_option("--out", csv_out, "CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParameter;
  }

  try {
    if (*gen) return run_gen(m, r, k, seed, d, x_out, z_out, gram_out, out);
    if (*gram) return run_gram(in, arith, csv_out, out);
    if (*attack) return run_attack(gram_path, rf, truth, w_out, timings, out);
    if (*rec) return run_recover(gram_path, synthetic, rf2, eta, c_heavy, x_out, truth_x, truth_w, out);
    if (*cspc) return run_csp(gram_path, cr, ck, csp_mode, solver, restarts, iters, seed, budget, csp_out, out);
    if (*p_rank) {
      const auto w = ssbmf::io::instance_from_json(ssbmf::io::read_json(in));
      const auto rep = ssbmf::probes::rank_report(w, primes, seed);
      json mods = json::array();
      for (auto [p, rk] : rep.rank_mod) mods.push_back({{"prime", p}, {"rank", rk}});
      emit(out, {{"rank_f2", rep.rank_f2},
                 {"rank_real", rep.rank_real},
                 {"certified", rep.certified},
                 {"method", rep.method},
                 {"rank_mod", mods}});
      return kOk;
    }
    if (*p_kraw) {
      json rows = json::array();
      const std::size_t lo = lambda.value_or(0), hi = lambda.value_or(pr);
      for (std::size_t l = lo; l <= hi; ++l) {
        const auto p = ssbmf::probes::f2_zero_probability(pr, pk, l);
        rows.push_back({{"lambda", l},
                        {"krawtchouk", ssbmf::probes::krawtchouk(pr, pk, l).str()},
                        {"f2_zero_probability",
                         boost::multiprecision::numerator(p).str() + "/" + boost::multiprecision::denominator(p).str()}});
      }
      json j{{"r", pr}, {"k", pk}, {"values", rows}};
      if (100 * pk <= 16 * pr) {
        const auto check = ssbmf::probes::krawtchouk_bound_check(pr, pk);
        j["bound_checked"] = check.checked;
        j["bound_violation"] = check.violation ? json(*check.violation) : json(nullptr);
      }
      emit(out, j);
      return kOk;
    }
    if (*p_sing) {
      const auto rec_s = ssbmf::probes::singularity_experiment(m, pr, pk, trials, seed);
      emit(out, {{"m", m},
                 {"r", pr},
                 {"k", pk},
                 {"full_f2", proportion_json(rec_s.full_f2)},
                 {"full_real", proportion_json(rec_s.full_real)}});
      return kOk;
    }
    if (*p_anti) {
      const auto x = parse_vector(xs);
      const auto a = ssbmf::probes::anticoncentration_estimate(x, pk, q, samples, seed, constant);
      emit(out, {{"max_atom", a.max_atom},
                 {"s", a.s},
                 {"envelope", std::isfinite(a.envelope) ? json(a.envelope) : json(nullptr)},
                 {"within", a.within}});
      return kOk;
    }
    if (*p_size) {
      const std::size_t t = pt ? pt : 3 * pk;
      emit(out, {{"r", pr}, {"k", pk}, {"t", t}, {"delta", delta}, {"c0", c0},
                 {"m", ssbmf::required_sample_size(pr, pk, t, delta, c0)}});
      return kOk;
    }
    if (*bench) {
      const auto t = ssbmf::bench::run_kernels(bc);
      const std::string csv = ssbmf::bench::timings_csv(t);
      if (!csv_out.empty()) ssbmf::io::write_file(csv_out, csv);
      std::cout << csv;
      return kOk;
    }
  } catch (const ssbmf::ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kParameter;
  } catch (const ssbmf::DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kParameter;
  } catch (const ssbmf::BudgetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kParameter;
  } catch (const ssbmf::Error& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kFailure;
  }
  return kParameter;
}
