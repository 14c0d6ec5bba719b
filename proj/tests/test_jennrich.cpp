#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "ssbmf/error.hpp"
#include "ssbmf/jennrich.hpp"
#include "ssbmf/probes.hpp"

using namespace ssbmf;

namespace {

using Column = std::vector<std::uint8_t>;

std::multiset<Column> rounded(const Decomposition& d) {
  std::multiset<Column> out;
  for (const auto& c : d.components) out.insert(round_boolean(c));
  return out;
}

// Re-expands the rounded components and compares with T entrywise.
bool reexpands(const IntersectionTensor& t, const Decomposition& d) {
  std::vector<Column> cols;
  for (const auto& c : d.components) cols.push_back(round_boolean(c));
  const auto back = tensor_from_columns(cols);
  for (std::size_t a = 0; a < t.dim(); ++a)
    for (std::size_t b = 0; b < t.dim(); ++b)
      for (std::size_t c = 0; c < t.dim(); ++c)
        if (back(a, b, c) != t(a, b, c)) return false;
  return true;
}

std::vector<Column> dense_columns(const SelectionMatrix& w) {
  std::vector<Column> cols(w.r(), Column(w.m()));
  for (std::size_t i = 0; i < w.m(); ++i)
    for (auto j : w.support(i)) cols[j][i] = 1;
  return cols;
}

}  // namespace

TEST_SUITE("jennrich") {
  TEST_CASE("two components") {
    const auto t = tensor_from_columns({{1, 1, 0}, {0, 0, 1}});
    const auto d = jennrich_decompose(t, 2, 1);
    CHECK(rounded(d) == std::multiset<Column>{{1, 1, 0}, {0, 0, 1}});
    CHECK(reexpands(t, d));
  }

  TEST_CASE("one component") {
    const auto t = tensor_from_columns({{1, 0, 1}});
    const auto d = jennrich_decompose(t, 1, 0);
    CHECK(rounded(d) == std::multiset<Column>{{1, 0, 1}});
  }

  TEST_CASE("duplicated components are rank deficient") {
    const auto t = tensor_from_columns({{1, 1, 0, 1}, {1, 1, 0, 1}});
    CHECK_THROWS_AS(jennrich_decompose(t, 2, 0), RankDeficiencyError);
  }

  TEST_CASE("eigenvalues are the ratios of the contraction weights") {
    const auto w = gen_selection_matrix(30, 6, 3, 5);
    const auto cols = dense_columns(w);
    const auto t = tensor_from_columns(cols);
    const auto d = jennrich_decompose(t, 6, 9);
    REQUIRE(d.components.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto c = round_boolean(d.components[i]);
      Eigen::VectorXd wv(30);
      for (Eigen::Index j = 0; j < 30; ++j) wv(j) = c[static_cast<std::size_t>(j)];
      const double ratio = wv.dot(d.v1) / wv.dot(d.v2);
      CHECK(std::abs(ratio - d.eigenvalues[i]) <= 1e-6 * std::max(1.0, std::abs(ratio)));
    }
    CHECK(reexpands(t, d));
  }

  TEST_CASE("full real rank never reports rank deficiency") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto w = gen_selection_matrix(24, 8, 3, seed);
      if (probes::rank_report(w).rank_real != 8) continue;
      ++checked;
      const auto t = tensor_from_columns(dense_columns(w));
      CHECK_NOTHROW(jennrich_decompose(t, 8, seed));
    }
    CHECK(checked > 10);
  }

  TEST_CASE("rounding") {
    CHECK(round_boolean(Eigen::Vector3d(-2, 0, -2)) == Column{1, 0, 1});
    CHECK(round_boolean(Eigen::Vector3d(0.9999, 1e-9, 1.0001), 0.25) == Column{1, 0, 1});
    try {
      round_boolean(Eigen::Vector3d(0.4, 0.6, 1.0), 0.25);
      FAIL("expected a rounding error");
    } catch (const RoundingError& e) {
      CHECK(e.index == 0);
      CHECK(e.margin == doctest::Approx(0.4));
    }
    CHECK_THROWS_AS(round_boolean(Eigen::Vector3d::Zero()), ParameterError);
  }

  TEST_CASE("extension from a unit anchor block") {
    // k = 1: the anchors are the four singletons, so intersections read off membership.
    const SelectionMatrix w(4, 1, {{0}, {1}, {2}, {3}, {2}, {0}, {3}, {1}, {1}, {0}});
    const auto g = gram(w, Arithmetic::boolean);
    const std::vector<std::size_t> anchors{0, 1, 2, 3};
    const auto out = extend_from_anchors(Eigen::MatrixXd::Identity(4, 4), anchors, g, mu_table(4, 1), 1);
    CHECK(out == w);
  }

  TEST_CASE("extension on a planted instance") {
    const std::size_t r = 8, k = 2, m = 400, n0 = 32;
    const auto w = gen_selection_matrix(m, r, k, 21);
    const auto g = gram(w, Arithmetic::boolean);
    std::vector<std::size_t> anchors(n0);
    std::iota(anchors.begin(), anchors.end(), 0);
    const Eigen::MatrixXd block = w.to_dense().topRows(n0);
    CHECK(extend_from_anchors(block, anchors, g, mu_table(r, k), k) == w);
    CHECK(extend_from_anchors(block, anchors, g, mu_table(r, k), k, Exec::serial) == w);

    Eigen::MatrixXd dup = block;
    dup.col(1) = dup.col(0);
    CHECK_THROWS_AS(extend_from_anchors(dup, anchors, g, mu_table(r, k), k), RankDeficiencyError);
  }

  TEST_CASE("recovery of a planted instance, full mode") {
    const auto w = gen_selection_matrix(64, 8, 2, 3);
    const auto res = tensor_recover(gram(w, Arithmetic::boolean), 8, 2);
    REQUIRE(res.success);
    CHECK(res.residual == 0);
    CHECK(match_columns(*res.w_hat, w).matched);
  }

  TEST_CASE("recovery of a planted instance, anchored mode") {
    const auto w = gen_selection_matrix(800, 16, 3, 4);
    RecoveryConfig cfg;
    cfg.mode = TensorMode::anchored;
    cfg.anchors = 64;
    cfg.seed = 4;
    const auto res = tensor_recover(gram(w, Arithmetic::boolean), 16, 3, cfg);
    REQUIRE(res.success);
    CHECK(res.anchors.size() == 64);
    CHECK(match_columns(*res.w_hat, w).matched);
    CHECK(default_anchor_count(800, 16) == 64);
    CHECK(default_anchor_count(800, 2) == 18);
    CHECK(default_anchor_count(10, 16) == 10);
  }

  TEST_CASE("permutation matrix") {
    const SelectionMatrix w(6, 1, {{3}, {0}, {5}, {1}, {4}, {2}});
    const auto res = tensor_recover(gram(w, Arithmetic::boolean), 6, 1);
    REQUIRE(res.success);
    CHECK(match_columns(*res.w_hat, w).matched);
  }

  TEST_CASE("all-ones Gram cannot be factored with k = 1") {
    const auto ones = GramMatrix::from_dense(std::vector<std::vector<int>>(6, std::vector<int>(6, 1)),
                                             Arithmetic::boolean);
    const auto res = tensor_recover(ones, 2, 1);
    CHECK_FALSE(res.success);
    CHECK_FALSE(res.failure.empty());
    CHECK_THROWS_AS(tensor_recover(ones, 8, 1), ParameterError);
  }

  TEST_CASE("column matching") {
    const auto w = gen_selection_matrix(50, 6, 2, 1);
    const auto id = match_columns(w, w);
    CHECK(id.matched);
    CHECK(id.permutation == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

    const std::vector<std::size_t> rev{5, 4, 3, 2, 1, 0};
    const auto r = match_columns(w.permute_columns(rev), w);
    CHECK(r.matched);
    CHECK(r.permutation == rev);

    auto cols = std::vector<std::vector<bits::Word>>();
    for (std::size_t j = 0; j < 6; ++j) cols.push_back(w.column(j));
    auto flipped = cols;
    flipped[2][0] ^= 1;
    const auto bad = match_columns(flipped, cols);
    CHECK_FALSE(bad.matched);
    CHECK(bad.unmatched_candidate == std::vector<std::size_t>{2});
    CHECK(bad.unmatched_reference == std::vector<std::size_t>{2});
  }
}
