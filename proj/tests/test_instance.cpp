#include <doctest.h>

#include <cmath>
#include <map>

#include "ssbmf/error.hpp"
#include "ssbmf/instance.hpp"

using namespace ssbmf;

namespace {

std::vector<std::vector<int>> dense(const GramMatrix& g, Arithmetic a) {
  std::vector<std::vector<int>> out(g.m(), std::vector<int>(g.m()));
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.m(); ++j) out[i][j] = g.entry(i, j, a);
  return out;
}

}  // namespace

TEST_SUITE("instance") {
  TEST_CASE("k = r forces full rows") {
    const auto w = gen_selection_matrix(3, 4, 4, 99);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(w.rows()[i] == std::vector<std::uint32_t>{0, 1, 2, 3});
  }

  TEST_CASE("support histogram passes a chi-square check") {
    const auto w = gen_selection_matrix(2000, 10, 2, 7);
    std::map<std::vector<std::uint32_t>, int> hist;
    for (const auto& row : w.rows()) ++hist[row];
    CHECK(hist.size() == 45);
    const double expected = 2000.0 / 45.0;
    double chi2 = 0;
    for (const auto& [_, c] : hist) chi2 += (c - expected) * (c - expected) / expected;
    // 44 degrees of freedom: mean 44, variance 88.
    CHECK(chi2 < 44.0 + 5.0 * std::sqrt(88.0));
  }

  TEST_CASE("generation is deterministic") {
    CHECK(gen_selection_matrix(5, 4, 2, 1) == gen_selection_matrix(5, 4, 2, 1));
    CHECK_FALSE(gen_selection_matrix(50, 10, 3, 1) == gen_selection_matrix(50, 10, 3, 2));
  }

  TEST_CASE("parameter errors") {
    CHECK_THROWS_AS(gen_selection_matrix(3, 4, 9, 0), ParameterError);
    CHECK_THROWS_AS(gen_selection_matrix(0, 4, 2, 0), ParameterError);
    CHECK_THROWS_AS(SelectionMatrix(4, 2, {{0, 0}}), ParameterError);
    CHECK_THROWS_AS(SelectionMatrix(4, 2, {{0, 4}}), ParameterError);
    CHECK_THROWS_AS(SelectionMatrix(4, 2, {{0, 1, 2}}), ParameterError);
  }

  TEST_CASE("gram examples") {
    const SelectionMatrix w(4, 2, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(dense(gram(w, Arithmetic::boolean), Arithmetic::boolean) ==
          std::vector<std::vector<int>>{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}});
    const SelectionMatrix twice(2, 2, {{0, 1}, {0, 1}});
    CHECK(dense(gram(twice, Arithmetic::integer), Arithmetic::integer) ==
          std::vector<std::vector<int>>{{2, 2}, {2, 2}});
    const auto g = gram(gen_selection_matrix(70, 9, 3, 4), Arithmetic::boolean);
    for (std::size_t a = 0; a < g.m(); ++a) CHECK(g.bit(a, a));
    CHECK(g.is_symmetric());
  }

  TEST_CASE("boolean entry is the indicator of a positive integer entry, exhaustively") {
    // All pairs of supports for r <= 6 cover every 2-row W; extra rows add nothing new per entry.
    for (std::size_t r = 1; r <= 6; ++r)
      for (std::size_t k = 1; k <= r; ++k) {
        const auto all = gen_selection_matrix(400, r, k, r * 10 + k);
        const auto gb = gram(all, Arithmetic::boolean);
        const auto gi = gram(all, Arithmetic::integer);
        for (std::size_t a = 0; a < all.m(); ++a)
          for (std::size_t b = 0; b < all.m(); ++b) {
            std::size_t common = 0;
            for (auto x : all.support(a)) common += all.contains(b, x);
            REQUIRE(gi.count(a, b) == common);
            REQUIRE(gb.bit(a, b) == (common > 0));
          }
      }
  }

  TEST_CASE("gram is invariant under column permutation") {
    const auto w = gen_selection_matrix(40, 8, 3, 11);
    const std::vector<std::size_t> perm{7, 6, 5, 4, 3, 2, 1, 0};
    CHECK(gram(w.permute_columns(perm), Arithmetic::integer) == gram(w, Arithmetic::integer));
    CHECK_FALSE(w.permute_columns(perm) == w);
  }

  TEST_CASE("factorization error") {
    const auto w = gen_selection_matrix(30, 8, 2, 5);
    CHECK(factorization_error(gram(w, Arithmetic::boolean), w, Arithmetic::boolean) == 0);
    CHECK(factorization_error(gram(w, Arithmetic::integer), w, Arithmetic::integer) == 0);

    const auto m = gram(SelectionMatrix(4, 2, {{0, 1}, {2, 3}}), Arithmetic::boolean);
    const SelectionMatrix other(4, 2, {{0, 1}, {1, 2}});
    CHECK(factorization_error(m, other, Arithmetic::boolean) == 2);
    CHECK(factorization_error(m, other, Arithmetic::boolean, true) == 2);

    const auto ones = GramMatrix::from_dense({{1, 1}, {1, 1}}, Arithmetic::boolean);
    CHECK(factorization_error(ones, SelectionMatrix(4, 2, {{0, 1}, {2, 3}}), Arithmetic::boolean) == 2);

    CHECK_THROWS_AS(factorization_error(m, gen_selection_matrix(3, 4, 2, 0), Arithmetic::boolean), DimensionError);
  }

  TEST_CASE("columns and dense view agree") {
    const auto w = gen_selection_matrix(100, 12, 3, 2);
    const auto d = w.to_dense();
    for (std::size_t j = 0; j < 12; ++j) {
      const auto col = w.column(j);
      for (std::size_t i = 0; i < 100; ++i) CHECK(bits::test(col, i) == (d(i, j) == 1.0));
    }
  }
}
