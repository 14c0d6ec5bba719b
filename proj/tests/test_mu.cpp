#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ssbmf/error.hpp"
#include "ssbmf/mu.hpp"

using namespace ssbmf;

TEST_SUITE("mu") {
  TEST_CASE("table values for r=10, k=2") {
    const auto t = mu_table(10, 2, 9);
    CHECK(t.value(0) == Rational(1));
    CHECK(t.value(1) == Rational(36, 45));
    CHECK(t.value(2) == Rational(28, 45));
    CHECK(t.value(3) == Rational(21, 45));
    CHECK(t.value(9) == Rational(0));
    CHECK(mu_table(10, 2).t_max() == 6);
    CHECK(mu_table(7, 3).t_max() == 4);
    CHECK_THROWS_AS(mu_table(10, 11), ParameterError);
    CHECK_THROWS_AS(mu_table(10, 2, 11), ParameterError);
  }

  TEST_CASE("binomial edge cases") {
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(1, 2) == 0);
    CHECK(binomial(4, -1) == 0);
    CHECK(binomial(60, 30) == BigInt("118264581564861424"));
  }

  TEST_CASE("nearest inversion") {
    const auto t = mu_table(10, 2);
    CHECK(invert_fraction(1.0, t) == 0);
    CHECK(invert_fraction(0.63, t) == 2);
    CHECK(invert_fraction(0.45, t) == 3);
    // Midpoint of mu_1 and mu_2 is 32/45: the tie goes to the smaller union.
    CHECK(t.invert(Rational(32, 45)) == 1);
    CHECK(t.invert(32, 45) == 1);
    CHECK(t.invert(31, 45) == 2);
  }

  TEST_CASE("inversion is stable inside half the adjacent gap") {
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::size_t r = 64 * k * k;
      const auto table = mu_table(r, k);
      for (std::size_t t = 0; t < table.t_max(); ++t) {
        const Rational gap = table.value(t) - table.value(t + 1);
        const Rational eps = gap / 2 - gap / 1000;
        CHECK(table.invert(table.value(t) - eps) == t);
        CHECK(table.invert(table.value(t + 1) + eps) == t + 1);
      }
    }
  }

  TEST_CASE("count thresholds and lookup agree with direct inversion") {
    const auto table = mu_table(16, 3);
    const std::uint64_t total = 997;
    const InversionLookup lookup(table, total);
    for (std::uint64_t c = 0; c <= total; ++c) REQUIRE(lookup(c) == table.invert(c, total));
    for (std::size_t t = 0; t < table.t_max(); ++t) {
      const auto c = table.count_threshold(t, total);
      CHECK(table.invert(c, total) <= t);
      if (c > 0) CHECK(table.invert(c - 1, total) > t);
    }
  }

  TEST_CASE("gap bounds hold exactly at r = 64 k^2") {
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::size_t r = 64 * k * k;
      const auto table = mu_table(r, k, 3 * k + 1);
      for (std::size_t t = 0; t <= 3 * k; ++t) {
        const Rational gap = table.value(t) - table.value(t + 1);
        CHECK(gap >= Rational(k, 4 * r));
        const Rational explicit_bound =
            (Rational(1) - Rational((t + 1) * (k - 1), r - k + 2)) * Rational(k, r - k + 1);
        CHECK(gap >= explicit_bound);
        CHECK(table.value(t) >= Rational(1) - Rational(t * k, r - k + 1));
      }
    }
  }

  TEST_CASE("zero co-occurrence examples") {
    const auto m = GramMatrix::from_dense({{1, 1, 0}, {1, 1, 1}, {0, 1, 1}}, Arithmetic::boolean);
    const std::size_t ac[] = {0, 2};
    CHECK(zero_cooccurrence(m, ac) == 0);
    const std::size_t aa[] = {0, 0};
    CHECK(zero_cooccurrence(m, aa) == 1);
    const auto ones = GramMatrix::from_dense(std::vector<std::vector<int>>(4, std::vector<int>(4, 1)),
                                             Arithmetic::boolean);
    const std::size_t any[] = {1, 3};
    CHECK(zero_cooccurrence(ones, any) == 0);
    const std::size_t bad[] = {0, 5};
    CHECK_THROWS_AS(zero_cooccurrence(m, bad), DimensionError);
  }

  TEST_CASE("zero fraction concentrates around mu of the union") {
    const std::size_t r = 20, k = 2, m = 2000;
    const auto table = mu_table(r, k);
    int inside = 0;
    const int trials = 100;
    for (int s = 0; s < trials; ++s) {
      const auto w = gen_selection_matrix(m, r, k, 1000 + s);
      const auto g = gram(w, Arithmetic::boolean);
      std::vector<std::uint32_t> u;
      for (auto x : w.support(0)) u.push_back(x);
      for (auto x : w.support(1)) u.push_back(x);
      std::sort(u.begin(), u.end());
      const auto t = static_cast<std::size_t>(std::unique(u.begin(), u.end()) - u.begin());
      const std::size_t rows[] = {0, 1};
      const double n = static_cast<double>(effective_population(m, 2));
      const double frac = static_cast<double>(zero_cooccurrence(g, rows)) / n;
      const double mu = table.approx(t);
      inside += std::abs(frac - mu) <= 4.0 * std::sqrt(mu * (1 - mu) / n);
    }
    CHECK(inside >= 99);
  }

  TEST_CASE("likelihood inverter recovers unions from expected counts") {
    const auto table = mu_table(10, 2, 10);
    const LikelihoodInverter inv(table);
    // n = 4500 makes every expected count integral (C(10,2) = 45).
    const std::uint64_t n = 4500;
    auto expected = [&](std::size_t t) { return n * table.numerator(t).convert_to<std::uint64_t>() / 45; };
    for (int t = 2; t <= 4; ++t) CHECK(inv.pair(expected(2), expected(2), expected(t), n, 2, 4) == t);
    // S_a = {0,1}, S_b = {0,2}, S_c = {0,3}: pair unions 3, triple union 4.
    const std::array<std::uint64_t, 3> z1{expected(2), expected(2), expected(2)};
    const std::array<std::uint64_t, 3> z2{expected(3), expected(3), expected(3)};
    CHECK(inv.triple(z1, z2, expected(4), n, {3, 3, 3}, 3, 6) == 4);
    // Three disjoint pairs: unions 4, 4, 4 and 6.
    const std::array<std::uint64_t, 3> z2d{expected(4), expected(4), expected(4)};
    CHECK(inv.triple(z1, z2d, expected(6), n, {4, 4, 4}, 4, 6) == 6);
  }

  TEST_CASE("pairwise union sizes on a planted pair") {
    const std::size_t r = 10, k = 2, m = 3000;
    auto rows = gen_selection_matrix(m, r, k, 5).rows();
    rows[0] = {0, 1};
    rows[1] = {1, 2};
    rows[2] = {5, 6};
    const SelectionMatrix w(r, k, rows);
    const auto g = gram(w, Arithmetic::boolean);
    const auto table = mu_table(r, k);
    for (auto method : {Inversion::nearest, Inversion::likelihood})
      for (bool constrained : {false, true}) {
        const InversionPolicy policy{method, constrained};
        const auto u = pairwise_union_sizes(g, table, Exec::parallel, policy);
        CHECK(u(0, 1) == 3);
        CHECK(u(1, 0) == 3);
        CHECK(u(0, 2) == 4);
        CHECK(u(7, 7) == k);
        CHECK(u.data == pairwise_union_sizes(g, table, Exec::serial, policy).data);
      }
  }

  TEST_CASE("union_sizes is a sub-block of the pairwise matrix") {
    const auto g = gram(gen_selection_matrix(400, 12, 2, 8), Arithmetic::boolean);
    const auto table = mu_table(12, 2);
    const auto full = pairwise_union_sizes(g, table);
    const std::vector<std::size_t> rows{3, 50, 399}, cols{0, 3, 7, 200};
    const auto part = union_sizes(g, table, rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) CHECK(part(i, j) == full(rows[i], cols[j]));
  }

  TEST_CASE("constrained inversion respects the Boolean entries") {
    const std::size_t r = 16, k = 3;
    const auto w = gen_selection_matrix(120, r, k, 17);
    const auto g = gram(w, Arithmetic::boolean);
    const auto u = pairwise_union_sizes(g, mu_table(r, k));
    for (std::size_t a = 0; a < 120; ++a)
      for (std::size_t b = 0; b < 120; ++b) {
        if (a == b) continue;
        if (g.bit(a, b)) {
          REQUIRE(u(a, b) >= k);
          REQUIRE(u(a, b) <= 2 * k - 1);
        } else {
          REQUIRE(u(a, b) == 2 * k);
        }
      }
  }

  TEST_CASE("required sample size") {
    const auto m = required_sample_size(20, 2, 6, 0.1, 8.0);
    const double rhs = 8.0 * (36.0 * 20 / 2) * std::log(std::pow(static_cast<double>(m), 3) / 0.1);
    CHECK(static_cast<double>(m) >= rhs);
    const double rhs_prev = 8.0 * 360.0 * std::log(std::pow(static_cast<double>(m - 1), 3) / 0.1);
    CHECK(static_cast<double>(m - 1) < rhs_prev);

    CHECK(required_sample_size(20, 2, 7, 0.1) >= required_sample_size(20, 2, 6, 0.1));
    CHECK(required_sample_size(21, 2, 6, 0.1) >= required_sample_size(20, 2, 6, 0.1));
    CHECK(required_sample_size(20, 2, 6, 0.01) >= required_sample_size(20, 2, 6, 0.1));
    const auto tiny = required_sample_size(4, 2, 1, 0.999999, 1e-6);
    CHECK(tiny >= 1);
    CHECK(tiny <= 2);
    CHECK_THROWS_AS(required_sample_size(20, 2, 6, 1.5), ParameterError);
  }
}
