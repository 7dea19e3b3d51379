#include <cmath>
#include <cstdint>

#include <stdexcept>

#include "doctest.h"
#include "rrlab/aggregation.hpp"

using namespace rrlab;
using doctest::Approx;

namespace {
std::vector<Answer> answers(std::initializer_list<const char*> xs) {
  std::vector<Answer> out;
  for (const char* x : xs) out.push_back(x ? Answer(x) : std::nullopt);
  return out;
}

// Exact two-tailed Fisher p as a ratio of uint64 binomial coefficients.
double fisher_oracle(long a, long b, long c, long d) {
  static std::vector<std::vector<std::uint64_t>> pascal = [] {
    std::vector<std::vector<std::uint64_t>> t(61);
    for (int n = 0; n <= 60; ++n) {
      t[n].assign(n + 1, 1);
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  auto choose = [&](long n, long k) { return (k < 0 || k > n) ? 0ULL : pascal[n][k]; };
  const long r1 = a + b, r2 = c + d, c1 = a + c;
  const std::uint64_t observed = choose(r1, a) * choose(r2, c1 - a);
  std::uint64_t tail = 0;
  for (long x = 0; x <= c1; ++x) {
    const std::uint64_t w = choose(r1, x) * choose(r2, c1 - x);
    if (w != 0 && w <= observed) tail += w;
  }
  return static_cast<double>(tail) / static_cast<double>(choose(r1 + r2, c1));
}
}  // namespace

TEST_CASE("plurality basics") {
  Rng rng(1);
  auto v = plurality(answers({"A", "B", "A", nullptr, "C"}), TiePolicy::seeded_uniform, rng);
  CHECK(v.winner == "A");
  CHECK_FALSE(v.tie);
  CHECK(v.unresolved == 1);
  CHECK(v.counts.at("A") == 2);

  auto none = plurality(answers({nullptr, nullptr}), TiePolicy::seeded_uniform, rng);
  CHECK(none.no_quorum());
  CHECK(none.unresolved == 2);
  CHECK(plurality(std::vector<Answer>{}, TiePolicy::lexicographic, rng).no_quorum());

  auto lex = plurality(answers({"C", "B", "B", "C"}), TiePolicy::lexicographic, rng);
  CHECK(lex.tie);
  CHECK(lex.winner == "B");
  CHECK(lex.tie_members == std::set<Label>{"B", "C"});
}

TEST_CASE("unresolved answers never outvote a resolved one") {
  Rng rng(2);
  CHECK(plurality(answers({nullptr, nullptr, nullptr, "D"}), TiePolicy::seeded_uniform, rng).winner == "D");
}

TEST_CASE("seeded ties are uniform and reproducible") {
  Rng rng(3);
  int b = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    b += *plurality(answers({"A", "B"}), TiePolicy::seeded_uniform, rng).winner == "B";
  CHECK(std::abs(b / static_cast<double>(n) - 0.5) < 3 * std::sqrt(0.25 / n));

  Rng r1(9), r2(9);
  for (int i = 0; i < 100; ++i)
    CHECK(plurality(answers({"A", "B", "C"}), TiePolicy::seeded_uniform, r1).winner ==
          plurality(answers({"A", "B", "C"}), TiePolicy::seeded_uniform, r2).winner);
}

TEST_CASE("single-draw expectation") {
  CHECK(maj_m1_expectation(3, 2, 0.0, 1.0) == Approx(0.4));
  CHECK(maj_m1_expectation(0, 5, 0.3, 0.9) == Approx(0.9));
  CHECK(maj_m1_expectation(1, 4, 0.2, 0.8) == Approx(0.68));
  CHECK_THROWS_AS(maj_m1_expectation(0, 0, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("binary vote curve") {
  CHECK(condorcet_curve(0.7, 5) == Approx(0.83692).epsilon(1e-5));
  CHECK(condorcet_curve(0.7, 1) == Approx(0.7));
  CHECK(condorcet_curve(0.5, 7) == Approx(0.5));
  CHECK(condorcet_curve(0.6, 2) == Approx(0.36 + 0.5 * 0.48));
  CHECK(condorcet_curve(0.6, 2, TiePolicy::lexicographic) == Approx(0.36));
  CHECK(condorcet_curve(0.0, 9) == 0.0);
  CHECK(condorcet_curve(1.0, 200) == 1.0);
  CHECK(condorcet_curve(0.55, 201) > condorcet_curve(0.55, 101));
  CHECK(condorcet_curve(0.45, 201) < condorcet_curve(0.45, 101));
  CHECK_THROWS_AS(condorcet_curve(1.2, 3), std::invalid_argument);
  CHECK_THROWS_AS(condorcet_curve(0.5, 0), std::invalid_argument);
}

TEST_CASE("binary vote curve matches brute force for m <= 11") {
  for (double p : {0.1, 0.3, 0.5, 0.62, 0.9}) {
    for (int m = 1; m <= 11; ++m) {
      double win = 0.0;
      double lex = 0.0;
      for (unsigned mask = 0; mask < (1u << m); ++mask) {
        const int j = __builtin_popcount(mask);
        const double mass = std::pow(p, j) * std::pow(1 - p, m - j);
        if (2 * j > m) {
          win += mass;
          lex += mass;
        } else if (2 * j == m) {
          win += 0.5 * mass;
        }
      }
      CAPTURE(p);
      CAPTURE(m);
      CHECK(condorcet_curve(p, m) == Approx(win).epsilon(1e-12));
      CHECK(condorcet_curve(p, m, TiePolicy::lexicographic) == Approx(lex).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-space branch agrees with the exact branch") {
  // m = 65 is just past the exact cutoff; compare with the continuous trend.
  const double a = condorcet_curve(0.52, 63);
  const double b = condorcet_curve(0.52, 65);
  const double c = condorcet_curve(0.52, 67);
  CHECK(a < b);
  CHECK(b < c);
  CHECK(b - a == Approx(c - b).epsilon(0.1));
}

TEST_CASE("bootstrap scaling") {
  Rng rng(1);
  ScalingPool all_right;
  all_right.m_star = 10;
  for (int t = 0; t < 20; ++t) all_right.entries.push_back({"t" + std::to_string(t), "A", answers({"A", "A", "A"})});
  const auto p1 = bootstrap_scaling(all_right, 5, 50, TiePolicy::seeded_uniform, rng);
  CHECK(p1.mean == 1.0);
  CHECK(p1.std == 0.0);
  CHECK(p1.standard_error() == 0.0);
  CHECK(p1.mean_unresolved == 0.0);

  ScalingPool binary;
  binary.m_star = 50;
  for (int t = 0; t < 300; ++t) {
    PoolEntry e{"t" + std::to_string(t), "A", {}};
    for (int i = 0; i < 50; ++i) e.outcomes.push_back(i < 35 ? "A" : "B");
    binary.entries.push_back(e);
  }
  CHECK(binary.empirical_accuracy() == Approx(0.7));
  const auto p5 = bootstrap_scaling(binary, 5, 200, TiePolicy::seeded_uniform, rng);
  CHECK(p5.mean == Approx(condorcet_curve(0.7, 5)).epsilon(0.01));
  CHECK(p5.std > 0.0);
  CHECK(p5.trials == 200);
  CHECK_THROWS_AS(bootstrap_scaling(binary, 51, 10, TiePolicy::seeded_uniform, rng), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_scaling(binary, 0, 10, TiePolicy::seeded_uniform, rng), std::invalid_argument);
}

TEST_CASE("bootstrap excludes tasks without a quorum") {
  Rng rng(4);
  ScalingPool pool;
  pool.m_star = 5;
  pool.entries.push_back({"ok", "A", answers({"A", "A"})});
  pool.entries.push_back({"wrong", "A", answers({"B"})});
  pool.entries.push_back({"void", "A", answers({nullptr, nullptr})});
  const auto pt = bootstrap_scaling(pool, 3, 20, TiePolicy::seeded_uniform, rng);
  CHECK(pt.mean == Approx(0.5));
  CHECK(pt.mean_unresolved == Approx(1.0));
  CHECK(pool.empirical_accuracy() == Approx(2.0 / 3.0));

  ScalingPool bad;
  bad.m_star = 1;
  bad.entries.push_back({"x", "A", answers({"A", "A"})});
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("bootstrap is reproducible") {
  ScalingPool pool;
  pool.m_star = 4;
  for (int t = 0; t < 30; ++t) pool.entries.push_back({"t" + std::to_string(t), "A", answers({"A", "B", "C", "A"})});
  Rng a(5), b(5);
  const auto x = bootstrap_scaling(pool, 3, 40, TiePolicy::seeded_uniform, a);
  const auto y = bootstrap_scaling(pool, 3, 40, TiePolicy::seeded_uniform, b);
  CHECK(x.mean == y.mean);
  CHECK(x.std == y.std);
}

TEST_CASE("Fisher exact test reference values") {
  CHECK(fisher_exact_2x2(954, 222, 215, 45) == Approx(0.5977855).epsilon(1e-6));
  CHECK(fisher_exact_2x2(3, 0, 0, 3) == Approx(0.1).epsilon(1e-12));
  CHECK(fisher_exact_2x2(1, 1, 1, 1) == Approx(1.0));
  CHECK_THROWS_AS(fisher_exact_2x2(0, 0, 3, 4), std::invalid_argument);
  CHECK_THROWS_AS(fisher_exact_2x2(1, 0, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(fisher_exact_2x2(-1, 2, 3, 4), std::invalid_argument);
}

TEST_CASE("Fisher matches an exact integer oracle and its invariances") {
  Rng rng(6);
  std::uniform_int_distribution<long> cell(0, 15);
  int checked = 0;
  while (checked < 2000) {
    const long a = cell(rng), b = cell(rng), c = cell(rng), d = cell(rng);
    if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0) continue;
    ++checked;
    const double p = fisher_exact_2x2(a, b, c, d);
    CAPTURE(a);
    CAPTURE(b);
    CAPTURE(c);
    CAPTURE(d);
    CHECK(p == Approx(fisher_oracle(a, b, c, d)).epsilon(1e-9));
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    CHECK(fisher_exact_2x2(d, c, b, a) == Approx(p).epsilon(1e-12));  // row and column swap
    CHECK(fisher_exact_2x2(a, c, b, d) == Approx(p).epsilon(1e-12));  // transpose
    CHECK(fisher_exact_2x2(c, d, a, b) == Approx(p).epsilon(1e-12));  // row swap
  }
}

TEST_CASE("asymmetric yield") {
  const auto y = asymmetric_yield({{"1c4t", 0.6}, {"2c3t", -3.7}, {"3c2t", 69.9}, {"4c1t", 28.3}});
  CHECK(y.tax == Approx(-1.55));
  CHECK(y.gain == Approx(49.1));
  CHECK(y.tax_rows == 2);
  CHECK(y.gain_rows == 2);
  // Endpoints and the middle band are ignored.
  const auto z = asymmetric_yield({{"0c5t", 100.0}, {"1c1t", 50.0}, {"1c4t", 2.0}, {"3c2t", 4.0}, {"5c0t", -9.0}});
  CHECK(z.tax == 2.0);
  CHECK(z.gain == 4.0);
  CHECK_THROWS_AS(asymmetric_yield({{"1c4t", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(asymmetric_yield({{"3c2t", 1.0}, {"0c5t", 1.0}}), std::invalid_argument);
}
