#include <cmath>
#include <sstream>

#include <stdexcept>

#include "doctest.h"
#include "rrlab/stability.hpp"

using namespace rrlab;
using doctest::Approx;

namespace {
OperatorParams params(double gamma, double alpha) {
  OperatorParams p;
  p.gamma_h = gamma;
  p.drift = DriftModel::linear(alpha);
  return p;
}
const DriftModel kPaperDrift = DriftModel::linear(0.004);
}  // namespace

TEST_CASE("honest restoration") {
  CHECK(honest_restoration(0.03, 100, 1.0) == Approx(0.952447).epsilon(1e-6));
  CHECK(honest_restoration(0.03, 0, 1.0) == 0.0);
  CHECK(honest_restoration(0.03, 1, 1.0) == Approx(0.03).epsilon(1e-15));
  CHECK(honest_restoration(0.03, 100, 2.0) == Approx(2 * 0.952447).epsilon(1e-6));
  CHECK_THROWS_AS(honest_restoration(0.03, -1, 1.0), std::invalid_argument);
}

TEST_CASE("adversarial drift") {
  CHECK(adversarial_drift(kPaperDrift, 100, 1.0) == Approx(0.4906348856).epsilon(1e-9));
  CHECK(adversarial_drift(DriftModel::linear(0.0), 250, 3.0) == 0.0);
  CHECK(adversarial_drift(DriftModel::linear(0.01), 2, 1.0) == Approx(0.0201).epsilon(1e-12));
  // A table drift matching the linear one on its range iterates identically.
  const auto table = DriftModel::table({{1.0, 0.004}, {10.0, 0.04}});
  CHECK(adversarial_drift(table, 100, 1.0) == Approx(0.4906348856).epsilon(1e-9));
}

TEST_CASE("rho_max oracle table") {
  // Frozen from a 30-digit evaluation of R/(R+D).
  const std::pair<int, double> oracle[] = {{1, 0.882353},   {10, 0.865720},  {30, 0.824809},
                                           {75, 0.720137},  {100, 0.660009}, {150, 0.546887},
                                           {300, 0.301893}, {500, 0.135876}};
  for (const auto& [k, expected] : oracle) {
    CAPTURE(k);
    CHECK(rho_max_conservative(0.03, kPaperDrift, k) == Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("rho_max reference values") {
  CHECK(rho_max_conservative(0.03, kPaperDrift, 100) == Approx(0.660).epsilon(0.001));
  CHECK(rho_max_conservative(0.03, kPaperDrift, 1) == Approx(0.03 / 0.034).epsilon(1e-12));
  CHECK(rho_max_conservative(0.2, DriftModel::linear(0.0), 7) == 1.0);
  // K = 500: the drift term is (1.004)^500 - 1 = 6.3596, not 5.36.
  CHECK(adversarial_drift(kPaperDrift, 500, 1.0) == Approx(6.35964).epsilon(1e-5));
  CHECK_THROWS_AS(rho_max_conservative(0.03, kPaperDrift, 0), std::invalid_argument);
}

TEST_CASE("rho_max monotone in gamma, alpha and K") {
  const double gammas[] = {0.01, 0.02, 0.05, 0.1, 0.2};
  const double alphas[] = {0.001, 0.003, 0.005, 0.01, 0.02};
  const int ks[] = {1, 10, 50, 100, 300};
  for (double a : alphas)
    for (int k : ks)
      for (int i = 1; i < 5; ++i)
        CHECK(rho_max_conservative(gammas[i], DriftModel::linear(a), k) >
              rho_max_conservative(gammas[i - 1], DriftModel::linear(a), k));
  for (double g : gammas)
    for (int k : ks)
      for (int i = 1; i < 5; ++i)
        CHECK(rho_max_conservative(g, DriftModel::linear(alphas[i]), k) <
              rho_max_conservative(g, DriftModel::linear(alphas[i - 1]), k));
  for (double g : gammas)
    for (double a : alphas)
      for (int i = 1; i < 5; ++i) {
        const double r = rho_max_conservative(g, DriftModel::linear(a), ks[i]);
        CHECK(r < rho_max_conservative(g, DriftModel::linear(a), ks[i - 1]));
        CHECK(r > 0.0);
        CHECK(r <= 1.0);
      }
}

TEST_CASE("rho_crit closed form") {
  CHECK(rho_crit_exact(0.03, 0.004) == Approx(0.884125).epsilon(1e-6));
  CHECK(rho_crit_exact(0.5, 0.5) == Approx(std::log(2.0) / (std::log(2.0) + std::log(1.5))).epsilon(1e-14));
  CHECK(rho_crit_exact(0.5, 0.5) == Approx(0.630930).epsilon(1e-6));
  CHECK_THROWS_AS(rho_crit_exact(0.03, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rho_crit_exact(1.0, 0.1), std::invalid_argument);
}

TEST_CASE("rho_crit dominates rho_max on a 5x5x5 grid") {
  for (double g : {0.01, 0.03, 0.05, 0.1, 0.3})
    for (double a : {0.001, 0.004, 0.01, 0.05, 0.2})
      for (int k : {1, 5, 30, 100, 500}) {
        CAPTURE(g);
        CAPTURE(a);
        CAPTURE(k);
        CHECK(rho_max_conservative(g, DriftModel::linear(a), k) <= rho_crit_exact(g, a) + 1e-12);
      }
}

TEST_CASE("super-majority whenever drift is below restoration") {
  Rng rng(5);
  std::uniform_real_distribution<double> g(0.005, 0.3);
  std::uniform_real_distribution<double> a(0.0005, 0.05);
  std::uniform_int_distribution<int> k(1, 400);
  int hits = 0;
  for (int i = 0; i < 5000; ++i) {
    const double gamma = g(rng);
    const auto drift = DriftModel::linear(a(rng));
    const int kk = k(rng);
    if (adversarial_drift(drift, kk, 1.0) < honest_restoration(gamma, kk, 1.0)) {
      ++hits;
      CHECK(rho_max_conservative(gamma, drift, kk) > 0.5);
    }
  }
  CHECK(hits > 300);
}

TEST_CASE("expected turn drift") {
  auto cfg = StabilityConfig::stochastic(params(0.03, 0.004), 100, 0.6);
  CHECK(expected_turn_drift(cfg) == Approx(-0.086598).epsilon(1e-5));
  cfg.rho = 0.0;
  CHECK(expected_turn_drift(cfg) == Approx(-honest_restoration(0.03, 100, 1.0)));
  cfg.rho = rho_max_conservative(0.03, kPaperDrift, 100);
  CHECK(std::abs(expected_turn_drift(cfg)) < 1e-9);
  // Affine in rho.
  cfg.rho = 0.2;
  const double d2 = expected_turn_drift(cfg);
  cfg.rho = 0.4;
  const double d4 = expected_turn_drift(cfg);
  cfg.rho = 0.6;
  CHECK(expected_turn_drift(cfg) - d4 == Approx(d4 - d2).epsilon(1e-12));
}

TEST_CASE("simulate_cycles reference runs") {
  Rng rng(1);
  const auto p = params(0.03, 0.004);
  const auto conv = simulate_cycles(StabilityConfig::deterministic(p, 100, 3, 5), 10000, rng);
  CHECK(conv.verdict == Verdict::converged);
  // One cycle: 0.97^200 * 1.004^300 = 0.0074896.
  CHECK(conv.verdict_turn == 5);
  CHECK(conv.final_v() == Approx(0.0074896).epsilon(1e-6));

  const auto div = simulate_cycles(StabilityConfig::deterministic(p, 100, 19, 20), 10000, rng);
  CHECK(div.verdict == Verdict::diverged);

  const auto clean = simulate_cycles(StabilityConfig::stochastic(p, 10, 0.0), 10000, rng);
  CHECK(clean.verdict == Verdict::converged);
  for (std::size_t i = 1; i < clean.samples.size(); ++i) CHECK(clean.samples[i].v < clean.samples[i - 1].v);
}

TEST_CASE("undecided is reported, not coerced") {
  Rng rng(1);
  const auto t = simulate_cycles(StabilityConfig::deterministic(params(0.03, 0.004), 1, 1, 2), 4, rng);
  CHECK(t.verdict == Verdict::undecided);
  CHECK(t.verdict_turn == 4);
  CHECK(std::string(to_string(t.verdict)) == "undecided");
}

TEST_CASE("trace samples are ordered and non-negative") {
  Rng rng(2);
  OperatorParams p = params(0.05, 0.01);
  p.noise_scale = 0.5;
  const auto t = simulate_cycles(StabilityConfig::stochastic(p, 20, 0.5), 5000, rng);
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    CHECK(t.samples[i].v >= 0.0);
    CHECK(t.samples[i].turn == static_cast<std::int64_t>(i));
  }
}

TEST_CASE("deterministic cycles are order independent") {
  const auto p = params(0.02, 0.006);
  for (int c = 0; c <= 7; ++c) {
    Rng a(10 + c);
    Rng b(99 + c);
    const auto canon = simulate_cycles(StabilityConfig::deterministic(p, 30, c, 7, 1.0, false), 700, a);
    const auto shuf = simulate_cycles(StabilityConfig::deterministic(p, 30, c, 7, 1.0, true), 700, b);
    CAPTURE(c);
    CHECK(canon.verdict == shuf.verdict);
    CHECK(canon.verdict_turn == shuf.verdict_turn);
    CHECK(canon.final_v() == Approx(shuf.final_v()).epsilon(1e-9));
  }
}

TEST_CASE("configuration validation") {
  const auto p = params(0.03, 0.004);
  CHECK_THROWS_AS(StabilityConfig::deterministic(p, 100, 6, 5), std::invalid_argument);
  CHECK_THROWS_AS(StabilityConfig::deterministic(p, 0, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(StabilityConfig::stochastic(p, 10, 1.5), std::invalid_argument);
  auto cfg = StabilityConfig::deterministic(p, 100, 2, 5);
  cfg.rho = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(StabilityConfig::deterministic(p, 100, 2, 5).cycle_length() == 5);
  CHECK(StabilityConfig::stochastic(p, 100, 0.3).cycle_length() == 1);
}

TEST_CASE("phase sweep, deterministic schedule: sufficiency for every K") {
  SweepSpec spec;
  spec.k_list = {1, 10, 30, 100, 300};
  spec.rho_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  spec.trials = 20;
  spec.deterministic_n = 5;
  spec.seed = 3;
  const auto cells = phase_sweep(spec);
  CHECK(cells.size() == 30);
  for (const auto& c : cells) {
    CAPTURE(c.k);
    CAPTURE(c.rho);
    if (c.rho <= c.rho_max) CHECK(c.frac_converged == 1.0);
    if (c.rho > c.rho_crit + 0.02) CHECK(c.frac_converged <= 0.05);
  }
}

TEST_CASE("phase sweep, stochastic schedule at K = 1") {
  SweepSpec spec;
  spec.k_list = {1};
  spec.rho_grid = {0.5, 0.8, 0.86, 0.91, 0.95};
  spec.trials = 200;
  spec.max_turns = 100000;
  spec.seed = 4;
  for (const auto& c : phase_sweep(spec)) {
    CAPTURE(c.rho);
    if (c.rho <= c.rho_max) CHECK(c.frac_converged >= 0.95);
    if (c.rho > c.rho_crit + 0.02) CHECK(c.frac_converged <= 0.05);
  }
}

TEST_CASE("phase sweep output") {
  SweepSpec spec;
  spec.k_list = {10};
  spec.rho_grid = {0.2};
  spec.trials = 3;
  std::ostringstream os;
  write_sweep_tsv(os, phase_sweep(spec));
  CHECK(os.str() == "K\trho\tfrac_converged\trho_max\trho_crit\n10\t0.2\t1\t0.86572\t0.884125\n");

  SweepSpec bad = spec;
  bad.deterministic_n = 5;
  bad.rho_grid = {0.3};
  CHECK_THROWS_AS(phase_sweep(bad), std::invalid_argument);
  bad.rho_grid.clear();
  CHECK_THROWS_AS(phase_sweep(bad), std::invalid_argument);
}

TEST_CASE("sweep is reproducible and worker-count independent") {
  SweepSpec spec;
  spec.k_list = {1, 10};
  spec.rho_grid = {0.85, 0.88};
  spec.trials = 30;
  spec.seed = 77;
  spec.workers = 1;
  const auto a = phase_sweep(spec);
  spec.workers = 4;
  const auto b = phase_sweep(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frac_converged == b[i].frac_converged);
    CHECK(a[i].frac_diverged == b[i].frac_diverged);
  }
}
