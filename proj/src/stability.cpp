#include "rrlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "rrlab/parallel.hpp"

namespace rrlab {

double honest_restoration(double gamma_h, int k, double v0) {
  if (!(gamma_h > 0.0 && gamma_h < 1.0))
    throw std::invalid_argument("honest_restoration: gamma_h must lie in (0,1)");
  if (k < 0) throw std::invalid_argument("honest_restoration: k must be >= 0");
  return -std::expm1(k * std::log1p(-gamma_h)) * v0;
}

double adversarial_drift(const DriftModel& drift, int k, double v0) {
  if (k < 0) throw std::invalid_argument("adversarial_drift: k must be >= 0");
  if (drift.is_linear()) return std::expm1(k * std::log1p(drift.alpha())) * v0;
  double v = v0;
  for (int i = 0; i < k; ++i) v += drift(v);
  return v - v0;
}

double rho_max_conservative(double gamma_h, const DriftModel& drift, int k, double v0) {
  if (k < 1) throw std::invalid_argument("rho_max_conservative: k must be >= 1");
  if (!(v0 > 0.0)) throw std::invalid_argument("rho_max_conservative: v0 must be > 0");
  const double restore = honest_restoration(gamma_h, k, v0);
  const double push = adversarial_drift(drift, k, v0);
  return restore / (restore + push);
}

double rho_crit_exact(double gamma_h, double alpha) {
  if (!(gamma_h > 0.0 && gamma_h < 1.0))
    throw std::invalid_argument("rho_crit_exact: gamma_h must lie in (0,1)");
  if (!(alpha > 0.0))
    throw std::invalid_argument("rho_crit_exact: alpha must be > 0 (zero drift has no threshold)");
  const double pull = -std::log1p(-gamma_h);
  return pull / (pull + std::log1p(alpha));
}

StabilityConfig StabilityConfig::deterministic(OperatorParams params, int k, int corrupt, int n,
                                               double v0, bool shuffle) {
  StabilityConfig cfg;
  cfg.params = std::move(params);
  cfg.k = k;
  cfg.v0 = v0;
  cfg.rho = n > 0 ? static_cast<double>(corrupt) / n : 0.0;
  cfg.schedule = DeterministicSchedule{corrupt, n, shuffle};
  cfg.validate();
  return cfg;
}

StabilityConfig StabilityConfig::stochastic(OperatorParams params, int k, double rho, double v0) {
  StabilityConfig cfg;
  cfg.params = std::move(params);
  cfg.k = k;
  cfg.v0 = v0;
  cfg.rho = rho;
  cfg.schedule = StochasticSchedule{};
  cfg.validate();
  return cfg;
}

void StabilityConfig::validate() const {
  params.validate();
  if (k < 1) throw std::invalid_argument("StabilityConfig: k must be >= 1");
  if (!(v0 > 0.0)) throw std::invalid_argument("StabilityConfig: v0 must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("StabilityConfig: rho must lie in [0,1]");
  if (!(divergence_factor > 1.0))
    throw std::invalid_argument("StabilityConfig: divergence_factor must be > 1");
  if (const auto* det = std::get_if<DeterministicSchedule>(&schedule)) {
    if (det->n < 1 || det->corrupt < 0 || det->corrupt > det->n)
      throw std::invalid_argument("StabilityConfig: deterministic schedule needs 0 <= c <= n, n >= 1");
    if (std::abs(rho - static_cast<double>(det->corrupt) / det->n) > 1e-12)
      throw std::invalid_argument("StabilityConfig: deterministic schedule requires rho = c/n");
  }
}

int StabilityConfig::cycle_length() const {
  if (const auto* det = std::get_if<DeterministicSchedule>(&schedule)) return det->n;
  return 1;
}

double expected_turn_drift(const StabilityConfig& cfg) {
  const double restore = honest_restoration(cfg.params.gamma_h, cfg.k, cfg.v0);
  const double push = adversarial_drift(cfg.params.drift, cfg.k, cfg.v0);
  return (1.0 - cfg.rho) * -restore + cfg.rho * push;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    case Verdict::undecided: return "undecided";
  }
  return "?";
}

PotentialTrace simulate_cycles(const StabilityConfig& cfg, std::int64_t max_turns, Rng& rng) {
  cfg.validate();
  if (max_turns < 1) throw std::invalid_argument("simulate_cycles: max_turns must be >= 1");

  PotentialTrace trace;
  const auto* det = std::get_if<DeterministicSchedule>(&cfg.schedule);
  if (det) {
    trace.slot_roles.assign(det->n, false);
    std::fill_n(trace.slot_roles.begin(), det->corrupt, true);
    if (det->shuffle) std::shuffle(trace.slot_roles.begin(), trace.slot_roles.end(), rng);
  }
  std::bernoulli_distribution corrupt_draw(cfg.rho);

  const int cycle = cfg.cycle_length();
  const double v_success = cfg.params.frame.v_success();
  const double v_blowup = cfg.divergence_factor * cfg.v0;

  PotentialState state{cfg.v0, 0};
  trace.samples.push_back({0, state.v});
  trace.verdict_turn = max_turns;
  for (std::int64_t turn = 0; turn < max_turns; ++turn) {
    const bool corrupt =
        det ? trace.slot_roles[static_cast<std::size_t>(turn % det->n)] : corrupt_draw(rng);
    for (int i = 0; i < cfg.k; ++i)
      state = corrupt ? corrupt_step(state, cfg.params, rng) : honest_step(state, cfg.params, rng);
    trace.samples.push_back({turn + 1, state.v});
    if ((turn + 1) % cycle != 0) continue;
    if (state.v <= v_success) {
      trace.verdict = Verdict::converged;
      trace.verdict_turn = turn + 1;
      break;
    }
    if (state.v >= v_blowup) {
      trace.verdict = Verdict::diverged;
      trace.verdict_turn = turn + 1;
      break;
    }
  }
  return trace;
}

std::vector<SweepCell> phase_sweep(const SweepSpec& spec) {
  if (spec.k_list.empty() || spec.rho_grid.empty())
    throw std::invalid_argument("phase_sweep: grids must be nonempty");
  if (spec.trials < 1) throw std::invalid_argument("phase_sweep: trials must be >= 1");

  OperatorParams params;
  params.gamma_h = spec.gamma_h;
  params.drift = DriftModel::linear(spec.alpha);
  params.frame = spec.frame;
  params.noise_scale = spec.noise_scale;
  params.validate();

  const double rho_crit = spec.alpha > 0.0 ? rho_crit_exact(spec.gamma_h, spec.alpha) : 1.0;
  std::vector<SweepCell> cells(spec.k_list.size() * spec.rho_grid.size());

  parallel_for(cells.size(), [&](std::size_t idx) {
    const std::size_t ki = idx / spec.rho_grid.size();
    const std::size_t ri = idx % spec.rho_grid.size();
    const int k = spec.k_list[ki];
    const double rho = spec.rho_grid[ri];

    StabilityConfig cfg;
    if (spec.deterministic_n) {
      const int n = *spec.deterministic_n;
      const int c = static_cast<int>(std::lround(rho * n));
      if (std::abs(static_cast<double>(c) / n - rho) > 1e-9)
        throw std::invalid_argument("phase_sweep: rho grid must be multiples of 1/n for a deterministic schedule");
      cfg = StabilityConfig::deterministic(params, k, c, n, spec.v0, true);
    } else {
      cfg = StabilityConfig::stochastic(params, k, rho, spec.v0);
    }

    int converged = 0;
    int diverged = 0;
    for (int t = 0; t < spec.trials; ++t) {
      Rng rng = derive_rng(spec.seed, "sweep", k, ri, t);
      const auto trace = simulate_cycles(cfg, spec.max_turns, rng);
      converged += trace.verdict == Verdict::converged;
      diverged += trace.verdict == Verdict::diverged;
    }
    SweepCell& cell = cells[idx];
    cell.k = k;
    cell.rho = rho;
    cell.frac_converged = static_cast<double>(converged) / spec.trials;
    cell.frac_diverged = static_cast<double>(diverged) / spec.trials;
    cell.rho_max = rho_max_conservative(spec.gamma_h, params.drift, k, spec.v0);
    cell.rho_crit = rho_crit;
  }, spec.workers);
  return cells;
}

void write_sweep_tsv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "K\trho\tfrac_converged\trho_max\trho_crit\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%d\t%.6g\t%.6g\t%.6g\t%.6g\n", c.k, c.rho, c.frac_converged,
                  c.rho_max, c.rho_crit);
    os << buf;
  }
}

}  // namespace rrlab
