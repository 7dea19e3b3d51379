#pragma once

// Closed-form stability bounds for the round-robin relay and their
// Monte-Carlo check.
//
// Over one K-token turn starting at potential v0, an honest agent restores at
// least R_H(K) = (1 - (1-gamma)^K) v0 and a worst-case corrupt agent adds
// DV_C(K) = sum_k delta(v_k). Expected per-turn drift is negative whenever
// rho < R_H / (R_H + DV_C), the conservative threshold rho_max(K).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "rrlab/latent.hpp"
#include "rrlab/random.hpp"

namespace rrlab {

double honest_restoration(double gamma_h, int k, double v0);
double adversarial_drift(const DriftModel& drift, int k, double v0);

/// R_H / (R_H + DV_C). Throws std::invalid_argument for k < 1.
double rho_max_conservative(double gamma_h, const DriftModel& drift, int k, double v0 = 1.0);

/// The corruption ratio at which the expected per-token log-potential change
/// vanishes under linear drift: ln(1/(1-g)) / (ln(1/(1-g)) + ln(1+a)).
/// This is the model's true threshold; rho_max_conservative never exceeds it.
/// Throws std::invalid_argument for alpha <= 0.
double rho_crit_exact(double gamma_h, double alpha);

/// Each turn's role is an independent Bernoulli(rho) draw.
struct StochasticSchedule {};

/// Fixed cyclic order of `corrupt` corrupt slots among `n`. Canonical order
/// puts the corrupt slots first; `shuffle` permutes the slots once per run.
struct DeterministicSchedule {
  int corrupt = 0;
  int n = 1;
  bool shuffle = false;
};

using Schedule = std::variant<StochasticSchedule, DeterministicSchedule>;

struct StabilityConfig {
  OperatorParams params;
  int k = 100;
  double v0 = 1.0;
  double rho = 0.0;
  Schedule schedule = StochasticSchedule{};
  /// Verdict: diverged once v >= divergence_factor * v0.
  double divergence_factor = 100.0;

  static StabilityConfig deterministic(OperatorParams params, int k, int corrupt, int n,
                                       double v0 = 1.0, bool shuffle = false);
  static StabilityConfig stochastic(OperatorParams params, int k, double rho, double v0 = 1.0);

  void validate() const;
  /// Turns between verdict checks: n for a deterministic cycle, 1 otherwise.
  int cycle_length() const;
};

double expected_turn_drift(const StabilityConfig& cfg);

enum class Verdict { converged, diverged, undecided };

const char* to_string(Verdict v);

struct PotentialTrace {
  struct Sample {
    std::int64_t turn = 0;
    double v = 0.0;
  };
  std::vector<Sample> samples;
  Verdict verdict = Verdict::undecided;
  /// Turn at which the verdict was reached (max_turns when undecided).
  std::int64_t verdict_turn = 0;
  /// Role order actually used by a deterministic schedule (true = corrupt).
  std::vector<bool> slot_roles;

  double final_v() const { return samples.back().v; }
};

/// Turn-by-turn relay dynamics. Each turn applies K single-token steps of the
/// drawn role. Verdicts are checked at cycle boundaries: converged when
/// v <= v_success, diverged when v >= divergence_factor * v0.
PotentialTrace simulate_cycles(const StabilityConfig& cfg, std::int64_t max_turns, Rng& rng);

struct SweepSpec {
  double gamma_h = 0.03;
  double alpha = 0.004;
  std::vector<int> k_list;
  std::vector<double> rho_grid;
  int trials = 200;
  std::int64_t max_turns = 20000;
  double v0 = 1.0;
  double noise_scale = 0.0;
  TruthFrame frame = TruthFrame::standard();
  /// nullopt: stochastic schedule. Otherwise the ensemble size n used for a
  /// shuffled deterministic schedule; every rho must then equal c/n.
  std::optional<int> deterministic_n;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

struct SweepCell {
  int k = 0;
  double rho = 0.0;
  double frac_converged = 0.0;
  double frac_diverged = 0.0;
  double rho_max = 0.0;
  double rho_crit = 0.0;
};

std::vector<SweepCell> phase_sweep(const SweepSpec& spec);

/// Tab-separated: header `K  rho  frac_converged  rho_max  rho_crit`, six
/// significant digits.
void write_sweep_tsv(std::ostream& os, const std::vector<SweepCell>& cells);

}  // namespace rrlab
