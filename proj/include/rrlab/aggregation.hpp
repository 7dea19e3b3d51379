#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rrlab/random.hpp"
#include "rrlab/types.hpp"

namespace rrlab {

/// Plurality over resolved answers. Unresolved entries are counted but never
/// voted; an all-unresolved (or empty) input yields a no-quorum outcome.
/// seeded_uniform breaks ties with one uniform draw from `rng`;
/// lexicographic picks the smallest tied label.
VoteOutcome plurality(std::span<const Answer> answers, TiePolicy policy, Rng& rng);

/// Expected accuracy of one uniform draw from c corrupt and t truthful agents.
double maj_m1_expectation(int corrupt, int truthful, double p_corrupt_correct,
                          double p_truthful_correct);

/// P(plurality of m binary votes is correct) with per-vote accuracy p. An
/// even-m tie earns 1/2 under seeded_uniform; under lexicographic it is
/// scored as lost (the binary model carries no label order).
/// Extended precision for m <= 64, log-space beyond.
double condorcet_curve(double p, int m, TiePolicy policy = TiePolicy::seeded_uniform);

struct PoolEntry {
  std::string task_id;
  Label correct_label;
  std::vector<Answer> outcomes;
};

/// Recorded outcomes per task for one condition.
struct ScalingPool {
  int m_star = 50;
  std::vector<PoolEntry> entries;

  void validate() const;
  /// Fraction of resolved outcomes that are correct, pooled over tasks.
  double empirical_accuracy() const;
};

struct ScalingPoint {
  int m = 0;
  double mean = 0.0;
  /// Sample standard deviation of per-trial accuracy across trials.
  double std = 0.0;
  int trials = 0;
  /// Mean number of tasks per trial whose resample had no resolved answer.
  double mean_unresolved = 0.0;

  double standard_error() const;
};

/// Per trial: for each task draw m outcomes with replacement, take the
/// plurality, score it. Tasks without a quorum leave the denominator and are
/// counted in mean_unresolved.
ScalingPoint bootstrap_scaling(const ScalingPool& pool, int m, int trials, TiePolicy policy, Rng& rng);

/// Two-tailed Fisher exact test on [[a, b], [c, d]] using the
/// point-probability rule. Throws std::invalid_argument when a row or column
/// margin is zero.
double fisher_exact_2x2(long a, long b, long c, long d);

struct AsymmetricYield {
  double tax = 0.0;   // mean delta over rows with 0 < rho <= 0.4
  double gain = 0.0;  // mean delta over rows with 0.6 <= rho < 1
  int tax_rows = 0;
  int gain_rows = 0;
};

/// Keys are configuration names ("1c4t", ...). Throws std::invalid_argument
/// unless both row groups are represented.
AsymmetricYield asymmetric_yield(const std::map<std::string, double>& delta_rows);

}  // namespace rrlab
