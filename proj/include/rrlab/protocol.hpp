#pragma once

// Aggregation protocols: independent generation + plurality (MAJ), the
// shared-trajectory round-robin relay (RR) and its multi-shot vote (RRMaj).

#include <vector>

#include "rrlab/agents.hpp"
#include "rrlab/answer.hpp"
#include "rrlab/random.hpp"
#include "rrlab/types.hpp"

namespace rrlab {

struct EnsembleConfig {
  int n = 5;
  int corrupt_count = 0;
  int k = 100;
  /// Shots for RRMaj; 0 means m = n.
  int m = 0;
  int l = 3000;
  PayloadTier payload_tier = PayloadTier::none;
  /// One spec per slot. Canonical assignment: slots [0, c) corrupt.
  std::vector<AgentSpec> agent_specs;
  double initial_potential = 1.0;
  TiePolicy tie_policy = TiePolicy::seeded_uniform;
  /// Shuffle the slot order once per trajectory.
  bool permute_slots = false;

  double rho() const { return static_cast<double>(corrupt_count) / n; }
  int shots() const { return m > 0 ? m : n; }
  void validate() const;

  /// n slots with the canonical assignment: `corrupt` copies of corrupt_kind
  /// followed by n - corrupt copies of honest_kind.
  static EnsembleConfig canonical(int n, int corrupt, const AgentKind& honest_kind,
                                  const AgentKind& corrupt_kind);
};

struct IndependentResult {
  Answer answer;
  Trajectory transcript;
};

/// One agent generating the whole budget alone, in K-token chunks, from its
/// private context. Corrupt agents see the payload; honest agents never do.
IndependentResult run_independent(const AgentSpec& agent, const Task& task, PayloadTier tier,
                                  int l, int k, double v0, Rng& rng, int shot = 0, int slot = 0);

struct MajResult {
  VoteOutcome outcome;
  std::vector<IndependentResult> runs;
};

MajResult run_maj(const EnsembleConfig& ensemble, const Task& task, Rng& rng, int shot = 0);

/// Slot r mod N appends exactly K tokens per turn until the budget L is spent
/// or a chunk carries an answer marker. A generation failure aborts the
/// trajectory and keeps the partial chunks.
Trajectory run_rr_trajectory(const EnsembleConfig& ensemble, const Task& task, Rng& rng,
                             int shot = 0);

struct RRMajResult {
  VoteOutcome outcome;
  std::vector<Trajectory> trajectories;
};

/// ensemble.shots() trajectories drawn sequentially from `rng`, so shot 0 is
/// exactly run_rr_trajectory(ensemble, task, rng).
RRMajResult run_rrmaj(const EnsembleConfig& ensemble, const Task& task, Rng& rng);

/// Role of the last chunk's agent. Throws std::invalid_argument when empty.
Role attribute_final_speaker(const Trajectory& trajectory);

/// Private contexts handed to each seat; exposed so callers can audit role
/// separation.
std::vector<std::string> private_contexts(const EnsembleConfig& ensemble, const Task& task);

}  // namespace rrlab
