#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rrlab {

using Label = std::string;
/// nullopt marks an unresolved answer.
using Answer = std::optional<Label>;

enum class Role { honest, corrupt };
enum class PayloadTier { none, moderate, strong };
enum class TiePolicy { seeded_uniform, lexicographic };

std::string_view to_string(Role r);
std::string_view to_string(PayloadTier t);
std::string_view to_string(TiePolicy p);
Role parse_role(std::string_view s);
PayloadTier parse_payload_tier(std::string_view s);
TiePolicy parse_tie_policy(std::string_view s);

struct Task {
  std::string id;
  std::string prompt;
  std::vector<Label> options;
  Label correct_label;
  Label distractor_label;

  bool has_option(std::string_view label) const;
  /// Throws std::invalid_argument unless labels are unique, both designated
  /// labels are options, and they differ.
  void validate() const;
};

struct Chunk {
  int turn_index = 0;
  int agent_slot = 0;
  Role agent_role = Role::honest;
  std::string text;
  int token_count = 0;
  std::optional<double> v_after;
  std::vector<std::string> flags;
};

struct Trajectory {
  std::string task_id;
  double initial_potential = 1.0;
  std::vector<Chunk> chunks;
  Answer final_answer;
  Role final_speaker_role = Role::honest;
  bool aborted = false;
  std::string error;
  /// Transcript-level flags, e.g. a continuation fallback was used.
  std::vector<std::string> flags;

  int total_tokens() const;
  /// Potential after the last chunk that carried one, else the initial value.
  double current_potential() const;
  std::string text() const;
};

struct VoteOutcome {
  std::map<Label, int> counts;
  /// nullopt: no quorum (every answer unresolved).
  std::optional<Label> winner;
  bool tie = false;
  std::set<Label> tie_members;
  int unresolved = 0;
  TiePolicy policy = TiePolicy::seeded_uniform;

  bool no_quorum() const { return !winner.has_value(); }
};

/// "<c>c<t>t", e.g. 3c2t.
std::string config_name(int corrupt, int honest);
/// Parses "<c>c<t>t"; throws std::invalid_argument on malformed input.
std::pair<int, int> parse_config_name(std::string_view name);

}  // namespace rrlab
