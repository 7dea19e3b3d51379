#pragma once

// Line-oriented artifact formats. Tab-separated files may start with `#`
// comment lines (provenance); readers skip them.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rrlab/agents.hpp"
#include "rrlab/types.hpp"

namespace rrlab {

/// Backslash-escapes tab, newline, carriage return and backslash.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);
std::vector<std::string> split_tabs(std::string_view line);

/// `task_id  shot  turn  slot  role  tokens  v_after`, one chunk per line.
/// `tokens` is the chunk's token count; `v_after` is empty for agents that
/// carry no potential.
void write_trajectory_dump(std::ostream& os, const Trajectory& t, int shot);

struct DumpRow {
  std::string task_id;
  int shot = 0;
  int turn = 0;
  int slot = 0;
  Role role = Role::honest;
  int tokens = 0;
  std::optional<double> v_after;
};
std::vector<DumpRow> read_trajectory_dump(std::istream& is);

/// Chunk records (7 fields) and answers-only records (4 fields) may be mixed.
ReplayPool read_replay_pool(std::istream& is);
void write_replay_chunk(std::ostream& os, const ReplayChunkRecord& rec);
void write_replay_answer(std::ostream& os, const ReplayAnswerRecord& rec);

/// One JSON object per line: {id, prompt, options, correct_label, distractor_label}.
std::vector<Task> read_tasks(std::istream& is);
void write_tasks(std::ostream& os, const std::vector<Task>& tasks);

/// Per-decision outcome record used by the analysis commands:
/// `config  task_id  shot  method  final_role  answer  correct_label`.
/// final_role is `-` for voted decisions, which have no final speaker; an
/// empty answer is unresolved.
struct OutcomeRecord {
  std::string config;
  std::string task_id;
  int shot = 0;
  std::string method;
  std::optional<Role> final_role;
  Answer answer;
  Label correct_label;

  bool correct() const { return answer && *answer == correct_label; }
};
void write_outcome_header(std::ostream& os);
void write_outcome(std::ostream& os, const OutcomeRecord& rec);
std::vector<OutcomeRecord> read_outcomes(std::istream& is);

}  // namespace rrlab
