#pragma once

// Experiment plans, the configuration grid runner, the M-scaling study and
// report emission.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rrlab/aggregation.hpp"
#include "rrlab/protocol.hpp"
#include "rrlab/records.hpp"
#include "rrlab/stability.hpp"

namespace rrlab {

enum class Method { maj, rr, rrmaj };
std::string_view to_string(Method m);  // "MAJ", "RR", "RRMaj"
Method parse_method(std::string_view s);

struct GridRow {
  int corrupt = 0;
  int honest = 0;

  std::string name() const { return config_name(corrupt, honest); }
  double rho() const { return static_cast<double>(corrupt) / (corrupt + honest); }
  auto operator<=>(const GridRow&) const = default;
};

/// 0c<n>t, 1c<n-1>t, ..., <n>c0t.
std::vector<GridRow> canonical_grid(int n);

struct TaskSource {
  /// Synthetic tasks unless `path` is set.
  int synthetic_count = 128;
  std::uint64_t synthetic_seed = 0;
  std::filesystem::path path;
};

struct ScalingSpec {
  int m_star = 50;
  std::vector<int> m_list{1, 5, 10, 20, 30, 40};
  int trials = 200;
};

struct ExperimentPlan {
  std::string name = "experiment";
  /// Template for every row: corrupt_count and agent_specs are rebuilt from
  /// the grid row and the two agent kinds.
  EnsembleConfig ensemble;
  AgentKind honest_kind = ScriptedAgent{};
  AgentKind corrupt_kind = ScriptedAgent{};
  std::vector<GridRow> grid;
  TaskSource tasks;
  std::set<Method> methods{Method::maj, Method::rr, Method::rrmaj};
  /// Empty: run_experiment writes nothing.
  std::filesystem::path output_dir;
  bool dump_trajectories = true;
  std::uint64_t root_seed = 0;
  ScalingSpec scaling;
  /// Optional stability sweep settings carried by the same config file.
  std::optional<SweepSpec> sweep;
  /// Hash of the canonical configuration text; empty for programmatic plans.
  std::string config_hash;
  unsigned workers = 0;

  bool has(Method m) const { return methods.count(m) > 0; }
  EnsembleConfig ensemble_for(const GridRow& row) const;
  /// Throws std::invalid_argument on an unusable plan.
  void validate() const;
  std::string agent_kinds() const;
};

/// Config file sections: name, seed, ensemble, grid, agents, payloads,
/// tasks, methods, output, scaling, stability. Unknown keys anywhere are
/// errors. Relative paths resolve against `base_dir`.
ExperimentPlan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Deterministic synthetic four-option tasks (labels A-D) with distinct
/// correct and distractor labels.
std::vector<Task> generate_tasks(int count, std::uint64_t seed);
std::vector<Task> resolve_tasks(const TaskSource& source);

struct MethodCell {
  int correct = 0;
  /// Tasks that completed; failed (row, task) units are excluded.
  int total = 0;
  /// Individual answers that could not be resolved (aborted or no marker).
  int unresolved_answers = 0;
  /// Decisions with no resolved answer at all.
  int no_quorum = 0;
  /// Aborted trajectories and failed work units touching this cell.
  int failures = 0;

  int resolved() const { return total - no_quorum; }
  /// Percent of resolved decisions; nullopt when none resolved.
  std::optional<double> accuracy() const;
};

/// Final-speaker role against RR correctness over every RR trajectory in a
/// row: [[honest correct, honest wrong], [corrupt correct, corrupt wrong]].
struct FinalSpeakerTable {
  long honest_correct = 0;
  long honest_wrong = 0;
  long corrupt_correct = 0;
  long corrupt_wrong = 0;
  /// Two-tailed Fisher p-value; nullopt when a margin is zero.
  std::optional<double> p_value;
};

struct RowReport {
  GridRow row;
  std::map<Method, MethodCell> cells;
  /// RRMaj accuracy minus MAJ accuracy in percentage points, when both ran.
  std::optional<double> delta;
  FinalSpeakerTable final_speaker;
  int failed_tasks = 0;
  std::vector<std::string> failure_messages;
};

struct ExperimentReport {
  std::string name;
  std::uint64_t root_seed = 0;
  std::string config_hash;
  std::string build_id;
  std::string agent_kinds;
  TiePolicy tie_policy = TiePolicy::seeded_uniform;
  std::set<Method> methods;
  int task_count = 0;
  std::vector<RowReport> rows;
  std::optional<AsymmetricYield> yield;
  std::vector<OutcomeRecord> outcomes;

  const RowReport* find(std::string_view config) const;
};

/// Every (row, task) unit runs on its own derived seeds, so results do not
/// depend on scheduling. Writes outcomes, trajectory dumps and reports into
/// plan.output_dir when set.
ExperimentReport run_experiment(const ExperimentPlan& plan);
ExperimentReport run_experiment(const ExperimentPlan& plan, const std::vector<Task>& tasks);

/// Recomputes a report from outcome records (as written by run_experiment).
ExperimentReport analyze_outcomes(const std::vector<OutcomeRecord>& outcomes);

struct ScalingCurve {
  std::string config;
  Method method = Method::maj;
  /// Pooled per-shot accuracy of the underlying pool.
  double pool_accuracy = 0.0;
  std::vector<ScalingPoint> points;
  /// MAJ only: weighted per-role accuracy standing in for M = 1.
  std::optional<double> m1_anchor;
};

/// m_star independent outcomes per task. MAJ pools take shot s from slot
/// s mod n; RRMaj pools hold RR trajectory answers.
ScalingPool build_scaling_pool(const ExperimentPlan& plan, const GridRow& row, Method method,
                               const std::vector<Task>& tasks);

/// Bootstraps each M in m_list for MAJ and RRMaj on every grid row. Throws
/// std::invalid_argument when an M exceeds m_star.
std::vector<ScalingCurve> scaling_study(const ExperimentPlan& plan, const std::vector<Task>& tasks);

std::string build_id();
std::string provenance_line(std::uint64_t root_seed, std::string_view config_hash);

/// Table-layout markdown: a wide Ceiling | per-config MAJ/RRMaj/delta |
/// Floor table, a long per-cell table, the asymmetric-yield block and the
/// final-speaker tests.
std::string render_markdown(const ExperimentReport& report);
/// One row per (config, method).
std::string render_csv(const ExperimentReport& report);
std::string render_scaling_tsv(const std::vector<ScalingCurve>& curves, std::uint64_t root_seed,
                               std::string_view config_hash);

enum class ReportFormat { markdown_table, csv };
/// Writes report.md and/or report.csv into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats = {
                                                   ReportFormat::markdown_table, ReportFormat::csv});

}  // namespace rrlab
