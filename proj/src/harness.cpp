#include "rrlab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rrlab/parallel.hpp"

namespace rrlab {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::maj: return "MAJ";
    case Method::rr: return "RR";
    case Method::rrmaj: return "RRMaj";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "maj") return Method::maj;
  if (lower == "rr") return Method::rr;
  if (lower == "rrmaj") return Method::rrmaj;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected MAJ, RR or RRMaj)");
}

std::vector<GridRow> canonical_grid(int n) {
  if (n < 1) throw std::invalid_argument("canonical_grid: n must be >= 1");
  std::vector<GridRow> rows;
  for (int c = 0; c <= n; ++c) rows.push_back({c, n - c});
  return rows;
}

EnsembleConfig ExperimentPlan::ensemble_for(const GridRow& row) const {
  EnsembleConfig e =
      EnsembleConfig::canonical(row.corrupt + row.honest, row.corrupt, honest_kind, corrupt_kind);
  e.k = ensemble.k;
  e.m = ensemble.m;
  e.l = ensemble.l;
  e.payload_tier = ensemble.payload_tier;
  e.initial_potential = ensemble.initial_potential;
  e.tie_policy = ensemble.tie_policy;
  e.permute_slots = ensemble.permute_slots;
  return e;
}

void ExperimentPlan::validate() const {
  if (grid.empty()) throw std::invalid_argument("plan: grid is empty");
  if (methods.empty()) throw std::invalid_argument("plan: no methods selected");
  std::set<GridRow> seen;
  for (const auto& row : grid) {
    if (row.corrupt < 0 || row.honest < 0 || row.corrupt + row.honest != ensemble.n)
      throw std::invalid_argument("plan: grid row " + row.name() + " does not sum to n = " +
                                  std::to_string(ensemble.n));
    if (!seen.insert(row).second) throw std::invalid_argument("plan: duplicate grid row " + row.name());
    ensemble_for(row).validate();
  }
  if (tasks.path.empty() && tasks.synthetic_count < 1)
    throw std::invalid_argument("plan: synthetic task count must be >= 1");
  if (scaling.m_star < 1) throw std::invalid_argument("plan: m_star must be >= 1");
  if (scaling.trials < 1) throw std::invalid_argument("plan: scaling trials must be >= 1");
  for (int m : scaling.m_list)
    if (m < 1 || m > scaling.m_star)
      throw std::invalid_argument("plan: scaling M = " + std::to_string(m) + " outside [1, m_star]");
}

std::string ExperimentPlan::agent_kinds() const {
  return "honest=" + std::string(AgentSpec{honest_kind, Role::honest}.kind_name()) +
         ", corrupt=" + std::string(AgentSpec{corrupt_kind, Role::corrupt}.kind_name());
}

std::vector<Task> generate_tasks(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_tasks: count must be >= 1");
  const std::vector<Label> labels{"A", "B", "C", "D"};
  std::vector<Task> tasks;
  tasks.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = derive_rng(seed, "task", i);
    std::uniform_int_distribution<int> operand(10, 99);
    std::uniform_int_distribution<int> offset(-20, 20);
    const int a = operand(rng);
    const int b = operand(rng);
    std::vector<int> values{a + b};
    while (values.size() < labels.size()) {
      const int v = a + b + offset(rng);
      if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
    }
    std::shuffle(values.begin(), values.end(), rng);
    const auto correct = static_cast<std::size_t>(
        std::find(values.begin(), values.end(), a + b) - values.begin());
    std::uniform_int_distribution<std::size_t> other(1, labels.size() - 1);
    const std::size_t distractor = (correct + other(rng)) % labels.size();

    char id[32];
    std::snprintf(id, sizeof id, "task-%04d", i);
    Task t;
    t.id = id;
    t.prompt = "What is " + std::to_string(a) + " + " + std::to_string(b) + "?";
    for (std::size_t j = 0; j < labels.size(); ++j)
      t.prompt += "\n(" + labels[j] + ") " + std::to_string(values[j]);
    t.options = labels;
    t.correct_label = labels[correct];
    t.distractor_label = labels[distractor];
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<Task> resolve_tasks(const TaskSource& source) {
  if (source.path.empty()) return generate_tasks(source.synthetic_count, source.synthetic_seed);
  std::ifstream in(source.path);
  if (!in) throw std::runtime_error("cannot open task file " + source.path.string());
  auto tasks = read_tasks(in);
  if (tasks.empty()) throw std::runtime_error("task file " + source.path.string() + " holds no tasks");
  return tasks;
}

std::optional<double> MethodCell::accuracy() const {
  if (resolved() == 0) return std::nullopt;
  return 100.0 * correct / resolved();
}

const RowReport* ExperimentReport::find(std::string_view config) const {
  for (const auto& r : rows)
    if (r.row.name() == config) return &r;
  return nullptr;
}

namespace {

struct UnitResult {
  std::optional<VoteOutcome> maj;
  int maj_unresolved = 0;
  int maj_aborted = 0;
  std::vector<Trajectory> rr;
  std::optional<VoteOutcome> rrmaj;
  std::string error;
};

UnitResult run_unit(const ExperimentPlan& plan, const EnsembleConfig& ens, const std::string& cfg,
                    const Task& task) {
  UnitResult u;
  try {
    if (plan.has(Method::maj)) {
      Rng rng = derive_rng(plan.root_seed, task.id, cfg, "maj", 0);
      const auto r = run_maj(ens, task, rng, 0);
      for (const auto& run : r.runs) {
        u.maj_unresolved += !run.answer.has_value();
        u.maj_aborted += run.transcript.aborted;
      }
      u.maj = r.outcome;
    }
    if (plan.has(Method::rr) || plan.has(Method::rrmaj)) {
      const int shots = plan.has(Method::rrmaj) ? ens.shots() : 1;
      std::vector<Answer> answers;
      for (int s = 0; s < shots; ++s) {
        Rng rng = derive_rng(plan.root_seed, task.id, cfg, "rr", s);
        u.rr.push_back(run_rr_trajectory(ens, task, rng, s));
        answers.push_back(u.rr.back().final_answer);
      }
      if (plan.has(Method::rrmaj)) {
        Rng vote_rng = derive_rng(plan.root_seed, task.id, cfg, "vote");
        u.rrmaj = plurality(answers, ens.tie_policy, vote_rng);
      }
    }
  } catch (const std::exception& e) {
    u.error = e.what();
  }
  return u;
}

void score_vote(MethodCell& cell, const VoteOutcome& v, const Label& correct) {
  ++cell.total;
  if (v.no_quorum()) ++cell.no_quorum;
  else cell.correct += *v.winner == correct;
}

// Delta, final-speaker p-values and the asymmetric yield once every cell is
// filled in.
void finish(ExperimentReport& rep) {
  std::map<std::string, double> deltas;
  for (auto& row : rep.rows) {
    auto& fs = row.final_speaker;
    const bool margins = fs.honest_correct + fs.honest_wrong > 0 &&
                         fs.corrupt_correct + fs.corrupt_wrong > 0 &&
                         fs.honest_correct + fs.corrupt_correct > 0 &&
                         fs.honest_wrong + fs.corrupt_wrong > 0;
    fs.p_value = margins ? std::optional(fisher_exact_2x2(fs.honest_correct, fs.honest_wrong,
                                                          fs.corrupt_correct, fs.corrupt_wrong))
                         : std::nullopt;
    const auto maj = row.cells.find(Method::maj);
    const auto rrmaj = row.cells.find(Method::rrmaj);
    row.delta.reset();
    if (maj != row.cells.end() && rrmaj != row.cells.end()) {
      const auto a = maj->second.accuracy();
      const auto b = rrmaj->second.accuracy();
      if (a && b) {
        row.delta = *b - *a;
        deltas[row.row.name()] = *row.delta;
      }
    }
  }
  rep.yield.reset();
  try {
    if (!deltas.empty()) rep.yield = asymmetric_yield(deltas);
  } catch (const std::invalid_argument&) {
  }
}

void write_artifacts(const ExperimentPlan& plan, const ExperimentReport& rep,
                     const std::vector<Task>& tasks, const std::vector<UnitResult>& units) {
  namespace fs = std::filesystem;
  fs::create_directories(plan.output_dir);
  const std::string prov = provenance_line(rep.root_seed, rep.config_hash);

  {
    std::ofstream out(plan.output_dir / "outcomes.tsv");
    out << "# " << prov << '\n';
    write_outcome_header(out);
    for (const auto& o : rep.outcomes) write_outcome(out, o);
  }

  if (plan.dump_trajectories) {
    for (std::size_t r = 0; r < plan.grid.size(); ++r) {
      const std::string cfg = plan.grid[r].name();
      bool any = false;
      for (std::size_t t = 0; t < tasks.size() && !any; ++t) any = !units[r * tasks.size() + t].rr.empty();
      if (!any) continue;
      std::ofstream out(plan.output_dir / ("trajectories_" + cfg + ".tsv"));
      out << "# " << prov << " config=" << cfg << '\n';
      out << "# task_id\tshot\tturn\tslot\trole\ttokens\tv_after\n";
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& u = units[r * tasks.size() + t];
        for (std::size_t s = 0; s < u.rr.size(); ++s) {
          write_trajectory_dump(out, u.rr[s], static_cast<int>(s));
          if (u.rr[s].aborted)
            out << "# aborted " << escape_field(tasks[t].id) << " shot " << s << ": "
                << escape_field(u.rr[s].error) << '\n';
        }
      }
    }
  }

  emit_report(rep, plan.output_dir);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  return run_experiment(plan, resolve_tasks(plan.tasks));
}

ExperimentReport run_experiment(const ExperimentPlan& plan, const std::vector<Task>& tasks) {
  plan.validate();
  if (tasks.empty()) throw std::invalid_argument("run_experiment: no tasks");
  for (const auto& t : tasks) t.validate();

  std::vector<EnsembleConfig> ensembles;
  for (const auto& row : plan.grid) ensembles.push_back(plan.ensemble_for(row));

  const std::size_t n_tasks = tasks.size();
  std::vector<UnitResult> units(plan.grid.size() * n_tasks);
  parallel_for(
      units.size(),
      [&](std::size_t i) {
        const std::size_t r = i / n_tasks;
        units[i] = run_unit(plan, ensembles[r], plan.grid[r].name(), tasks[i % n_tasks]);
      },
      plan.workers);

  ExperimentReport rep;
  rep.name = plan.name;
  rep.root_seed = plan.root_seed;
  rep.config_hash = plan.config_hash;
  rep.build_id = build_id();
  rep.agent_kinds = plan.agent_kinds();
  rep.tie_policy = plan.ensemble.tie_policy;
  rep.methods = plan.methods;
  rep.task_count = static_cast<int>(n_tasks);

  for (std::size_t r = 0; r < plan.grid.size(); ++r) {
    RowReport row;
    row.row = plan.grid[r];
    const std::string cfg = row.row.name();
    for (auto m : plan.methods) row.cells[m];

    for (std::size_t t = 0; t < n_tasks; ++t) {
      const auto& task = tasks[t];
      const auto& u = units[r * n_tasks + t];
      if (!u.error.empty()) {
        ++row.failed_tasks;
        for (auto& [m, cell] : row.cells) ++cell.failures;
        if (row.failure_messages.size() < 5) row.failure_messages.push_back(task.id + ": " + u.error);
        continue;
      }

      if (u.maj) {
        auto& cell = row.cells[Method::maj];
        score_vote(cell, *u.maj, task.correct_label);
        cell.unresolved_answers += u.maj_unresolved;
        cell.failures += u.maj_aborted;
        rep.outcomes.push_back({cfg, task.id, 0, "MAJ", std::nullopt, u.maj->winner, task.correct_label});
      }

      for (std::size_t s = 0; s < u.rr.size(); ++s) {
        const auto& traj = u.rr[s];
        const bool correct = traj.final_answer && *traj.final_answer == task.correct_label;
        std::optional<Role> speaker;
        if (!traj.chunks.empty()) {
          speaker = attribute_final_speaker(traj);
          auto& fs = row.final_speaker;
          if (*speaker == Role::honest) (correct ? fs.honest_correct : fs.honest_wrong)++;
          else (correct ? fs.corrupt_correct : fs.corrupt_wrong)++;
        }
        rep.outcomes.push_back({cfg, task.id, static_cast<int>(s), "RR", speaker, traj.final_answer,
                                task.correct_label});
        if (s == 0 && plan.has(Method::rr)) {
          auto& cell = row.cells[Method::rr];
          ++cell.total;
          cell.correct += correct;
          if (!traj.final_answer) {
            ++cell.unresolved_answers;
            ++cell.no_quorum;
          }
          cell.failures += traj.aborted;
        }
      }

      if (u.rrmaj) {
        auto& cell = row.cells[Method::rrmaj];
        score_vote(cell, *u.rrmaj, task.correct_label);
        for (const auto& traj : u.rr) {
          cell.unresolved_answers += !traj.final_answer.has_value();
          cell.failures += traj.aborted;
        }
        rep.outcomes.push_back({cfg, task.id, 0, "RRMaj", std::nullopt, u.rrmaj->winner, task.correct_label});
      }
    }
    rep.rows.push_back(std::move(row));
  }
  finish(rep);

  if (!plan.output_dir.empty()) write_artifacts(plan, rep, tasks, units);
  return rep;
}

ExperimentReport analyze_outcomes(const std::vector<OutcomeRecord>& outcomes) {
  ExperimentReport rep;
  rep.name = "analysis";
  rep.build_id = build_id();
  std::map<std::pair<int, int>, RowReport> rows;
  std::set<std::string> tasks;
  for (const auto& o : outcomes) {
    const auto [c, t] = parse_config_name(o.config);
    auto& row = rows[{c, t}];
    row.row = {c, t};
    tasks.insert(o.task_id);
    const Method m = parse_method(o.method);
    if (m == Method::rr) {
      if (o.final_role) {
        auto& fs = row.final_speaker;
        if (*o.final_role == Role::honest) (o.correct() ? fs.honest_correct : fs.honest_wrong)++;
        else (o.correct() ? fs.corrupt_correct : fs.corrupt_wrong)++;
      }
      if (o.shot != 0) continue;
    }
    rep.methods.insert(m);
    auto& cell = row.cells[m];
    ++cell.total;
    cell.correct += o.correct();
    if (!o.answer) {
      ++cell.no_quorum;
      if (m == Method::rr) ++cell.unresolved_answers;
    }
  }
  for (auto& [key, row] : rows) rep.rows.push_back(std::move(row));
  rep.task_count = static_cast<int>(tasks.size());
  rep.outcomes = outcomes;
  finish(rep);
  return rep;
}

ScalingPool build_scaling_pool(const ExperimentPlan& plan, const GridRow& row, Method method,
                               const std::vector<Task>& tasks) {
  if (method == Method::rr) throw std::invalid_argument("scaling pools exist for MAJ and RRMaj only");
  const EnsembleConfig ens = plan.ensemble_for(row);
  ens.validate();
  const std::string cfg = row.name();
  ScalingPool pool;
  pool.m_star = plan.scaling.m_star;
  pool.entries.resize(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t i) {
        const Task& task = tasks[i];
        PoolEntry& e = pool.entries[i];
        e.task_id = task.id;
        e.correct_label = task.correct_label;
        e.outcomes.resize(pool.m_star);
        for (int s = 0; s < pool.m_star; ++s) {
          if (method == Method::maj) {
            const int slot = s % ens.n;
            Rng rng = derive_rng(plan.root_seed, task.id, cfg, "maj-pool", s);
            e.outcomes[s] = run_independent(ens.agent_specs[slot], task, ens.payload_tier, ens.l, ens.k,
                                            ens.initial_potential, rng, s, slot)
                                .answer;
          } else {
            Rng rng = derive_rng(plan.root_seed, task.id, cfg, "rr", s);
            e.outcomes[s] = run_rr_trajectory(ens, task, rng, s).final_answer;
          }
        }
      },
      plan.workers);
  return pool;
}

std::vector<ScalingCurve> scaling_study(const ExperimentPlan& plan, const std::vector<Task>& tasks) {
  plan.validate();
  if (tasks.empty()) throw std::invalid_argument("scaling_study: no tasks");
  std::vector<ScalingCurve> curves;
  for (const auto& row : plan.grid) {
    for (Method method : {Method::maj, Method::rrmaj}) {
      if (!plan.has(method)) continue;
      const ScalingPool pool = build_scaling_pool(plan, row, method, tasks);
      ScalingCurve curve;
      curve.config = row.name();
      curve.method = method;
      curve.pool_accuracy = pool.empirical_accuracy();
      for (int m : plan.scaling.m_list) {
        Rng rng = derive_rng(plan.root_seed, curve.config, to_string(method), "bootstrap", m);
        curve.points.push_back(bootstrap_scaling(pool, m, plan.scaling.trials, plan.ensemble.tie_policy, rng));
      }
      if (method == Method::maj) {
        // Per-role rates: pool shot s came from slot s mod n.
        const EnsembleConfig ens = plan.ensemble_for(row);
        long hits[2] = {0, 0};
        long seen[2] = {0, 0};
        for (const auto& e : pool.entries)
          for (std::size_t s = 0; s < e.outcomes.size(); ++s) {
            const int r = ens.agent_specs[s % ens.n].role == Role::corrupt;
            ++seen[r];
            hits[r] += e.outcomes[s] && *e.outcomes[s] == e.correct_label;
          }
        const double p_t = seen[0] ? static_cast<double>(hits[0]) / seen[0] : 0.0;
        const double p_c = seen[1] ? static_cast<double>(hits[1]) / seen[1] : 0.0;
        curve.m1_anchor = maj_m1_expectation(row.corrupt, row.honest, p_c, p_t);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

}  // namespace rrlab
