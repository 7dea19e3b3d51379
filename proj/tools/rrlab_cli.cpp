// rrlab command-line front end: stability, run, scale, analyze, trinity.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rrlab/harness.hpp"
#include "rrlab/mechanism.hpp"
#include "rrlab/stability.hpp"

using namespace rrlab;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Root seed (overrides the config)");
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
}

ExperimentPlan plan_from(const Common& c, const CLI::App* cmd) {
  ExperimentPlan plan;
  if (!c.config.empty()) {
    plan = load_plan(c.config);
  } else {
    plan.grid = canonical_grid(plan.ensemble.n);
    plan.name = "default";
  }
  if (cmd->count("--seed")) plan.root_seed = c.seed;
  if (!c.out.empty()) plan.output_dir = c.out;
  plan.workers = c.workers;
  return plan;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  std::cerr << "wrote " << path.string() << '\n';
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-robin relay robustness lab"};
  app.set_version_flag("--version", build_id());
  app.require_subcommand(1);

  // stability
  Common st;
  double gamma_h = 0.03;
  double alpha = 0.004;
  double v0 = 1.0;
  double noise = 0.0;
  std::vector<int> k_list{1, 10, 30, 75, 100, 150, 300, 500};
  std::vector<double> rho_grid;
  int sweep_trials = 200;
  std::int64_t max_turns = 20000;
  int det_n = 0;
  auto* stability = app.add_subcommand("stability", "Stability bounds per K and an optional phase sweep");
  add_common(stability, st);
  stability->add_option("--gamma", gamma_h, "Honest contraction rate per token");
  stability->add_option("--alpha", alpha, "Linear drift coefficient");
  stability->add_option("--v0", v0, "Initial potential");
  stability->add_option("--k", k_list, "Chunk sizes");
  stability->add_option("--rho", rho_grid, "Corruption ratios to sweep (omit for bounds only)");
  stability->add_option("--trials", sweep_trials, "Simulations per sweep cell");
  stability->add_option("--max-turns", max_turns, "Turn cap per simulation");
  stability->add_option("--noise", noise, "Noise scale in [0,1]");
  stability->add_option("--deterministic-n", det_n, "Use a shuffled deterministic schedule of size n");

  // run
  Common rn;
  auto* run = app.add_subcommand("run", "Run the experiment grid and write reports");
  add_common(run, rn);

  // scale
  Common sc;
  std::vector<int> m_list;
  int scale_trials = 0;
  auto* scale = app.add_subcommand("scale", "Bootstrap accuracy against shot count M");
  add_common(scale, sc);
  scale->add_option("--m", m_list, "Shot counts (default from config)");
  scale->add_option("--trials", scale_trials, "Bootstrap trials (default from config)");

  // analyze
  Common an;
  std::vector<std::string> outcome_files;
  std::vector<std::string> delta_rows;
  std::vector<long> fisher;
  auto* analyze = app.add_subcommand("analyze", "Recompute accuracies, yield and final-speaker tests");
  add_common(analyze, an);
  analyze->add_option("outcomes", outcome_files, "outcomes.tsv files written by `run`");
  analyze->add_option("--delta", delta_rows, "Δ row as CONFIG=VALUE, e.g. 1c4t=+0.6");
  analyze->add_option("--fisher", fisher, "2x2 table a b c d")->expected(4);

  // trinity
  Common tr;
  int n_agents = 5;
  int mc_trials = 20000;
  int random_count = 200;
  auto* trinity = app.add_subcommand("trinity", "Check outcome-level mechanisms for double robustness");
  add_common(trinity, tr);
  trinity->add_option("--n", n_agents, "Ensemble size");
  trinity->add_option("--trials", mc_trials, "Monte-Carlo draws per profile");
  trinity->add_option("--random", random_count, "Random symmetric mechanisms to check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stability) {
      SweepSpec spec;
      if (!st.config.empty()) {
        const auto plan = load_plan(st.config);
        if (plan.sweep) spec = *plan.sweep;
        spec.seed = plan.root_seed;
      }
      if (stability->count("--gamma") || st.config.empty()) spec.gamma_h = gamma_h;
      if (stability->count("--alpha") || st.config.empty()) spec.alpha = alpha;
      if (stability->count("--v0") || st.config.empty()) spec.v0 = v0;
      if (stability->count("--k") || spec.k_list.empty()) spec.k_list = k_list;
      if (stability->count("--rho")) spec.rho_grid = rho_grid;
      else if (st.config.empty()) spec.rho_grid.clear();
      if (stability->count("--trials")) spec.trials = sweep_trials;
      if (stability->count("--max-turns")) spec.max_turns = max_turns;
      if (stability->count("--noise")) spec.noise_scale = noise;
      if (det_n > 0) spec.deterministic_n = det_n;
      if (stability->count("--seed")) spec.seed = st.seed;
      spec.workers = st.workers;

      const auto drift = DriftModel::linear(spec.alpha);
      std::ostringstream bounds;
      bounds << "K\tR_H\tdV_C\trho_max\trho_crit\n";
      for (int k : spec.k_list)
        bounds << k << '\t' << g6(honest_restoration(spec.gamma_h, k, spec.v0)) << '\t'
               << g6(adversarial_drift(drift, k, spec.v0)) << '\t'
               << g6(rho_max_conservative(spec.gamma_h, drift, k, spec.v0)) << '\t'
               << g6(rho_crit_exact(spec.gamma_h, spec.alpha)) << '\n';
      std::cout << bounds.str();
      if (!st.out.empty()) write_file(fs::path(st.out) / "bounds.tsv", bounds.str());

      if (!spec.rho_grid.empty()) {
        std::ostringstream sweep;
        write_sweep_tsv(sweep, phase_sweep(spec));
        std::cout << '\n' << sweep.str();
        if (!st.out.empty()) write_file(fs::path(st.out) / "sweep.tsv", sweep.str());
      }
      return 0;
    }

    if (*run) {
      const auto plan = plan_from(rn, run);
      const auto report = run_experiment(plan);
      std::cout << render_markdown(report);
      if (!plan.output_dir.empty()) std::cerr << "artifacts in " << plan.output_dir.string() << '\n';
      return 0;
    }

    if (*scale) {
      auto plan = plan_from(sc, scale);
      if (!m_list.empty()) plan.scaling.m_list = m_list;
      if (scale_trials > 0) plan.scaling.trials = scale_trials;
      const auto curves = scaling_study(plan, resolve_tasks(plan.tasks));
      const auto text = render_scaling_tsv(curves, plan.root_seed, plan.config_hash);
      std::cout << text;
      if (!plan.output_dir.empty()) write_file(plan.output_dir / "scaling.tsv", text);
      return 0;
    }

    if (*analyze) {
      if (outcome_files.empty() && delta_rows.empty() && fisher.empty())
        throw CLI::ValidationError("analyze", "give outcome files, --delta rows or --fisher");
      if (!delta_rows.empty()) {
        std::map<std::string, double> rows;
        for (const auto& d : delta_rows) {
          const auto eq = d.find('=');
          if (eq == std::string::npos) throw std::invalid_argument("--delta expects CONFIG=VALUE: " + d);
          rows[d.substr(0, eq)] = std::stod(d.substr(eq + 1));
        }
        const auto y = asymmetric_yield(rows);
        std::printf("tax\t%+.2f\t(%d rows)\ngain\t%+.2f\t(%d rows)\n", y.tax, y.tax_rows, y.gain,
                    y.gain_rows);
      }
      if (!fisher.empty()) {
        std::printf("fisher_p\t%.7g\n", fisher_exact_2x2(fisher[0], fisher[1], fisher[2], fisher[3]));
      }
      if (!outcome_files.empty()) {
        std::vector<OutcomeRecord> all;
        for (const auto& f : outcome_files) {
          std::ifstream in(f);
          if (!in) throw std::runtime_error("cannot open " + f);
          auto recs = read_outcomes(in);
          all.insert(all.end(), recs.begin(), recs.end());
        }
        auto report = analyze_outcomes(all);
        report.root_seed = an.seed;
        std::cout << render_markdown(report);
        if (!an.out.empty()) emit_report(report, an.out);
      }
      return 0;
    }

    if (*trinity) {
      TiePolicy policy = TiePolicy::seeded_uniform;
      if (!tr.config.empty()) {
        const auto plan = load_plan(tr.config);
        if (!trinity->count("--n")) n_agents = plan.ensemble.n;
        policy = plan.ensemble.tie_policy;
        if (!trinity->count("--seed")) tr.seed = plan.root_seed;
      }
      Rng rng = derive_rng(tr.seed, "trinity");
      std::vector<std::unique_ptr<Mechanism>> named;
      named.push_back(std::make_unique<PluralityMechanism>(policy));
      named.push_back(std::make_unique<RandomDictatorMechanism>());
      named.push_back(std::make_unique<ConstantMechanism>(kTruthLabel));

      std::ostringstream out;
      out << "mechanism\tn\texact\tsymmetric\tp_correct_minority\tp_correct_slight_majority\t"
             "robust_minority\trobust_slight_majority\ttrinity_holds\n";
      auto row = [&](const TrinityReport& r) {
        out << r.mechanism << '\t' << r.n << '\t' << r.exact << '\t' << r.symmetric_ok << '\t'
            << g6(r.p_correct_minority) << '\t' << g6(r.p_correct_slight_majority) << '\t'
            << r.robust_minority << '\t' << r.robust_slight_majority << '\t'
            << (r.trinity_holds ? (*r.trinity_holds ? "1" : "0") : "withheld") << '\n';
      };
      for (const auto& m : named) row(trinity_check(*m, n_agents, mc_trials, rng));

      int double_robust = 0;
      int withheld = 0;
      for (const auto& m : random_symmetric_mechanisms(random_count, n_agents, rng)) {
        const auto r = trinity_check(*m, n_agents, mc_trials, rng);
        if (!r.trinity_holds) ++withheld;
        else if (!*r.trinity_holds) ++double_robust;
      }
      out << "# random symmetric mechanisms: " << random_count << " checked, " << double_robust
          << " double-robust, " << withheld << " withheld\n";
      std::cout << out.str();
      if (!tr.out.empty()) write_file(fs::path(tr.out) / "trinity.tsv", out.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
