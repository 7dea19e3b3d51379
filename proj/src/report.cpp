#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rrlab/harness.hpp"

#ifndef RRLAB_VERSION
#define RRLAB_VERSION "dev"
#endif

namespace rrlab {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pct(const MethodCell& cell) {
  const auto a = cell.accuracy();
  std::string s = a ? fmt("%.1f", *a) : "n/a";
  if (cell.failures > 0) s += " †";
  return s;
}

const MethodCell* cell_of(const RowReport& row, Method m) {
  const auto it = row.cells.find(m);
  return it == row.cells.end() ? nullptr : &it->second;
}

/// Single-column rows (Ceiling, Floor) show MAJ when it ran.
std::string single_value(const RowReport& row) {
  for (Method m : {Method::maj, Method::rrmaj, Method::rr})
    if (const auto* c = cell_of(row, m)) return pct(*c);
  return "n/a";
}

}  // namespace

std::string build_id() {
  std::string compiler = __VERSION__;
  std::replace(compiler.begin(), compiler.end(), ' ', '_');
#if defined(__clang__)
  return "rrlab-" RRLAB_VERSION "+clang-" + compiler;
#else
  return "rrlab-" RRLAB_VERSION "+gcc-" + compiler;
#endif
}

std::string provenance_line(std::uint64_t root_seed, std::string_view config_hash) {
  return "root_seed=" + std::to_string(root_seed) +
         " config_hash=" + (config_hash.empty() ? std::string("none") : std::string(config_hash)) +
         " build_id=" + build_id();
}

std::string render_markdown(const ExperimentReport& rep) {
  std::ostringstream md;
  const bool has_maj = rep.methods.count(Method::maj);
  const bool has_rrmaj = rep.methods.count(Method::rrmaj);

  md << "# " << rep.name << "\n\n";
  md << provenance_line(rep.root_seed, rep.config_hash) << "\n\n";
  if (!rep.agent_kinds.empty()) md << "Agents: " << rep.agent_kinds << ". ";
  md << "Tasks: " << rep.task_count << ".\n\n";
  md << "Accuracy is correct decisions over resolved decisions, in percent. Unresolved answers are "
        "left out of every vote; a decision with no resolved answer (no quorum) leaves the "
        "denominator and is counted separately. Ties: "
     << to_string(rep.tie_policy) << ".\n\n";

  // Wide table.
  const RowReport* ceiling = nullptr;
  const RowReport* floor = nullptr;
  std::vector<const RowReport*> middle;
  for (const auto& r : rep.rows) {
    if (r.row.corrupt == 0 && !ceiling) ceiling = &r;
    else if (r.row.honest == 0 && !floor) floor = &r;
    else middle.push_back(&r);
  }
  std::vector<std::string> head{"Agents"};
  std::vector<std::string> vals{rep.agent_kinds.empty() ? rep.name : rep.agent_kinds};
  if (ceiling) {
    head.push_back("Ceiling (" + ceiling->row.name() + ")");
    vals.push_back(single_value(*ceiling));
  }
  for (const auto* r : middle) {
    const std::string n = r->row.name();
    if (has_maj) {
      head.push_back(n + " MAJ");
      vals.push_back(cell_of(*r, Method::maj) ? pct(*cell_of(*r, Method::maj)) : "n/a");
    }
    if (has_rrmaj) {
      head.push_back(n + " RRMaj");
      vals.push_back(cell_of(*r, Method::rrmaj) ? pct(*cell_of(*r, Method::rrmaj)) : "n/a");
    }
    if (has_maj && has_rrmaj) {
      head.push_back(n + " Δ");
      vals.push_back(r->delta ? fmt("%+.1f", *r->delta) : "n/a");
    }
  }
  if (floor) {
    head.push_back("Floor (" + floor->row.name() + ")");
    vals.push_back(single_value(*floor));
  }
  md << "## Grid\n\n|";
  for (const auto& h : head) md << ' ' << h << " |";
  md << "\n|";
  for (std::size_t i = 0; i < head.size(); ++i) md << "---|";
  md << "\n|";
  for (const auto& v : vals) md << ' ' << v << " |";
  md << "\n\n";
  bool marked = false;
  for (const auto& r : rep.rows)
    for (const auto& [m, cell] : r.cells) marked = marked || cell.failures > 0;
  if (marked) md << "† cell includes failed or aborted work units; counts are in the table below.\n\n";

  // Long table.
  md << "## Cells\n\n";
  md << "| Config | ρ | Method | Accuracy (%) | Correct / Resolved | Tasks | Unresolved answers | No quorum | "
        "Failures | Δ |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    for (const auto& [m, cell] : r.cells) {
      md << "| " << r.row.name() << " | " << fmt("%.2f", r.row.rho()) << " | " << to_string(m) << " | "
         << (cell.accuracy() ? fmt("%.1f", *cell.accuracy()) : "n/a") << " | " << cell.correct << " / "
         << cell.resolved() << " | " << cell.total << " | " << cell.unresolved_answers << " | " << cell.no_quorum << " | "
         << cell.failures << " | " << (r.delta ? fmt("%+.1f", *r.delta) : "") << " |\n";
    }
  }
  md << '\n';

  md << "## Asymmetric yield\n\n";
  if (rep.yield) {
    md << "Tax (mean Δ over 0 < ρ ≤ 0.4, " << rep.yield->tax_rows << " rows): " << fmt("%+.2f", rep.yield->tax)
       << "\n\nGain (mean Δ over 0.6 ≤ ρ < 1, " << rep.yield->gain_rows
       << " rows): " << fmt("%+.2f", rep.yield->gain) << "\n\n";
  } else {
    md << "Not available: needs MAJ and RRMaj on rows at both ρ ≤ 0.4 and ρ ≥ 0.6.\n\n";
  }

  md << "## Final speaker (RR trajectories)\n\n";
  md << "| Config | Honest last, correct | Honest last, wrong | Corrupt last, correct | Corrupt last, wrong "
        "| Fisher p (two-tailed) |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    const auto& fs = r.final_speaker;
    if (fs.honest_correct + fs.honest_wrong + fs.corrupt_correct + fs.corrupt_wrong == 0) continue;
    md << "| " << r.row.name() << " | " << fs.honest_correct << " | " << fs.honest_wrong << " | "
       << fs.corrupt_correct << " | " << fs.corrupt_wrong << " | "
       << (fs.p_value ? fmt("%.4g", *fs.p_value) : "n/a") << " |\n";
  }
  md << '\n';

  bool any_failure = false;
  for (const auto& r : rep.rows) any_failure = any_failure || r.failed_tasks > 0;
  if (any_failure) {
    md << "## Failures\n\n";
    for (const auto& r : rep.rows) {
      if (r.failed_tasks == 0) continue;
      md << "- " << r.row.name() << ": " << r.failed_tasks << " task(s) failed\n";
      for (const auto& msg : r.failure_messages) md << "  - " << msg << '\n';
    }
    md << '\n';
  }
  return md.str();
}

std::string render_csv(const ExperimentReport& rep) {
  std::ostringstream csv;
  csv << "config,rho,method,accuracy,correct,resolved,total,unresolved_answers,no_quorum,failures,delta,"
         "root_seed,config_hash,build_id\n";
  const std::string hash = rep.config_hash.empty() ? "none" : rep.config_hash;
  for (const auto& r : rep.rows) {
    for (const auto& [m, cell] : r.cells) {
      csv << r.row.name() << ',' << fmt("%.6g", r.row.rho()) << ',' << to_string(m) << ','
          << (cell.accuracy() ? fmt("%.6g", *cell.accuracy()) : "") << ',' << cell.correct << ','
          << cell.resolved() << ',' << cell.total << ',' << cell.unresolved_answers << ',' << cell.no_quorum << ','
          << cell.failures << ',' << (r.delta ? fmt("%.6g", *r.delta) : "") << ',' << rep.root_seed
          << ',' << hash << ',' << build_id() << '\n';
    }
  }
  return csv.str();
}

std::string render_scaling_tsv(const std::vector<ScalingCurve>& curves, std::uint64_t root_seed,
                               std::string_view config_hash) {
  std::ostringstream out;
  out << "# " << provenance_line(root_seed, config_hash) << '\n';
  out << "config\tmethod\tM\tmean\tstd\tse\ttrials\tmean_unresolved\tpool_accuracy\tm1_anchor\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.config << '\t' << to_string(c.method) << '\t' << p.m << '\t' << fmt("%.6g", p.mean) << '\t'
          << fmt("%.6g", p.std) << '\t' << fmt("%.6g", p.standard_error()) << '\t' << p.trials << '\t'
          << fmt("%.6g", p.mean_unresolved) << '\t' << fmt("%.6g", c.pool_accuracy) << '\t'
          << (c.m1_anchor && p.m == 1 ? fmt("%.6g", *c.m1_anchor) : "") << '\n';
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  if (formats.count(ReportFormat::markdown_table)) {
    written.push_back(dir / "report.md");
    std::ofstream(written.back()) << render_markdown(report);
  }
  if (formats.count(ReportFormat::csv)) {
    written.push_back(dir / "report.csv");
    std::ofstream(written.back()) << render_csv(report);
  }
  return written;
}

}  // namespace rrlab
