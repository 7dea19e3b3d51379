#include "rrlab/records.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace rrlab {

namespace {

int to_int(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed " + std::string(what) + ": '" + s + "'");
  }
}

bool skip_line(const std::string& line) { return line.empty() || line.front() == '#'; }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '\\': out += '\\'; break;
      default:
        out += '\\';
        out += s[i];
    }
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

void write_trajectory_dump(std::ostream& os, const Trajectory& t, int shot) {
  for (const auto& c : t.chunks) {
    os << escape_field(t.task_id) << '\t' << shot << '\t' << c.turn_index << '\t' << c.agent_slot
       << '\t' << to_string(c.agent_role) << '\t' << c.token_count << '\t'
       << (c.v_after ? format_double(*c.v_after) : "") << '\n';
  }
}

std::vector<DumpRow> read_trajectory_dump(std::istream& is) {
  std::vector<DumpRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (skip_line(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7) throw std::runtime_error("trajectory dump: expected 7 fields, got " + std::to_string(f.size()));
    DumpRow r;
    r.task_id = unescape_field(f[0]);
    r.shot = to_int(f[1], "shot");
    r.turn = to_int(f[2], "turn");
    r.slot = to_int(f[3], "slot");
    r.role = parse_role(f[4]);
    r.tokens = to_int(f[5], "tokens");
    if (!f[6].empty()) r.v_after = std::stod(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

ReplayPool read_replay_pool(std::istream& is) {
  ReplayPool pool;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() == 7) {
      ReplayChunkRecord rec;
      rec.task_id = unescape_field(f[0]);
      rec.shot = to_int(f[1], "shot");
      rec.slot = to_int(f[2], "slot");
      rec.turn = to_int(f[3], "turn");
      rec.role = parse_role(f[4]);
      rec.chunk_text = unescape_field(f[5]);
      rec.answer_label = unescape_field(f[6]);
      pool.add(std::move(rec));
    } else if (f.size() == 4) {
      ReplayAnswerRecord rec;
      rec.task_id = unescape_field(f[0]);
      rec.shot = to_int(f[1], "shot");
      rec.slot = to_int(f[2], "agent_slot");
      rec.answer_label = unescape_field(f[3]);
      pool.add(std::move(rec));
    } else {
      throw std::runtime_error("replay pool line " + std::to_string(lineno) +
                               ": expected 7 or 4 tab-separated fields");
    }
  }
  return pool;
}

void write_replay_chunk(std::ostream& os, const ReplayChunkRecord& r) {
  os << escape_field(r.task_id) << '\t' << r.shot << '\t' << r.slot << '\t' << r.turn << '\t'
     << to_string(r.role) << '\t' << escape_field(r.chunk_text) << '\t' << escape_field(r.answer_label)
     << '\n';
}

void write_replay_answer(std::ostream& os, const ReplayAnswerRecord& r) {
  os << escape_field(r.task_id) << '\t' << r.shot << '\t' << r.slot << '\t'
     << escape_field(r.answer_label) << '\n';
}

std::vector<Task> read_tasks(std::istream& is) {
  std::vector<Task> tasks;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Task t;
      t.id = j.at("id").get<std::string>();
      t.prompt = j.at("prompt").get<std::string>();
      t.options = j.at("options").get<std::vector<std::string>>();
      t.correct_label = j.at("correct_label").get<std::string>();
      t.distractor_label = j.at("distractor_label").get<std::string>();
      t.validate();
      tasks.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("task file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return tasks;
}

void write_tasks(std::ostream& os, const std::vector<Task>& tasks) {
  for (const auto& t : tasks) {
    nlohmann::json j{{"id", t.id},
                     {"prompt", t.prompt},
                     {"options", t.options},
                     {"correct_label", t.correct_label},
                     {"distractor_label", t.distractor_label}};
    os << j.dump() << '\n';
  }
}

void write_outcome_header(std::ostream& os) {
  os << "# config\ttask_id\tshot\tmethod\tfinal_role\tanswer\tcorrect_label\n";
}

void write_outcome(std::ostream& os, const OutcomeRecord& r) {
  os << r.config << '\t' << escape_field(r.task_id) << '\t' << r.shot << '\t' << r.method << '\t'
     << (r.final_role ? to_string(*r.final_role) : "-") << '\t' << (r.answer ? escape_field(*r.answer) : "") << '\t'
     << escape_field(r.correct_label) << '\n';
}

std::vector<OutcomeRecord> read_outcomes(std::istream& is) {
  std::vector<OutcomeRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (skip_line(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7) throw std::runtime_error("outcomes: expected 7 fields");
    OutcomeRecord r;
    r.config = f[0];
    r.task_id = unescape_field(f[1]);
    r.shot = to_int(f[2], "shot");
    r.method = f[3];
    if (f[4] != "-") r.final_role = parse_role(f[4]);
    if (!f[5].empty()) r.answer = unescape_field(f[5]);
    r.correct_label = unescape_field(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rrlab
