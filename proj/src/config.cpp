#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rrlab/harness.hpp"
#include "rrlab/records.hpp"
#include "rrlab/remote.hpp"

namespace rrlab {

namespace {

using nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  return j;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + where + "." + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

struct Caches {
  std::map<std::string, std::shared_ptr<const ReplayPool>> pools;
  std::map<std::string, std::shared_ptr<ChatCompletionsClient>> clients;
};

AgentKind parse_agent(const json& j, const std::string& where, const std::filesystem::path& base,
                      Caches& caches) {
  require_object(j, where);
  const auto kind = get<std::string>(j, "kind", "", where);
  if (kind == "potential") {
    check_keys(j, where, {"kind", "gamma_h", "alpha", "drift_table", "noise_scale", "v_success"});
    PotentialAgent a;
    a.params.gamma_h = get(j, "gamma_h", 0.03, where);
    if (j.contains("alpha") && j.contains("drift_table"))
      throw ConfigError("config: '" + where + "' sets both alpha and drift_table");
    if (j.contains("drift_table"))
      a.params.drift = DriftModel::table(
          get<std::vector<std::pair<double, double>>>(j, "drift_table", {}, where));
    else
      a.params.drift = DriftModel::linear(get(j, "alpha", 0.004, where));
    a.params.noise_scale = get(j, "noise_scale", 0.0, where);
    a.params.frame = TruthFrame::from_success_potential(get(j, "v_success", 0.1, where));
    a.params.validate();
    return a;
  }
  if (kind == "scripted") {
    check_keys(j, where, {"kind", "p_correct", "p_adhere"});
    return ScriptedAgent{get(j, "p_correct", 1.0, where), get(j, "p_adhere", 1.0, where)};
  }
  if (kind == "replay") {
    check_keys(j, where, {"kind", "pool"});
    const auto path = resolve(base, get<std::string>(j, "pool", "", where));
    if (path.empty()) throw ConfigError("config: '" + where + ".pool' is required");
    auto& slot = caches.pools[path.string()];
    if (!slot) {
      std::ifstream in(path);
      if (!in) throw ConfigError("config: cannot open replay pool " + path.string());
      slot = std::make_shared<const ReplayPool>(read_replay_pool(in));
    }
    return ReplayAgent{slot};
  }
  if (kind == "remote") {
    check_keys(j, where, {"kind", "endpoint", "model", "temperature", "key_env_var", "max_in_flight",
                          "timeout_s", "retry"});
    RemoteConfig rc;
    rc.endpoint = get<std::string>(j, "endpoint", "", where);
    rc.model = get<std::string>(j, "model", "", where);
    if (rc.endpoint.empty() || rc.model.empty())
      throw ConfigError("config: '" + where + "' needs endpoint and model");
    rc.temperature = get(j, "temperature", rc.temperature, where);
    rc.key_env_var = get(j, "key_env_var", rc.key_env_var, where);
    rc.max_in_flight = get(j, "max_in_flight", rc.max_in_flight, where);
    rc.timeout = std::chrono::seconds(get(j, "timeout_s", 120, where));
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      const std::string rw = where + ".retry";
      check_keys(r, rw, {"attempts", "initial_delay_ms", "backoff", "jitter"});
      rc.retry.attempts = get(r, "attempts", rc.retry.attempts, rw);
      rc.retry.initial_delay = std::chrono::milliseconds(get(r, "initial_delay_ms", 500, rw));
      rc.retry.backoff = get(r, "backoff", rc.retry.backoff, rw);
      rc.retry.jitter = get(r, "jitter", rc.retry.jitter, rw);
    }
    // Identical sections share one client and therefore one in-flight cap.
    auto& client = caches.clients[j.dump()];
    if (!client) client = std::make_shared<ChatCompletionsClient>(rc);
    return RemoteAgent{client};
  }
  throw ConfigError("config: '" + where + ".kind' must be potential, scripted, replay or remote");
}

SweepSpec parse_sweep(const json& j, std::uint64_t seed) {
  const std::string w = "stability";
  check_keys(j, w, {"gamma_h", "alpha", "k_list", "rho_grid", "trials", "max_turns", "v0",
                    "noise_scale", "v_success", "deterministic_n"});
  SweepSpec s;
  s.gamma_h = get(j, "gamma_h", s.gamma_h, w);
  s.alpha = get(j, "alpha", s.alpha, w);
  s.k_list = get(j, "k_list", std::vector<int>{1, 10, 100}, w);
  s.rho_grid = get(j, "rho_grid", std::vector<double>{0.2, 0.4, 0.6, 0.8}, w);
  s.trials = get(j, "trials", s.trials, w);
  s.max_turns = get(j, "max_turns", s.max_turns, w);
  s.v0 = get(j, "v0", s.v0, w);
  s.noise_scale = get(j, "noise_scale", s.noise_scale, w);
  s.frame = TruthFrame::from_success_potential(get(j, "v_success", 0.1, w));
  if (j.contains("deterministic_n")) s.deterministic_n = get(j, "deterministic_n", 5, w);
  s.seed = seed;
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentPlan parse_plan_impl(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(doc, "", {"name", "seed", "ensemble", "grid", "agents", "payloads", "tasks", "methods",
                       "output", "scaling", "stability"});

  ExperimentPlan plan;
  plan.name = get<std::string>(doc, "name", plan.name, "");
  plan.root_seed = get<std::uint64_t>(doc, "seed", 0, "");

  if (doc.contains("ensemble")) {
    const auto& e = doc.at("ensemble");
    check_keys(e, "ensemble", {"n", "k", "l", "m", "initial_potential", "tie_policy", "permute_slots"});
    auto& ens = plan.ensemble;
    ens.n = get(e, "n", ens.n, "ensemble");
    ens.k = get(e, "k", ens.k, "ensemble");
    ens.l = get(e, "l", ens.l, "ensemble");
    ens.m = get(e, "m", ens.m, "ensemble");
    ens.initial_potential = get(e, "initial_potential", ens.initial_potential, "ensemble");
    ens.tie_policy = parse_tie_policy(get<std::string>(e, "tie_policy", "seeded_uniform", "ensemble"));
    ens.permute_slots = get(e, "permute_slots", ens.permute_slots, "ensemble");
  }

  if (!doc.contains("grid") || doc.at("grid") == "canonical") {
    plan.grid = canonical_grid(plan.ensemble.n);
  } else {
    const auto& g = doc.at("grid");
    if (!g.is_array()) throw ConfigError("config: 'grid' must be \"canonical\" or a list of names");
    for (const auto& item : g) {
      const auto [c, t] = parse_config_name(item.get<std::string>());
      plan.grid.push_back({c, t});
    }
  }

  Caches caches;
  if (doc.contains("agents")) {
    const auto& a = doc.at("agents");
    check_keys(a, "agents", {"honest", "corrupt"});
    if (a.contains("honest")) plan.honest_kind = parse_agent(a.at("honest"), "agents.honest", base_dir, caches);
    if (a.contains("corrupt"))
      plan.corrupt_kind = parse_agent(a.at("corrupt"), "agents.corrupt", base_dir, caches);
  }

  if (doc.contains("payloads")) {
    const auto& p = doc.at("payloads");
    check_keys(p, "payloads", {"tier"});
    plan.ensemble.payload_tier = parse_payload_tier(get<std::string>(p, "tier", "none", "payloads"));
  }

  if (doc.contains("tasks")) {
    const auto& t = doc.at("tasks");
    check_keys(t, "tasks", {"synthetic", "file"});
    if (t.contains("synthetic") && t.contains("file"))
      throw ConfigError("config: 'tasks' takes either synthetic or file");
    if (t.contains("file")) {
      plan.tasks.path = resolve(base_dir, get<std::string>(t, "file", "", "tasks"));
    } else if (t.contains("synthetic")) {
      const auto& s = t.at("synthetic");
      check_keys(s, "tasks.synthetic", {"count", "seed"});
      plan.tasks.synthetic_count = get(s, "count", plan.tasks.synthetic_count, "tasks.synthetic");
      plan.tasks.synthetic_seed = get<std::uint64_t>(s, "seed", 0, "tasks.synthetic");
    }
  }

  if (doc.contains("methods")) {
    plan.methods.clear();
    for (const auto& m : doc.at("methods")) plan.methods.insert(parse_method(m.get<std::string>()));
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"dir", "dump_trajectories"});
    if (o.contains("dir")) plan.output_dir = resolve(base_dir, get<std::string>(o, "dir", "", "output"));
    plan.dump_trajectories = get(o, "dump_trajectories", plan.dump_trajectories, "output");
  }

  if (doc.contains("scaling")) {
    const auto& s = doc.at("scaling");
    check_keys(s, "scaling", {"m_star", "m_list", "trials"});
    plan.scaling.m_star = get(s, "m_star", plan.scaling.m_star, "scaling");
    plan.scaling.m_list = get(s, "m_list", plan.scaling.m_list, "scaling");
    plan.scaling.trials = get(s, "trials", plan.scaling.trials, "scaling");
  }

  if (doc.contains("stability")) plan.sweep = parse_sweep(doc.at("stability"), plan.root_seed);

  // The seed travels separately in every artifact, so it stays out of the hash.
  json hashed = doc;
  hashed.erase("seed");
  plan.config_hash = hex64(fnv1a(hashed.dump()));

  plan.validate();
  return plan;
}

}  // namespace

ExperimentPlan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir) {
  try {
    return parse_plan_impl(json_text, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_plan(text.str(), path.parent_path());
}

}  // namespace rrlab
