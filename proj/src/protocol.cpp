#include "rrlab/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rrlab/aggregation.hpp"

namespace rrlab {

namespace {

constexpr std::string_view kMarkerPrefix = "FINAL ANSWER: (";

Trajectory relay(const std::vector<const AgentSpec*>& seats,
                 const std::vector<std::string>& contexts, const Task& task, int k, int l,
                 double v0, int shot, Rng& rng) {
  Trajectory traj;
  traj.task_id = task.id;
  traj.initial_potential = v0;
  int used = 0;
  const int n = static_cast<int>(seats.size());
  for (int turn = 0; used < l; ++turn) {
    const int slot = turn % n;
    const int chunk_k = std::min(k, l - used);
    GenerationRequest req{contexts[slot], traj, chunk_k, task, slot, shot, used + chunk_k >= l};
    try {
      Chunk chunk = generate_chunk(*seats[slot], req, rng);
      chunk.turn_index = turn;
      chunk.agent_slot = slot;
      chunk.agent_role = seats[slot]->role;
      used += std::max(chunk.token_count, 1);
      for (const auto& f : chunk.flags)
        if (std::find(traj.flags.begin(), traj.flags.end(), f) == traj.flags.end())
          traj.flags.push_back(f);
      const bool answered = contains_marker(chunk.text);
      traj.chunks.push_back(std::move(chunk));
      if (answered) break;
    } catch (const GenerationError& e) {
      traj.aborted = true;
      traj.error = e.what();
      break;
    }
  }
  if (!traj.chunks.empty()) traj.final_speaker_role = traj.chunks.back().agent_role;
  if (!traj.aborted) traj.final_answer = extract_answer(traj, task);
  return traj;
}

std::vector<std::size_t> seat_order(const EnsembleConfig& ensemble, Rng& rng) {
  std::vector<std::size_t> order(ensemble.agent_specs.size());
  std::iota(order.begin(), order.end(), 0);
  if (ensemble.permute_slots) std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

std::string answer_marker(std::string_view label) {
  return "\n" + std::string(kMarkerPrefix) + std::string(label) + ")\n";
}

bool contains_marker(std::string_view text) { return text.find(kMarkerPrefix) != std::string_view::npos; }

Answer extract_answer(std::string_view transcript, const Task& task) {
  const auto pos = transcript.rfind(kMarkerPrefix);
  if (pos == std::string_view::npos) return std::nullopt;
  const auto start = pos + kMarkerPrefix.size();
  const auto close = transcript.find(')', start);
  if (close == std::string_view::npos) return std::nullopt;
  const std::string label(transcript.substr(start, close - start));
  if (!task.has_option(label)) return std::nullopt;
  return label;
}

Answer extract_answer(const Trajectory& trajectory, const Task& task) {
  return extract_answer(trajectory.text(), task);
}

void EnsembleConfig::validate() const {
  if (n < 1) throw std::invalid_argument("ensemble: n must be >= 1");
  if (corrupt_count < 0 || corrupt_count > n)
    throw std::invalid_argument("ensemble: corrupt_count must lie in [0, n]");
  if (k < 1) throw std::invalid_argument("ensemble: k must be >= 1");
  if (k > l) throw std::invalid_argument("ensemble: k must not exceed the budget l");
  if (m < 0) throw std::invalid_argument("ensemble: m must be >= 0");
  if (!(initial_potential > 0.0)) throw std::invalid_argument("ensemble: initial potential must be > 0");
  if (static_cast<int>(agent_specs.size()) != n)
    throw std::invalid_argument("ensemble: need exactly one agent spec per slot");
  int corrupt = 0;
  for (const auto& spec : agent_specs) {
    spec.validate();
    corrupt += spec.role == Role::corrupt;
  }
  if (corrupt != corrupt_count)
    throw std::invalid_argument("ensemble: agent roles disagree with corrupt_count");
}

EnsembleConfig EnsembleConfig::canonical(int n, int corrupt, const AgentKind& honest_kind,
                                         const AgentKind& corrupt_kind) {
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.corrupt_count = corrupt;
  for (int i = 0; i < n; ++i) {
    const bool bad = i < corrupt;
    cfg.agent_specs.push_back({bad ? corrupt_kind : honest_kind, bad ? Role::corrupt : Role::honest});
  }
  return cfg;
}

std::vector<std::string> private_contexts(const EnsembleConfig& ensemble, const Task& task) {
  std::vector<std::string> out;
  out.reserve(ensemble.agent_specs.size());
  for (const auto& spec : ensemble.agent_specs)
    out.push_back(bind_payload(spec, spec.role == Role::corrupt ? ensemble.payload_tier
                                                                : PayloadTier::none,
                               task));
  return out;
}

IndependentResult run_independent(const AgentSpec& agent, const Task& task, PayloadTier tier,
                                  int l, int k, double v0, Rng& rng, int shot, int slot) {
  if (l < 1 || k < 1) throw std::invalid_argument("run_independent: l and k must be >= 1");
  const PayloadTier effective = agent.role == Role::corrupt ? tier : PayloadTier::none;
  const std::vector<const AgentSpec*> seats{&agent};
  const std::vector<std::string> contexts{bind_payload(agent, effective, task)};
  // A single seat relays with itself; slot numbering follows the caller.
  Trajectory t = relay(seats, contexts, task, std::min(k, l), l, v0, shot, rng);
  for (auto& c : t.chunks) c.agent_slot = slot;
  IndependentResult out;
  out.answer = t.final_answer;
  out.transcript = std::move(t);
  return out;
}

MajResult run_maj(const EnsembleConfig& ensemble, const Task& task, Rng& rng, int shot) {
  ensemble.validate();
  const auto order = seat_order(ensemble, rng);
  MajResult out;
  std::vector<Answer> answers;
  for (int slot = 0; slot < ensemble.n; ++slot) {
    const AgentSpec& agent = ensemble.agent_specs[order[slot]];
    out.runs.push_back(run_independent(agent, task, ensemble.payload_tier, ensemble.l, ensemble.k,
                                       ensemble.initial_potential, rng, shot, slot));
    answers.push_back(out.runs.back().answer);
  }
  out.outcome = plurality(answers, ensemble.tie_policy, rng);
  return out;
}

Trajectory run_rr_trajectory(const EnsembleConfig& ensemble, const Task& task, Rng& rng, int shot) {
  ensemble.validate();
  const auto order = seat_order(ensemble, rng);
  const auto contexts_by_spec = private_contexts(ensemble, task);
  std::vector<const AgentSpec*> seats;
  std::vector<std::string> contexts;
  for (auto idx : order) {
    seats.push_back(&ensemble.agent_specs[idx]);
    contexts.push_back(contexts_by_spec[idx]);
  }
  return relay(seats, contexts, task, ensemble.k, ensemble.l, ensemble.initial_potential, shot, rng);
}

RRMajResult run_rrmaj(const EnsembleConfig& ensemble, const Task& task, Rng& rng) {
  ensemble.validate();
  RRMajResult out;
  std::vector<Answer> answers;
  for (int shot = 0; shot < ensemble.shots(); ++shot) {
    out.trajectories.push_back(run_rr_trajectory(ensemble, task, rng, shot));
    answers.push_back(out.trajectories.back().final_answer);
  }
  out.outcome = plurality(answers, ensemble.tie_policy, rng);
  return out;
}

Role attribute_final_speaker(const Trajectory& trajectory) {
  if (trajectory.chunks.empty())
    throw std::invalid_argument("attribute_final_speaker: trajectory has no chunks");
  return trajectory.chunks.back().agent_role;
}

}  // namespace rrlab
