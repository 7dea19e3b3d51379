#pragma once

// The generation interface shared by every agent kind.
//
//   potential  advances the shared potential K single-token steps
//   scripted   answer-level agent with fixed correctness/adherence rates
//   replay     plays back recorded chunks or answers
//   remote     one chat-completion call per chunk

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "rrlab/latent.hpp"
#include "rrlab/random.hpp"
#include "rrlab/types.hpp"

namespace rrlab {

class ChatCompletionsClient;

/// Base for failures that abort a trajectory rather than fabricate tokens.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendError : public GenerationError {
 public:
  using GenerationError::GenerationError;
};

class ReplayMissError : public GenerationError {
 public:
  using GenerationError::GenerationError;
};

struct ReplayChunkRecord {
  std::string task_id;
  int shot = 0;
  int slot = 0;
  int turn = 0;
  Role role = Role::honest;
  std::string chunk_text;
  std::string answer_label;  // empty when the chunk carries no answer
};

struct ReplayAnswerRecord {
  std::string task_id;
  int shot = 0;
  int slot = 0;
  std::string answer_label;  // empty = unresolved
};

/// Recorded generations keyed by (task, shot, slot, turn), plus an
/// answers-only view keyed by (task, shot, slot).
class ReplayPool {
 public:
  void add(ReplayChunkRecord rec);
  void add(ReplayAnswerRecord rec);

  const ReplayChunkRecord* find_chunk(const std::string& task, int shot, int slot, int turn) const;
  const ReplayAnswerRecord* find_answer(const std::string& task, int shot, int slot) const;

  std::size_t chunk_count() const { return chunks_.size(); }
  std::size_t answer_count() const { return answers_.size(); }
  const std::map<std::tuple<std::string, int, int>, ReplayAnswerRecord>& answers() const {
    return answers_;
  }

 private:
  std::map<std::tuple<std::string, int, int, int>, ReplayChunkRecord> chunks_;
  std::map<std::tuple<std::string, int, int>, ReplayAnswerRecord> answers_;
};

struct PotentialAgent {
  OperatorParams params;
};

struct ScriptedAgent {
  double p_correct = 1.0;
  /// Corrupt only: probability of emitting the distractor outright.
  double p_adhere = 1.0;
};

struct ReplayAgent {
  std::shared_ptr<const ReplayPool> pool;
};

struct RemoteAgent {
  std::shared_ptr<ChatCompletionsClient> client;
};

using AgentKind = std::variant<PotentialAgent, ScriptedAgent, ReplayAgent, RemoteAgent>;

struct AgentSpec {
  AgentKind kind;
  Role role = Role::honest;

  std::string_view kind_name() const;
  void validate() const;
};

struct GenerationRequest {
  std::string_view private_context;
  const Trajectory& shared;
  int k = 1;
  const Task& task;
  int slot = 0;
  int shot = 0;
  /// The budget ends with this chunk; the agent must emit its answer.
  bool terminal = false;
};

/// Throws GenerationError subclasses on replay misses and backend failures.
Chunk generate_chunk(const AgentSpec& spec, const GenerationRequest& req, Rng& rng);

std::string base_instructions();
std::string payload_text(PayloadTier tier, std::string_view distractor_label);

/// Private context for one agent. Honest agents accept only PayloadTier::none.
std::string bind_payload(const AgentSpec& spec, PayloadTier tier, const Task& task);

}  // namespace rrlab
