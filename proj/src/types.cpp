#include "rrlab/types.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace rrlab {

std::string_view to_string(Role r) { return r == Role::honest ? "honest" : "corrupt"; }

std::string_view to_string(PayloadTier t) {
  switch (t) {
    case PayloadTier::none: return "none";
    case PayloadTier::moderate: return "moderate";
    case PayloadTier::strong: return "strong";
  }
  return "?";
}

std::string_view to_string(TiePolicy p) {
  return p == TiePolicy::seeded_uniform ? "seeded_uniform" : "lexicographic";
}

Role parse_role(std::string_view s) {
  if (s == "honest") return Role::honest;
  if (s == "corrupt") return Role::corrupt;
  throw std::invalid_argument("unknown role: " + std::string(s));
}

PayloadTier parse_payload_tier(std::string_view s) {
  if (s == "none") return PayloadTier::none;
  if (s == "moderate") return PayloadTier::moderate;
  if (s == "strong") return PayloadTier::strong;
  throw std::invalid_argument("unknown payload tier: " + std::string(s));
}

TiePolicy parse_tie_policy(std::string_view s) {
  if (s == "seeded_uniform") return TiePolicy::seeded_uniform;
  if (s == "lexicographic") return TiePolicy::lexicographic;
  throw std::invalid_argument("unknown tie policy: " + std::string(s));
}

bool Task::has_option(std::string_view label) const {
  return std::find(options.begin(), options.end(), label) != options.end();
}

void Task::validate() const {
  auto sorted = options;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("task " + id + ": option labels must be unique");
  if (!has_option(correct_label) || !has_option(distractor_label))
    throw std::invalid_argument("task " + id + ": correct and distractor labels must be options");
  if (correct_label == distractor_label)
    throw std::invalid_argument("task " + id + ": correct and distractor labels must differ");
}

int Trajectory::total_tokens() const {
  int total = 0;
  for (const auto& c : chunks) total += c.token_count;
  return total;
}

double Trajectory::current_potential() const {
  for (auto it = chunks.rbegin(); it != chunks.rend(); ++it)
    if (it->v_after) return *it->v_after;
  return initial_potential;
}

std::string Trajectory::text() const {
  std::string out;
  for (const auto& c : chunks) out += c.text;
  return out;
}

std::string config_name(int corrupt, int honest) {
  return std::to_string(corrupt) + "c" + std::to_string(honest) + "t";
}

std::pair<int, int> parse_config_name(std::string_view name) {
  int c = 0;
  int t = 0;
  const char* p = name.data();
  const char* end = name.data() + name.size();
  auto r1 = std::from_chars(p, end, c);
  if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != 'c')
    throw std::invalid_argument("malformed configuration name: " + std::string(name));
  auto r2 = std::from_chars(r1.ptr + 1, end, t);
  if (r2.ec != std::errc{} || r2.ptr + 1 != end || *r2.ptr != 't' || c < 0 || t < 0 || c + t < 1)
    throw std::invalid_argument("malformed configuration name: " + std::string(name));
  return {c, t};
}

}  // namespace rrlab
