#pragma once

// Outcome-level aggregation mechanisms and a checker for the impossibility
// of being robust to both minority and slight-majority corruption.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rrlab/random.hpp"
#include "rrlab/types.hpp"

namespace rrlab {

/// Anonymous by construction: a mechanism only ever sees label counts.
using Counts = std::map<Label, int>;
using Distribution = std::map<Label, double>;

class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual std::string name() const = 0;
  /// Exact output distribution when the mechanism can state one.
  virtual std::optional<Distribution> distribution(const Counts&) const { return std::nullopt; }
  virtual Label sample(const Counts& counts, Rng& rng) const = 0;
};

/// Plurality; ties broken per policy.
class PluralityMechanism : public Mechanism {
 public:
  explicit PluralityMechanism(TiePolicy policy = TiePolicy::seeded_uniform) : policy_(policy) {}
  std::string name() const override;
  std::optional<Distribution> distribution(const Counts& counts) const override;
  Label sample(const Counts& counts, Rng& rng) const override;

 private:
  TiePolicy policy_;
};

/// Outputs the answer of one uniformly chosen agent.
class RandomDictatorMechanism : public Mechanism {
 public:
  std::string name() const override { return "random_dictator"; }
  std::optional<Distribution> distribution(const Counts& counts) const override;
  Label sample(const Counts& counts, Rng& rng) const override;
};

/// Always outputs the same label. Not symmetric.
class ConstantMechanism : public Mechanism {
 public:
  explicit ConstantMechanism(Label label) : label_(std::move(label)) {}
  std::string name() const override { return "constant(" + label_ + ")"; }
  std::optional<Distribution> distribution(const Counts& counts) const override;
  Label sample(const Counts&, Rng&) const override { return label_; }

 private:
  Label label_;
};

/// P(label) proportional to score[count(label)]. `score` must cover counts
/// 0..n and be non-decreasing.
class ScoreMechanism : public Mechanism {
 public:
  explicit ScoreMechanism(std::vector<double> score);
  std::string name() const override { return "score"; }
  std::optional<Distribution> distribution(const Counts& counts) const override;
  Label sample(const Counts& counts, Rng& rng) const override;

 private:
  std::vector<double> score_;
};

/// Plurality over `draws` agents sampled with replacement, uniform ties.
/// Exposes no distribution, so it is always checked by Monte-Carlo.
class SubsampleMechanism : public Mechanism {
 public:
  explicit SubsampleMechanism(int draws) : draws_(draws) {}
  std::string name() const override { return "subsample(" + std::to_string(draws_) + ")"; }
  Label sample(const Counts& counts, Rng& rng) const override;

 private:
  int draws_;
};

/// Label names used for the binary profiles.
inline const Label kTruthLabel = "A";
inline const Label kCorruptLabel = "B";

struct TrinityReport {
  std::string mechanism;
  int n = 0;
  bool exact = false;
  bool anonymous_ok = true;
  bool symmetric_ok = false;
  double p_correct_minority = 0.0;        // profile: ceil(n/2) correct
  double p_correct_slight_majority = 0.0;  // mirrored profile
  bool robust_minority = false;
  bool robust_slight_majority = false;
  /// Withheld (nullopt) when a symmetry probe fails.
  std::optional<bool> trinity_holds;
  std::string note;
};

/// Monte-Carlo estimates (used when no exact distribution is exposed) only
/// certify a property when it clears 0.5 by three standard errors.
TrinityReport trinity_check(const Mechanism& mech, int n, int trials, Rng& rng);

/// Random anonymous symmetric mechanisms: score mechanisms over random
/// monotone score tables and subsample pluralities.
std::vector<std::unique_ptr<Mechanism>> random_symmetric_mechanisms(int count, int n, Rng& rng);

}  // namespace rrlab
