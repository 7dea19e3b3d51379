#include "rrlab/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrlab {

namespace {

std::vector<Label> top_labels(const Counts& counts) {
  int best = -1;
  for (const auto& [l, c] : counts) best = std::max(best, c);
  std::vector<Label> top;
  for (const auto& [l, c] : counts)
    if (c == best) top.push_back(l);
  return top;
}

Label draw_from(const Distribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  for (const auto& [label, p] : dist) {
    if (x < p) return label;
    x -= p;
  }
  return dist.rbegin()->first;
}

int total(const Counts& counts) {
  int n = 0;
  for (const auto& [l, c] : counts) n += c;
  return n;
}

Counts profile(int truthful, int corrupt) { return {{kTruthLabel, truthful}, {kCorruptLabel, corrupt}}; }

}  // namespace

std::string PluralityMechanism::name() const {
  return std::string("plurality(") + std::string(to_string(policy_)) + ")";
}

std::optional<Distribution> PluralityMechanism::distribution(const Counts& counts) const {
  Distribution d;
  for (const auto& [l, c] : counts) d[l] = 0.0;
  const auto top = top_labels(counts);
  if (policy_ == TiePolicy::lexicographic) {
    d[top.front()] = 1.0;
  } else {
    for (const auto& l : top) d[l] = 1.0 / top.size();
  }
  return d;
}

Label PluralityMechanism::sample(const Counts& counts, Rng& rng) const {
  return draw_from(*distribution(counts), rng);
}

std::optional<Distribution> RandomDictatorMechanism::distribution(const Counts& counts) const {
  const int n = total(counts);
  if (n == 0) throw std::invalid_argument("random dictator: empty profile");
  Distribution d;
  for (const auto& [l, c] : counts) d[l] = static_cast<double>(c) / n;
  return d;
}

Label RandomDictatorMechanism::sample(const Counts& counts, Rng& rng) const {
  std::uniform_int_distribution<int> pick(0, total(counts) - 1);
  int i = pick(rng);
  for (const auto& [l, c] : counts) {
    if (i < c) return l;
    i -= c;
  }
  throw std::invalid_argument("random dictator: empty profile");
}

std::optional<Distribution> ConstantMechanism::distribution(const Counts& counts) const {
  Distribution d;
  for (const auto& [l, c] : counts) d[l] = 0.0;
  d[label_] = 1.0;
  return d;
}

ScoreMechanism::ScoreMechanism(std::vector<double> score) : score_(std::move(score)) {
  if (score_.empty()) throw std::invalid_argument("score mechanism: empty score table");
  for (std::size_t i = 0; i < score_.size(); ++i) {
    if (score_[i] < 0.0) throw std::invalid_argument("score mechanism: negative score");
    if (i > 0 && score_[i] < score_[i - 1])
      throw std::invalid_argument("score mechanism: scores must be non-decreasing");
  }
}

std::optional<Distribution> ScoreMechanism::distribution(const Counts& counts) const {
  Distribution d;
  double z = 0.0;
  for (const auto& [l, c] : counts) {
    if (c < 0 || static_cast<std::size_t>(c) >= score_.size())
      throw std::out_of_range("score mechanism: count outside the score table");
    d[l] = score_[c];
    z += score_[c];
  }
  for (auto& [l, p] : d) p = z > 0.0 ? p / z : 1.0 / d.size();
  return d;
}

Label ScoreMechanism::sample(const Counts& counts, Rng& rng) const {
  return draw_from(*distribution(counts), rng);
}

Label SubsampleMechanism::sample(const Counts& counts, Rng& rng) const {
  const int n = total(counts);
  if (n == 0) throw std::invalid_argument("subsample: empty profile");
  std::uniform_int_distribution<int> pick(0, n - 1);
  Counts drawn;
  for (const auto& [l, c] : counts) drawn[l] = 0;
  for (int i = 0; i < draws_; ++i) {
    int j = pick(rng);
    for (const auto& [l, c] : counts) {
      if (j < c) {
        ++drawn[l];
        break;
      }
      j -= c;
    }
  }
  const auto top = top_labels(drawn);
  std::uniform_int_distribution<std::size_t> tie(0, top.size() - 1);
  return top[tie(rng)];
}

TrinityReport trinity_check(const Mechanism& mech, int n, int trials, Rng& rng) {
  if (n < 2) throw std::invalid_argument("trinity_check: n must be >= 2");
  if (trials < 1) throw std::invalid_argument("trinity_check: trials must be >= 1");

  TrinityReport rep;
  rep.mechanism = mech.name();
  rep.n = n;

  // Probe every binary profile once; exact when the mechanism states its
  // distribution on all of them.
  std::vector<Distribution> exact(n + 1);
  rep.exact = true;
  for (int a = 0; a <= n && rep.exact; ++a) {
    auto d = mech.distribution(profile(a, n - a));
    if (!d) rep.exact = false;
    else exact[a] = std::move(*d);
  }

  auto estimate = [&](int truthful, const Label& target) {
    int hits = 0;
    const Counts p = profile(truthful, n - truthful);
    for (int t = 0; t < trials; ++t) hits += mech.sample(p, rng) == target;
    return static_cast<double>(hits) / trials;
  };
  auto prob = [&](int truthful, const Label& target) {
    if (rep.exact) {
      auto it = exact[truthful].find(target);
      return it == exact[truthful].end() ? 0.0 : it->second;
    }
    return estimate(truthful, target);
  };

  rep.symmetric_ok = true;
  for (int a = 0; a <= n; ++a) {
    const double p_here = prob(a, kTruthLabel);
    const double p_mirror = prob(n - a, kCorruptLabel);
    double slack = 1e-12;
    if (!rep.exact)
      slack = 4.0 * std::sqrt((p_here * (1 - p_here) + p_mirror * (1 - p_mirror)) / trials) + 1.0 / trials;
    if (std::abs(p_here - p_mirror) > slack) rep.symmetric_ok = false;
    if (rep.exact) {
      double sum = 0.0;
      for (const auto& [l, p] : exact[a]) sum += p;
      if (std::abs(sum - 1.0) > 1e-9) rep.symmetric_ok = false;
    }
  }

  const int majority = (n + 1) / 2;
  const int minority = n / 2;
  rep.p_correct_minority = prob(majority, kTruthLabel);
  rep.p_correct_slight_majority = prob(minority, kTruthLabel);
  if (rep.exact) {
    rep.robust_minority = rep.p_correct_minority > 0.5 + 1e-12;
    rep.robust_slight_majority = rep.p_correct_slight_majority >= 0.5 - 1e-12;
  } else {
    auto se = [&](double p) { return std::sqrt(p * (1 - p) / trials); };
    rep.robust_minority = rep.p_correct_minority - 3 * se(rep.p_correct_minority) > 0.5;
    rep.robust_slight_majority =
        rep.p_correct_slight_majority - 3 * se(rep.p_correct_slight_majority) >= 0.5;
  }

  if (rep.symmetric_ok) {
    rep.trinity_holds = !(rep.robust_minority && rep.robust_slight_majority);
    rep.note = "checked on this mechanism only; the universal statement is a proof, not a test";
  } else {
    rep.note = "symmetry probe failed; verdict withheld";
  }
  return rep;
}

std::vector<std::unique_ptr<Mechanism>> random_symmetric_mechanisms(int count, int n, Rng& rng) {
  std::vector<std::unique_ptr<Mechanism>> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> log_power(std::log(0.2), std::log(8.0));
  std::uniform_int_distribution<int> draws(1, 2 * n + 1);
  for (int i = 0; i < count; ++i) {
    switch (i % 3) {
      case 0:
      case 1: {
        std::vector<double> s(n + 1);
        for (auto& x : s) x = u(rng);
        std::sort(s.begin(), s.end());
        if (i % 3 == 1) {
          const double power = std::exp(log_power(rng));
          for (auto& x : s) x = std::pow(x, power);
        }
        out.push_back(std::make_unique<ScoreMechanism>(std::move(s)));
        break;
      }
      default:
        out.push_back(std::make_unique<SubsampleMechanism>(draws(rng)));
    }
  }
  return out;
}

}  // namespace rrlab
