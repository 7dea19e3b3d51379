#include "rrlab/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrlab {

VoteOutcome plurality(std::span<const Answer> answers, TiePolicy policy, Rng& rng) {
  VoteOutcome out;
  out.policy = policy;
  for (const auto& a : answers) {
    if (a) ++out.counts[*a];
    else ++out.unresolved;
  }
  if (out.counts.empty()) return out;

  int best = 0;
  for (const auto& [label, n] : out.counts) best = std::max(best, n);
  std::vector<Label> top;
  for (const auto& [label, n] : out.counts)
    if (n == best) top.push_back(label);  // std::map keeps these sorted

  out.tie = top.size() > 1;
  if (out.tie) out.tie_members.insert(top.begin(), top.end());
  if (!out.tie || policy == TiePolicy::lexicographic) {
    out.winner = top.front();
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, top.size() - 1);
    out.winner = top[pick(rng)];
  }
  return out;
}

double maj_m1_expectation(int corrupt, int truthful, double p_corrupt_correct,
                          double p_truthful_correct) {
  if (corrupt < 0 || truthful < 0 || corrupt + truthful < 1)
    throw std::invalid_argument("maj_m1_expectation: need c, t >= 0 and c + t >= 1");
  const double n = corrupt + truthful;
  double sum = 0.0;
  // Skip absent groups so an unused probability never enters the sum.
  if (corrupt > 0) sum += corrupt / n * p_corrupt_correct;
  if (truthful > 0) sum += truthful / n * p_truthful_correct;
  return sum;
}

double condorcet_curve(double p, int m, TiePolicy policy) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("condorcet_curve: p must lie in [0,1]");
  if (m < 1) throw std::invalid_argument("condorcet_curve: m must be >= 1");
  const long double tie_credit = policy == TiePolicy::seeded_uniform ? 0.5L : 0.0L;
  const long double pp = p;
  const long double qq = 1.0L - pp;

  if (m <= 64) {
    std::vector<long double> row(m + 1, 0.0L);
    row[0] = 1.0L;
    for (int i = 1; i <= m; ++i)
      for (int j = i; j > 0; --j) row[j] += row[j - 1];
    long double total = 0.0L;
    for (int j = 0; j <= m; ++j) {
      const long double mass = row[j] * std::pow(pp, j) * std::pow(qq, m - j);
      if (2 * j > m) total += mass;
      else if (2 * j == m) total += tie_credit * mass;
    }
    return static_cast<double>(std::min(total, 1.0L));
  }

  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lfm = std::lgamma(m + 1.0);
  double total = 0.0;
  for (int j = 0; j <= m; ++j) {
    if (2 * j < m) continue;
    const double lmass = lfm - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) + j * lp + (m - j) * lq;
    total += (2 * j == m ? static_cast<double>(tie_credit) : 1.0) * std::exp(lmass);
  }
  return std::min(total, 1.0);
}

void ScalingPool::validate() const {
  if (entries.empty()) throw std::invalid_argument("scaling pool is empty");
  for (const auto& e : entries) {
    if (e.outcomes.empty()) throw std::invalid_argument("scaling pool: task " + e.task_id + " has no outcomes");
    if (static_cast<int>(e.outcomes.size()) > m_star)
      throw std::invalid_argument("scaling pool: task " + e.task_id + " exceeds m_star outcomes");
  }
}

double ScalingPool::empirical_accuracy() const {
  long correct = 0;
  long resolved = 0;
  for (const auto& e : entries)
    for (const auto& o : e.outcomes) {
      if (!o) continue;
      ++resolved;
      correct += *o == e.correct_label;
    }
  return resolved ? static_cast<double>(correct) / resolved : 0.0;
}

double ScalingPoint::standard_error() const {
  return trials > 0 ? std / std::sqrt(static_cast<double>(trials)) : 0.0;
}

ScalingPoint bootstrap_scaling(const ScalingPool& pool, int m, int trials, TiePolicy policy, Rng& rng) {
  pool.validate();
  if (trials < 1) throw std::invalid_argument("bootstrap_scaling: trials must be >= 1");
  if (m < 1 || m > pool.m_star)
    throw std::invalid_argument("bootstrap_scaling: m must lie in [1, m_star]");

  std::vector<double> acc(trials);
  double unresolved_total = 0.0;
  std::vector<Answer> draw(m);
  for (int t = 0; t < trials; ++t) {
    int correct = 0;
    int quorum = 0;
    for (const auto& e : pool.entries) {
      std::uniform_int_distribution<std::size_t> pick(0, e.outcomes.size() - 1);
      for (int i = 0; i < m; ++i) draw[i] = e.outcomes[pick(rng)];
      const auto vote = plurality(draw, policy, rng);
      if (vote.no_quorum()) {
        unresolved_total += 1.0;
        continue;
      }
      ++quorum;
      correct += *vote.winner == e.correct_label;
    }
    acc[t] = quorum ? static_cast<double>(correct) / quorum : 0.0;
  }

  ScalingPoint pt;
  pt.m = m;
  pt.trials = trials;
  double sum = 0.0;
  for (double a : acc) sum += a;
  pt.mean = sum / trials;
  double ss = 0.0;
  for (double a : acc) ss += (a - pt.mean) * (a - pt.mean);
  pt.std = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
  pt.mean_unresolved = unresolved_total / trials;
  return pt;
}

namespace {
double log_choose(long n, long k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}
}  // namespace

double fisher_exact_2x2(long a, long b, long c, long d) {
  if (a < 0 || b < 0 || c < 0 || d < 0)
    throw std::invalid_argument("fisher_exact_2x2: counts must be non-negative");
  const long row1 = a + b;
  const long row2 = c + d;
  const long col1 = a + c;
  const long col2 = b + d;
  if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0)
    throw std::invalid_argument("fisher_exact_2x2: degenerate margins");
  const long n = row1 + row2;

  const long lo = std::max(0L, col1 - row2);
  const long hi = std::min(row1, col1);
  const double log_denominator = log_choose(n, col1);
  auto log_p = [&](long x) { return log_choose(row1, x) + log_choose(row2, col1 - x) - log_denominator; };

  // Relative slack so tables tied with the observed one are not lost to
  // rounding in the log-factorials.
  const double threshold = log_p(a) + 1e-7;
  double p = 0.0;
  for (long x = lo; x <= hi; ++x) {
    const double lx = log_p(x);
    if (lx <= threshold) p += std::exp(lx);
  }
  return std::min(p, 1.0);
}

AsymmetricYield asymmetric_yield(const std::map<std::string, double>& delta_rows) {
  AsymmetricYield y;
  double tax_sum = 0.0;
  double gain_sum = 0.0;
  for (const auto& [name, delta] : delta_rows) {
    const auto [c, t] = parse_config_name(name);
    const double rho = static_cast<double>(c) / (c + t);
    if (rho > 0.0 && rho <= 0.4 + 1e-12) {
      tax_sum += delta;
      ++y.tax_rows;
    } else if (rho >= 0.6 - 1e-12 && rho < 1.0) {
      gain_sum += delta;
      ++y.gain_rows;
    }
  }
  if (y.tax_rows == 0 || y.gain_rows == 0)
    throw std::invalid_argument("asymmetric_yield: need a row with rho <= 0.4 and one with rho >= 0.6");
  y.tax = tax_sum / y.tax_rows;
  y.gain = gain_sum / y.gain_rows;
  return y;
}

}  // namespace rrlab
