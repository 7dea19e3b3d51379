#include "rrlab/latent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rrlab {

double potential(double z) {
  return std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double projection(double v) {
  if (!(v > 0.0)) throw std::domain_error("projection: potential must be > 0");
  if (v > 30.0) return -(v + std::log1p(-std::exp(-v)));
  return -std::log(std::expm1(v));
}

TruthFrame TruthFrame::from_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("TruthFrame: tau must be finite and > 0");
  return TruthFrame(tau, potential(tau));
}

TruthFrame TruthFrame::from_success_potential(double v_success) {
  // tau > 0 <=> v_success < ln 2.
  if (!(v_success > 0.0) || !(v_success < std::log(2.0)))
    throw std::invalid_argument("TruthFrame: v_success must lie in (0, ln 2)");
  const double tau = projection(v_success);
  return TruthFrame(tau, potential(tau));
}

TruthFrame TruthFrame::standard() { return from_success_potential(0.1); }

TableDrift::TableDrift(std::vector<std::pair<double, double>> knots) {
  if (knots.empty() || knots.front().first != 0.0) knots.insert(knots.begin(), {0.0, 0.0});
  if (knots.front().second != 0.0)
    throw std::invalid_argument("TableDrift: delta(0) must be 0");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first))
      throw std::invalid_argument("TableDrift: knot potentials must be strictly increasing");
    if (knots[i].second < knots[i - 1].second)
      throw std::invalid_argument("TableDrift: drift must be non-decreasing in v (knot " +
                                  std::to_string(i) + ")");
  }
  knots_ = std::move(knots);
}

double TableDrift::operator()(double v) const {
  if (v <= 0.0) return 0.0;
  if (knots_.size() == 1) return 0.0;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), v,
                             [](double x, const auto& k) { return x < k.first; });
  if (hi == knots_.end()) hi = std::prev(knots_.end());
  const auto lo = std::prev(hi);
  const double slope = (hi->second - lo->second) / (hi->first - lo->first);
  return lo->second + slope * (v - lo->first);
}

DriftModel DriftModel::linear(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("DriftModel: alpha must be finite and >= 0");
  return DriftModel(LinearDrift{alpha});
}

DriftModel DriftModel::table(std::vector<std::pair<double, double>> knots) {
  return DriftModel(TableDrift(std::move(knots)));
}

double DriftModel::operator()(double v) const {
  if (const auto* lin = std::get_if<LinearDrift>(&kind_)) return lin->alpha * v;
  return std::get<TableDrift>(kind_)(v);
}

double DriftModel::alpha() const {
  if (const auto* lin = std::get_if<LinearDrift>(&kind_)) return lin->alpha;
  throw std::logic_error("DriftModel::alpha on a table drift");
}

void OperatorParams::validate() const {
  if (!(gamma_h > 0.0 && gamma_h < 1.0))
    throw std::invalid_argument("OperatorParams: gamma_h must lie in (0,1)");
  if (!(noise_scale >= 0.0 && noise_scale <= 1.0))
    throw std::invalid_argument("OperatorParams: noise_scale must lie in [0,1]");
}

PotentialState honest_step(const PotentialState& state, const OperatorParams& params, Rng& rng) {
  double gamma = params.gamma_h;
  if (params.noise_scale > 0.0) {
    std::uniform_real_distribution<double> dist(gamma * (1.0 - params.noise_scale), gamma);
    gamma = dist(rng);
  }
  return {(1.0 - gamma) * state.v, state.step_index + 1};
}

PotentialState corrupt_step(const PotentialState& state, const OperatorParams& params, Rng& rng) {
  double delta = params.drift(state.v);
  if (params.noise_scale > 0.0 && delta > 0.0) {
    std::uniform_real_distribution<double> dist(delta * (1.0 - params.noise_scale), delta);
    delta = dist(rng);
  }
  return {state.v + delta, state.step_index + 1};
}

}  // namespace rrlab
