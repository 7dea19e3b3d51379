#pragma once

// Latent dynamics in potential space.
//
// All state is carried on the scalar truth projection z = <h, theta> through
// the logistic potential V = ln(1 + exp(-z)). Honest tokens contract V by a
// fixed rate; corrupt tokens add a drift bounded by delta(V).

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "rrlab/random.hpp"

namespace rrlab {

/// Logistic Lyapunov potential ln(1 + exp(-z)), overflow-safe for any finite z.
double potential(double z);

/// Inverse of potential() for v > 0.
double projection(double v);

/// Attractor half-space {z >= tau}, equivalently {V <= v_success}.
class TruthFrame {
 public:
  static TruthFrame from_tau(double tau);
  static TruthFrame from_success_potential(double v_success);
  /// v_success = 0.1, tau ~= 2.2522.
  static TruthFrame standard();

  double tau() const { return tau_; }
  double v_success() const { return v_success_; }

 private:
  TruthFrame(double tau, double v_success) : tau_(tau), v_success_(v_success) {}
  double tau_;
  double v_success_;
};

struct PotentialState {
  double v = 1.0;
  std::int64_t step_index = 0;

  static PotentialState from_projection(double z, std::int64_t step = 0) {
    return {potential(z), step};
  }
  double z() const { return projection(v); }
};

struct LinearDrift {
  double alpha = 0.0;
};

/// Piecewise-linear drift through (v, delta) knots, extended beyond the last
/// knot with the last segment's slope. A (0, 0) knot is implied.
class TableDrift {
 public:
  explicit TableDrift(std::vector<std::pair<double, double>> knots);
  double operator()(double v) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// The sycophancy bottleneck delta(V): monotone non-decreasing, delta(0) = 0.
class DriftModel {
 public:
  DriftModel() : kind_(LinearDrift{}) {}
  static DriftModel linear(double alpha);
  static DriftModel table(std::vector<std::pair<double, double>> knots);

  double operator()(double v) const;

  bool is_linear() const { return std::holds_alternative<LinearDrift>(kind_); }
  /// Only meaningful when is_linear().
  double alpha() const;

 private:
  explicit DriftModel(std::variant<LinearDrift, TableDrift> k) : kind_(std::move(k)) {}
  std::variant<LinearDrift, TableDrift> kind_;
};

struct OperatorParams {
  double gamma_h = 0.03;
  DriftModel drift = DriftModel::linear(0.004);
  TruthFrame frame = TruthFrame::standard();
  double noise_scale = 0.0;

  /// Throws std::invalid_argument on gamma_h outside (0,1) or noise_scale
  /// outside [0,1].
  void validate() const;
};

/// One honest token: v' = (1 - gamma_eff) v.
PotentialState honest_step(const PotentialState& state, const OperatorParams& params, Rng& rng);

/// One corrupt token at the worst-case drift bound: v' = v + delta_eff(v).
PotentialState corrupt_step(const PotentialState& state, const OperatorParams& params, Rng& rng);

inline bool in_attractor(const PotentialState& state, const TruthFrame& frame) {
  return state.v <= frame.v_success();
}

/// z >= tau form of the membership test.
inline bool in_attractor_z(double z, const TruthFrame& frame) { return z >= frame.tau(); }

}  // namespace rrlab
