#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pctl/interval_set.hpp"
#include "pctl/map_model.hpp"
#include "pctl/safeset.hpp"

namespace pctl {

/// One run of x_{n+1} = f(x_n) + xi_n + u_n.
struct TrajectoryRecord {
  std::vector<double> states;        // x_0 .. x_N
  std::vector<double> disturbances;  // xi_0 .. xi_{N-1}
  std::vector<double> controls;      // u_0 .. u_{N-1}
  std::vector<bool> crash_flags;     // x_n < crash_threshold, one per state
  double crash_threshold = 0.0;
  double mean_state = 0.0;
  std::size_t crash_count = 0;
  /// Step at which f(x_n)+xi_n left the map domain; the record stops there.
  std::optional<std::size_t> domain_exit_step;

  std::size_t steps() const { return disturbances.size(); }
};

/// Disturbance rule. Adversarial-greedy picks xi in {-beta, +beta} minimising
/// the two-step total y + f(y), y = f(x) + xi, under zero control.
struct DisturbanceStrategy {
  enum class Kind { UniformRandom, ExtremalRandom, AdversarialGreedy, Scripted };
  Kind kind = Kind::UniformRandom;
  std::uint64_t seed = 0;
  std::vector<double> script;

  static DisturbanceStrategy uniform(std::uint64_t seed) { return {Kind::UniformRandom, seed, {}}; }
  static DisturbanceStrategy extremal(std::uint64_t seed) { return {Kind::ExtremalRandom, seed, {}}; }
  static DisturbanceStrategy adversarial() { return {Kind::AdversarialGreedy, 0, {}}; }
  static DisturbanceStrategy scripted(std::vector<double> xi) { return {Kind::Scripted, 0, std::move(xi)}; }
};

DisturbanceStrategy::Kind parse_strategy_kind(const std::string& name);
std::string to_string(DisturbanceStrategy::Kind kind);

/// Stateful generator for one run; deterministic given the strategy seed.
class DisturbanceSource {
 public:
  DisturbanceSource(DisturbanceStrategy strategy, double beta);
  /// Disturbance for step n at state x. Throws std::out_of_range when a
  /// script runs out, std::invalid_argument for an inadmissible scripted value.
  double next(const PiecewiseLinearMap& f, double x, std::size_t n);

 private:
  DisturbanceStrategy strategy_;
  double beta_;
  std::mt19937_64 rng_;
};

/// Raised when a controlled run leaves the safe set: the safe-set guarantee
/// has been broken, which is a bug, not an outcome.
class SafetyBreach : public std::runtime_error {
 public:
  SafetyBreach(const std::string& what, TrajectoryRecord partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const TrajectoryRecord& partial() const { return partial_; }

 private:
  TrajectoryRecord partial_;
};

TrajectoryRecord simulate_uncontrolled(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                       double crash_threshold);

TrajectoryRecord simulate_perturbed(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                    double beta, const DisturbanceStrategy& strategy,
                                    double crash_threshold);

/// Minimal correction toward S, clipped to [-U, U]. y = f(x_n) + xi_n.
double control_law(const IntervalSet& s, double u_bound, double y);

/// States that drift this far from S count as a breach.
inline constexpr double kSafetySlip = 1e-9;

/// Controlled run with the nearest-point control law. The crash threshold is
/// Q's lower edge. x0 must lie in S (std::invalid_argument otherwise).
TrajectoryRecord simulate_controlled(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                     const ControlParams& p, const IntervalSet& s,
                                     const DisturbanceStrategy& strategy);

/// A feedback disturbance policy that drives every controlled trajectory from
/// x0 out of Q. Step n lists the set of states reachable under any admissible
/// control and, for each piece of it, the disturbance the adversary plays.
struct EscapeCertificate {
  struct Cell {
    Interval states;
    double xi = 0.0;
  };
  struct Step {
    IntervalSet reachable;
    std::vector<Cell> policy;
  };
  double x0 = 0.0;
  std::size_t depth = 0;
  std::vector<Step> steps;  // steps[depth] has an empty reachable set
  /// One play of the policy against the controller's best response.
  std::vector<double> play_states;
  std::vector<double> play_disturbances;
  std::vector<double> play_controls;
};

struct EscapeOptions {
  std::size_t max_depth = 30;
  /// Dyadic refinement levels for candidate disturbances beyond {+beta, -beta}.
  int xi_levels = 6;
  /// How many times a reachable component may be halved to find a policy.
  int max_splits = 24;
};

/// Searches for a certificate that x0 in Q \ S is unsafe. Returns nullopt if
/// none is found within max_depth. Throws std::invalid_argument if x0 is in S
/// or outside Q. Every returned certificate has passed verify_escape.
std::optional<EscapeCertificate> adversarial_escape(const PiecewiseLinearMap& f,
                                                    const ControlParams& p, const IntervalSet& s,
                                                    double x0, const EscapeOptions& opts = {});

/// Re-propagates the policy with exact interval images and checks that the
/// reachable set is covered at every step and empty at the end.
bool verify_escape(const EscapeCertificate& cert, const PiecewiseLinearMap& f, const ControlParams& p);

}  // namespace pctl
