#include "pctl/control_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pctl {

DisturbanceStrategy::Kind parse_strategy_kind(const std::string& name) {
  using K = DisturbanceStrategy::Kind;
  if (name == "uniform" || name == "uniform-random") return K::UniformRandom;
  if (name == "extremal" || name == "extremal-random") return K::ExtremalRandom;
  if (name == "adversarial" || name == "adversarial-greedy") return K::AdversarialGreedy;
  if (name == "scripted") return K::Scripted;
  throw std::invalid_argument("unknown disturbance strategy '" + name + "'");
}

std::string to_string(DisturbanceStrategy::Kind kind) {
  switch (kind) {
    case DisturbanceStrategy::Kind::UniformRandom: return "uniform-random";
    case DisturbanceStrategy::Kind::ExtremalRandom: return "extremal-random";
    case DisturbanceStrategy::Kind::AdversarialGreedy: return "adversarial-greedy";
    case DisturbanceStrategy::Kind::Scripted: return "scripted";
  }
  return "unknown";
}

DisturbanceSource::DisturbanceSource(DisturbanceStrategy strategy, double beta)
    : strategy_(std::move(strategy)), beta_(beta), rng_(strategy_.seed) {
  if (!(beta >= 0.0)) throw std::invalid_argument("disturbance bound must be >= 0");
}

double DisturbanceSource::next(const PiecewiseLinearMap& f, double x, std::size_t n) {
  using K = DisturbanceStrategy::Kind;
  switch (strategy_.kind) {
    case K::UniformRandom: {
      std::uniform_real_distribution<double> dist(-beta_, beta_);
      return beta_ > 0.0 ? dist(rng_) : 0.0;
    }
    case K::ExtremalRandom: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng_) ? beta_ : -beta_;
    }
    case K::AdversarialGreedy: {
      const Interval dom = f.domain();
      auto value = [&](double xi) {
        const double y = f(x) + xi;
        return y + f(std::clamp(y, dom.lo, dom.hi));
      };
      // Ties go to the downward push.
      return value(beta_) < value(-beta_) ? beta_ : -beta_;
    }
    case K::Scripted: {
      if (n >= strategy_.script.size()) throw std::out_of_range("disturbance script exhausted");
      const double xi = strategy_.script[n];
      if (!(std::abs(xi) <= beta_ * (1.0 + 1e-12)))
        throw std::invalid_argument("scripted disturbance exceeds beta");
      return xi;
    }
  }
  return 0.0;
}

namespace {

void finish(TrajectoryRecord& rec) {
  rec.crash_flags.clear();
  rec.crash_count = 0;
  for (double x : rec.states) {
    const bool crash = x < rec.crash_threshold;
    rec.crash_flags.push_back(crash);
    rec.crash_count += crash ? 1 : 0;
  }
  rec.mean_state = rec.states.empty()
                       ? 0.0
                       : std::accumulate(rec.states.begin(), rec.states.end(), 0.0) /
                             static_cast<double>(rec.states.size());
}

TrajectoryRecord run_open_loop(const PiecewiseLinearMap& f, double x0, std::size_t n,
                               DisturbanceSource* source, double crash_threshold) {
  const Interval dom = f.domain();
  if (!dom.contains(x0)) throw std::invalid_argument("x0 is outside the map domain");
  TrajectoryRecord rec;
  rec.crash_threshold = crash_threshold;
  rec.states.push_back(x0);
  double x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = source ? source->next(f, x, k) : 0.0;
    const double next = f(x) + xi;
    rec.disturbances.push_back(xi);
    rec.controls.push_back(0.0);
    rec.states.push_back(next);
    if (!dom.contains(next)) {
      rec.domain_exit_step = k;
      break;
    }
    x = next;
  }
  finish(rec);
  return rec;
}

}  // namespace

TrajectoryRecord simulate_uncontrolled(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                       double crash_threshold) {
  return run_open_loop(f, x0, n, nullptr, crash_threshold);
}

TrajectoryRecord simulate_perturbed(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                    double beta, const DisturbanceStrategy& strategy,
                                    double crash_threshold) {
  DisturbanceSource source(strategy, beta);
  return run_open_loop(f, x0, n, &source, crash_threshold);
}

double control_law(const IntervalSet& s, double u_bound, double y) {
  if (s.empty()) throw std::invalid_argument("control law needs a nonempty safe set");
  const double correction = nearest_point(s, y) - y;
  return std::clamp(correction, -u_bound, u_bound);
}

TrajectoryRecord simulate_controlled(const PiecewiseLinearMap& f, double x0, std::size_t n,
                                     const ControlParams& p, const IntervalSet& s,
                                     const DisturbanceStrategy& strategy) {
  p.validate();
  if (s.empty()) throw std::invalid_argument("controlled run needs a nonempty safe set");
  if (!s.contains(x0, kMergeEps)) throw std::invalid_argument("x0 is not in the safe set");

  DisturbanceSource source(strategy, p.beta);
  const Interval dom = f.domain();
  TrajectoryRecord rec;
  rec.crash_threshold = p.target.lo;
  rec.states.push_back(x0);
  double x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = source.next(f, x, k);
    const double y = f(std::clamp(x, dom.lo, dom.hi)) + xi;
    const double u = control_law(s, p.u_bound, y);
    const double next = y + u;
    rec.disturbances.push_back(xi);
    rec.controls.push_back(u);
    rec.states.push_back(next);
    const double miss = point_distance(s, next);
    if (miss > kSafetySlip) {
      finish(rec);
      std::ostringstream msg;
      msg.precision(17);
      msg << "safety invariant breached at step " << k << ": x=" << x << " xi=" << xi
          << " f(x)+xi=" << y << " is " << point_distance(s, y) << " from S (U=" << p.u_bound
          << ")";
      throw SafetyBreach(msg.str(), rec);
    }
    x = next;
  }
  finish(rec);
  return rec;
}

}  // namespace pctl
