#include <algorithm>
#include <cmath>
#include <functional>

#include "pctl/control_sim.hpp"

namespace pctl {

namespace {

std::vector<double> candidate_disturbances(double beta, int levels) {
  std::vector<double> out{beta, -beta, 0.0};
  for (int l = 1; l <= levels; ++l) {
    const long denom = 1L << l;
    for (long j = 1; j < denom; j += 2) {
      out.push_back(beta * static_cast<double>(j) / static_cast<double>(denom));
      out.push_back(-beta * static_cast<double>(j) / static_cast<double>(denom));
    }
  }
  return out;
}

// Successor states of `cell` under disturbance xi and any admissible control,
// before clipping to Q.
IntervalSet successors(const PiecewiseLinearMap& f, const ControlParams& p, Interval cell, double xi) {
  return dilate(translate(f.image_of(IntervalSet(cell)), xi), p.u_bound);
}

}  // namespace

std::optional<EscapeCertificate> adversarial_escape(const PiecewiseLinearMap& f,
                                                    const ControlParams& p, const IntervalSet& s,
                                                    double x0, const EscapeOptions& opts) {
  p.validate();
  if (!p.target.contains(x0)) throw std::invalid_argument("x0 is outside Q");
  if (s.contains(x0)) throw std::invalid_argument("x0 is in the safe set; no escape exists");

  // levels[k]: states that can be kept in Q for k more steps.
  const IntervalSet q = p.target_set();
  std::vector<IntervalSet> levels{q};
  while (levels.back().contains(x0)) {
    if (levels.size() > opts.max_depth) return std::nullopt;
    levels.push_back(sculpt_step(levels.back(), f, p, true));
  }
  const std::size_t depth = levels.size() - 1;
  const auto xis = candidate_disturbances(p.beta, opts.xi_levels);

  EscapeCertificate cert;
  cert.x0 = x0;
  cert.depth = depth;
  IntervalSet reach(Interval{x0, x0});
  for (std::size_t n = 0; n < depth; ++n) {
    const IntervalSet& avoid = levels[depth - n - 1];
    EscapeCertificate::Step step{reach, {}};
    std::vector<Interval> next;
    std::function<bool(Interval, int)> cover = [&](Interval cell, int splits_left) {
      for (double xi : xis) {
        IntervalSet succ = successors(f, p, cell, xi);
        if (!intersect(succ, avoid).empty()) continue;
        step.policy.push_back({cell, xi});
        for (const auto& iv : intersect(succ, q)) next.push_back(iv);
        return true;
      }
      if (splits_left == 0 || cell.width() <= 0.0) return false;
      const double mid = 0.5 * (cell.lo + cell.hi);
      return cover({cell.lo, mid}, splits_left - 1) && cover({mid, cell.hi}, splits_left - 1);
    };
    for (const auto& comp : reach)
      if (!cover(comp, opts.max_splits)) return std::nullopt;
    cert.steps.push_back(std::move(step));
    reach = IntervalSet::normalize(std::move(next));
  }
  cert.steps.push_back({reach, {}});

  // Play the policy against a controller that always moves to the state with
  // the longest remaining survival.
  double x = x0;
  cert.play_states.push_back(x);
  for (std::size_t n = 0; n < depth; ++n) {
    const auto& policy = cert.steps[n].policy;
    auto cell = std::min_element(policy.begin(), policy.end(), [x](const auto& l, const auto& r) {
      auto dist = [x](Interval iv) { return x < iv.lo ? iv.lo - x : (x > iv.hi ? x - iv.hi : 0.0); };
      return dist(l.states) < dist(r.states);
    });
    const double xi = cell->xi;
    const double y = f(std::clamp(x, f.domain().lo, f.domain().hi)) + xi;
    const IntervalSet window = intersect(IntervalSet(Interval{y - p.u_bound, y + p.u_bound}), q);
    double u = 0.0;
    if (!window.empty()) {
      for (std::size_t j = levels.size(); j-- > 0;) {
        const IntervalSet options = intersect(window, levels[j]);
        if (!options.empty()) {
          u = std::clamp(nearest_point(options, y) - y, -p.u_bound, p.u_bound);
          break;
        }
      }
    }
    x = y + u;
    cert.play_disturbances.push_back(xi);
    cert.play_controls.push_back(u);
    cert.play_states.push_back(x);
    if (window.empty()) break;
  }

  if (!verify_escape(cert, f, p)) return std::nullopt;
  return cert;
}

bool verify_escape(const EscapeCertificate& cert, const PiecewiseLinearMap& f, const ControlParams& p) {
  constexpr double slack = 1e-12;
  if (cert.steps.size() != cert.depth + 1) return false;
  if (!(cert.steps.front().reachable == IntervalSet(Interval{cert.x0, cert.x0}))) return false;
  if (!cert.steps.back().reachable.empty()) return false;
  const IntervalSet q = p.target_set();
  for (std::size_t n = 0; n < cert.depth; ++n) {
    const auto& step = cert.steps[n];
    std::vector<Interval> cells;
    for (const auto& c : step.policy) {
      if (!(std::abs(c.xi) <= p.beta)) return false;
      cells.push_back(c.states);
      const IntervalSet succ = intersect(successors(f, p, c.states, c.xi), q);
      if (!succ.is_subset_of(cert.steps[n + 1].reachable, slack)) return false;
    }
    if (!step.reachable.is_subset_of(IntervalSet::normalize(std::move(cells)), slack)) return false;
  }
  return true;
}

}  // namespace pctl
