#include "pctl/safeset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pctl/boundary_system.hpp"

namespace pctl {

void ControlParams::validate() const {
  if (!(u_bound > 0.0) || !std::isfinite(u_bound))
    throw std::invalid_argument("control bound U must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("disturbance bound beta must be positive");
  if (!(target.lo < target.hi)) throw std::invalid_argument("target Q must be a non-degenerate interval");
}

namespace {

void check_inputs(const PiecewiseLinearMap& f, const ControlParams& p, bool allow_non_expanding) {
  p.validate();
  if (!f.expanding() && !allow_non_expanding)
    throw std::invalid_argument("map is not expanding (|slope| <= 1 on some piece); pass the override to proceed");
  const Interval dom = f.domain();
  if (p.target.lo < dom.lo || p.target.hi > dom.hi)
    throw std::invalid_argument("target Q is not inside the map domain");
}

// Re-solve the boundary equations exactly; accept only a nearby set that is
// still safe.
bool polish(IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p, double tol) {
  const double max_shift = std::max(1e-7, 1e3 * tol);
  try {
    const auto sys = build_boundary_system(f, s, p, {std::max(1e-8, 100.0 * tol)});
    const auto pts = sys.solve_at(f, p.u_bound);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(pts[i]) || std::abs(pts[i] - sys.points[i]) > max_shift) return false;
      if (i > 0 && pts[i] < pts[i - 1]) return false;
    }
    if (pts.front() < p.target.lo || pts.back() > p.target.hi) return false;
    IntervalSet candidate = set_from_points(pts);
    if (candidate.size() != s.size()) return false;
    if (!verify_safe(candidate, f, p, 1e-12).safe) return false;
    s = std::move(candidate);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

IntervalSet sculpt_step(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p,
                        bool allow_non_expanding) {
  check_inputs(f, p, allow_non_expanding);
  if (s.empty()) return {};
  if (!s.is_subset_of(p.target_set(), kMergeEps)) throw std::invalid_argument("sculpt_step needs S inside Q");
  const IntervalSet landing = erode(dilate(s, p.u_bound), p.beta);
  return intersect(s, f.preimage_of(landing));
}

SafeSetResult maximal_safe_set(const PiecewiseLinearMap& f, const ControlParams& p,
                               const SafeSetOptions& opts) {
  check_inputs(f, p, opts.allow_non_expanding);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  SafeSetResult res;
  res.outside_regime = p.outside_regime();
  IntervalSet s = p.target_set();
  for (long it = 1; it <= opts.max_iter; ++it) {
    IntervalSet next = sculpt_step(s, f, p, true);
    res.iterations = it;
    if (next.empty()) {
      s = std::move(next);
      res.converged = true;
      res.residual = 0.0;
      break;
    }
    res.residual = hausdorff_distance(next, s);
    s = std::move(next);
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  if (res.converged && !s.empty() && opts.polish) res.polished = polish(s, f, p, opts.tol);
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k].width() <= opts.point_tol) res.point_components.push_back(k);
  if (!s.empty()) res.maximality_residual = verify_maximality(s, f, p);
  res.safe_set = std::move(s);
  return res;
}

SafetyReport verify_safe(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p,
                         double tol) {
  if (s.empty()) return {};
  const IntervalSet reach = dilate(f.image_of(s), p.beta);
  const IntervalSet cover = dilate(s, p.u_bound);
  const auto worst = directed_hausdorff(reach, cover);
  return {worst.distance <= tol, worst.distance, worst.witness};
}

double verify_maximality(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p) {
  if (s.empty()) throw std::invalid_argument("maximality check needs a nonempty set");
  const IntervalSet lhs = dilate(f.image_of(s), p.beta);
  const IntervalSet rhs =
      intersect(dilate(f.image_of(p.target_set()), p.beta), dilate(s, p.u_bound));
  if (rhs.empty()) return std::numeric_limits<double>::infinity();
  return hausdorff_distance(lhs, rhs);
}

std::vector<bool> brute_force_safe_grid(const PiecewiseLinearMap& f, const ControlParams& p,
                                        std::size_t n_grid, std::size_t n_xi, std::size_t n_u) {
  p.validate();
  if (n_grid < 2 || n_xi < 1 || n_u < 1) throw std::invalid_argument("grid sizes too small");
  const double a = p.target.lo;
  const double h = (p.target.hi - p.target.lo) / static_cast<double>(n_grid - 1);
  auto samples = [](double bound, std::size_t n) {
    std::vector<double> v(n, 0.0);
    for (std::size_t j = 0; j < n && n > 1; ++j)
      v[j] = -bound + 2.0 * bound * static_cast<double>(j) / static_cast<double>(n - 1);
    return v;
  };
  const auto xis = samples(p.beta, n_xi);
  auto us = samples(p.u_bound, n_u);
  // Smallest corrections first: most landings need little or no control.
  std::stable_sort(us.begin(), us.end(), [](double l, double r) { return std::abs(l) < std::abs(r); });

  std::vector<double> xs(n_grid), fx(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    xs[i] = a + h * static_cast<double>(i);
    fx[i] = f(std::min(xs[i], p.target.hi));
  }
  std::vector<bool> alive(n_grid, true);
  const double reach = h * (1.0 + 1e-9);
  const auto last = static_cast<long>(n_grid) - 1;
  auto lands = [&](double t) {
    const long c = std::lround((t - a) / h);
    for (long m = c - 1; m <= c + 1; ++m) {
      if (m < 0 || m > last) continue;
      if (alive[static_cast<std::size_t>(m)] && std::abs(t - xs[static_cast<std::size_t>(m)]) <= reach)
        return true;
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n_grid; ++i) {
      if (!alive[i]) continue;
      for (double xi : xis) {
        const double y = fx[i] + xi;
        const bool ok = std::any_of(us.begin(), us.end(), [&](double u) { return lands(y + u); });
        if (!ok) {
          alive[i] = false;
          changed = true;
          break;
        }
      }
    }
  }
  return alive;
}

std::vector<Interval> grid_components(const std::vector<bool>& mask, Interval target) {
  std::vector<Interval> out;
  if (mask.size() < 2) return out;
  const double h = (target.hi - target.lo) / static_cast<double>(mask.size() - 1);
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < mask.size() && mask[j + 1]) ++j;
    out.push_back({target.lo + h * static_cast<double>(i), target.lo + h * static_cast<double>(j)});
    i = j + 1;
  }
  return out;
}

}  // namespace pctl
