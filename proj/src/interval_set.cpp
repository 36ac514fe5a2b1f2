#include "pctl/interval_set.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pctl {

namespace {

IntervalSet from_canonical(std::vector<Interval> parts) {
  // Caller already produced sorted, separated parts; normalize is cheap on
  // such input and keeps a single construction path.
  return IntervalSet::normalize(std::move(parts));
}

}  // namespace

IntervalSet::IntervalSet(Interval single) {
  *this = normalize({single});
}

IntervalSet IntervalSet::normalize(std::vector<Interval> raw, double merge_eps) {
  for (const auto& iv : raw) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw std::invalid_argument("interval endpoint is not finite");
    if (iv.lo > iv.hi)
      throw std::invalid_argument("interval has lo > hi: [" + std::to_string(iv.lo) + ", " +
                                  std::to_string(iv.hi) + "]");
  }
  std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  IntervalSet out;
  out.parts_.reserve(raw.size());
  for (const auto& iv : raw) {
    if (!out.parts_.empty() && iv.lo - out.parts_.back().hi <= merge_eps) {
      out.parts_.back().hi = std::max(out.parts_.back().hi, iv.hi);
    } else {
      out.parts_.push_back(iv);
    }
  }
  assert(is_canonical(out.parts_, merge_eps));
  return out;
}

std::optional<std::size_t> IntervalSet::component_of(double x, double tol) const {
  // First component whose (tolerant) upper end reaches x.
  auto it = std::lower_bound(parts_.begin(), parts_.end(), x,
                             [tol](const Interval& iv, double v) { return iv.hi + tol < v; });
  if (it == parts_.end() || !it->contains(x, tol)) return std::nullopt;
  return static_cast<std::size_t>(it - parts_.begin());
}

bool IntervalSet::is_subset_of(const IntervalSet& other, double tol) const {
  for (const auto& iv : parts_) {
    auto k = other.component_of(iv.lo, tol);
    if (!k) return false;
    // With tol > 0 a component of *this may bridge several tolerant components.
    std::size_t j = *k;
    while (iv.hi > other[j].hi + tol) {
      if (j + 1 >= other.size() || other[j + 1].lo - tol > other[j].hi + tol) return false;
      ++j;
    }
  }
  return true;
}

IntervalSet unite(const IntervalSet& x, const IntervalSet& y) {
  std::vector<Interval> raw(x.begin(), x.end());
  raw.insert(raw.end(), y.begin(), y.end());
  return IntervalSet::normalize(std::move(raw));
}

IntervalSet intersect(const IntervalSet& x, const IntervalSet& y) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double lo = std::max(x[i].lo, y[j].lo);
    const double hi = std::min(x[i].hi, y[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (x[i].hi < y[j].hi)
      ++i;
    else
      ++j;
  }
  return from_canonical(std::move(out));
}

IntervalSet dilate(const IntervalSet& x, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("dilation radius must be >= 0");
  std::vector<Interval> out;
  out.reserve(x.size());
  for (const auto& iv : x) out.push_back({iv.lo - u, iv.hi + u});
  return IntervalSet::normalize(std::move(out));
}

IntervalSet erode(const IntervalSet& x, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("erosion radius must be >= 0");
  std::vector<Interval> out;
  for (const auto& iv : x) {
    const double lo = iv.lo + u;
    const double hi = iv.hi - u;
    if (lo <= hi) {
      out.push_back({lo, hi});
    } else if (lo - hi <= kMergeEps) {
      // Width 2u up to roundoff: keep the centre so (X+u)-u still covers X.
      const double mid = 0.5 * (iv.lo + iv.hi);
      out.push_back({mid, mid});
    }
  }
  return from_canonical(std::move(out));
}

IntervalSet translate(const IntervalSet& x, double shift) {
  std::vector<Interval> out;
  out.reserve(x.size());
  for (const auto& iv : x) out.push_back({iv.lo + shift, iv.hi + shift});
  return IntervalSet::normalize(std::move(out));
}

IntervalSet complement_within(const IntervalSet& x, Interval bounds) {
  std::vector<Interval> out;
  double cursor = bounds.lo;
  for (const auto& iv : x) {
    if (iv.hi < bounds.lo) continue;
    if (iv.lo > bounds.hi) break;
    if (iv.lo > cursor) out.push_back({cursor, iv.lo});
    cursor = std::max(cursor, iv.hi);
  }
  if (cursor < bounds.hi) out.push_back({cursor, bounds.hi});
  return IntervalSet::normalize(std::move(out));
}

double measure(const IntervalSet& x) {
  double m = 0.0;
  for (const auto& iv : x) m += iv.width();
  return m;
}

std::size_t num_components(const IntervalSet& x) { return x.size(); }

std::vector<double> gaps(const IntervalSet& x) {
  std::vector<double> g;
  for (std::size_t k = 1; k < x.size(); ++k) g.push_back(x[k].lo - x[k - 1].hi);
  return g;
}

std::optional<double> min_gap(const IntervalSet& x) {
  auto g = gaps(x);
  if (g.empty()) return std::nullopt;
  return *std::min_element(g.begin(), g.end());
}

double point_distance(const IntervalSet& set, double x) {
  if (set.empty()) return std::numeric_limits<double>::infinity();
  return std::abs(nearest_point(set, x) - x);
}

double nearest_point(const IntervalSet& set, double x) {
  if (set.empty()) throw std::domain_error("nearest_point on an empty set");
  const auto& parts = set.intervals();
  auto it = std::lower_bound(parts.begin(), parts.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  if (it == parts.end()) return parts.back().hi;
  if (x >= it->lo) return x;
  if (it == parts.begin()) return it->lo;
  const double below = std::prev(it)->hi;
  const double above = it->lo;
  return (x - below <= above - x) ? below : above;
}

DirectedDistance directed_hausdorff(const IntervalSet& from, const IntervalSet& to) {
  if (from.empty() || to.empty()) throw std::domain_error("Hausdorff distance of an empty set");
  DirectedDistance best{-1.0, from.front().lo};
  auto consider = [&](double y) {
    const double d = point_distance(to, y);
    if (d > best.distance) best = {d, y};
  };
  // d(., to) is piecewise linear; on a component of `from` its maximum is at
  // an endpoint or at the midpoint of a gap of `to`.
  for (const auto& iv : from) {
    consider(iv.lo);
    consider(iv.hi);
  }
  for (std::size_t k = 1; k < to.size(); ++k) {
    const double mid = 0.5 * (to[k - 1].hi + to[k].lo);
    if (from.contains(mid)) consider(mid);
  }
  return best;
}

double hausdorff_distance(const IntervalSet& x, const IntervalSet& y) {
  return std::max(directed_hausdorff(x, y).distance, directed_hausdorff(y, x).distance);
}

bool is_canonical(std::span<const Interval> parts, double merge_eps) {
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!(parts[k].lo <= parts[k].hi)) return false;
    if (k > 0 && !(parts[k].lo - parts[k - 1].hi > merge_eps)) return false;
  }
  return true;
}

}  // namespace pctl
