#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pctl {

/// Gaps at or below this width (state units) are closed by normalization.
inline constexpr double kMergeEps = 1e-12;

/// Closed interval [lo, hi]; lo == hi is a single point.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A compact subset of the real line stored as a sorted list of disjoint
/// closed intervals. Adjacent components are always separated by more than
/// kMergeEps. Values are immutable once built; every operation returns a new
/// canonical set.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Interval single);

  /// Sorts and merges `raw`. Throws std::invalid_argument on lo > hi or a
  /// non-finite endpoint.
  static IntervalSet normalize(std::vector<Interval> raw, double merge_eps = kMergeEps);

  const std::vector<Interval>& intervals() const { return parts_; }
  auto begin() const { return parts_.begin(); }
  auto end() const { return parts_.end(); }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  const Interval& operator[](std::size_t k) const { return parts_[k]; }
  const Interval& front() const { return parts_.front(); }
  const Interval& back() const { return parts_.back(); }

  /// Index of the component containing x (within tol), if any.
  std::optional<std::size_t> component_of(double x, double tol = 0.0) const;
  bool contains(double x, double tol = 0.0) const { return component_of(x, tol).has_value(); }
  /// True if every point of *this lies within tol of `other`.
  bool is_subset_of(const IntervalSet& other, double tol = 0.0) const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> parts_;
};

IntervalSet unite(const IntervalSet& x, const IntervalSet& y);
IntervalSet intersect(const IntervalSet& x, const IntervalSet& y);

/// X + u: every point within distance u of X. Throws on u < 0.
IntervalSet dilate(const IntervalSet& x, double u);
/// {y : [y-u, y+u] is inside X}. Components narrower than 2u vanish.
IntervalSet erode(const IntervalSet& x, double u);
IntervalSet translate(const IntervalSet& x, double shift);
/// Closure of bounds \ X.
IntervalSet complement_within(const IntervalSet& x, Interval bounds);

double measure(const IntervalSet& x);
std::size_t num_components(const IntervalSet& x);
/// Smallest gap between adjacent components; nullopt with fewer than two.
std::optional<double> min_gap(const IntervalSet& x);
/// All gaps, gaps[k] = x[k+1].lo - x[k].hi.
std::vector<double> gaps(const IntervalSet& x);

/// Distance from x to the set; +inf for the empty set.
double point_distance(const IntervalSet& set, double x);
/// Closest element of the set; ties at gap midpoints go to the lower side.
/// Throws std::domain_error on an empty set.
double nearest_point(const IntervalSet& set, double x);

struct DirectedDistance {
  double distance = 0.0;
  double witness = 0.0;  // point of `from` farthest from `to`
};

/// sup over y in `from` of d(y, to). Both sets must be nonempty.
DirectedDistance directed_hausdorff(const IntervalSet& from, const IntervalSet& to);
double hausdorff_distance(const IntervalSet& x, const IntervalSet& y);

/// Checks the sorted/separated invariants; used by tests and debug builds.
bool is_canonical(std::span<const Interval> parts, double merge_eps = kMergeEps);

}  // namespace pctl
