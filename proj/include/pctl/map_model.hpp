#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pctl/interval_set.hpp"

namespace pctl {

/// Continuous piecewise-linear map on [x_0, x_m], given by its values at the
/// breakpoints and linear in between.
class PiecewiseLinearMap {
 public:
  /// Throws std::invalid_argument unless breakpoints are strictly increasing,
  /// finite, and match `values` in length (at least two of each).
  PiecewiseLinearMap(std::vector<double> breakpoints, std::vector<double> values);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t num_pieces() const { return breakpoints_.size() - 1; }
  Interval domain() const { return {breakpoints_.front(), breakpoints_.back()}; }
  double slope(std::size_t piece) const { return slopes_[piece]; }

  /// |slope| > 1 on every piece.
  bool expanding() const { return expanding_; }

  /// Piece containing x; at an interior breakpoint the left piece.
  /// Throws std::out_of_range outside the domain.
  std::size_t piece_of(double x) const;

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;
  /// Slope at x. Throws std::domain_error at an interior breakpoint.
  double derivative_at(double x) const;
  /// Nearest interior breakpoint distance; +inf for a single piece.
  double distance_to_kink(double x) const;

  /// f(X); X must lie in the domain.
  IntervalSet image_of(const IntervalSet& x) const;
  /// f^{-1}(Y) intersected with the domain.
  IntervalSet preimage_of(const IntervalSet& y) const;

 private:
  double eval_on_piece(std::size_t k, double x) const;
  void check_in_domain(double x) const;

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  bool expanding_ = false;
};

/// f(x) = 1.3x on [0, 0.7], 0.91 - 3(x - 0.7) on [0.7, 1].
PiecewiseLinearMap asymmetric_tent();

/// Builtin name ("asymmetric-tent") or a path to a JSON map file of the form
/// {"breakpoints": [...], "values": [...]}.
PiecewiseLinearMap load_map(const std::string& source);
PiecewiseLinearMap parse_map_json(const std::string& text);

}  // namespace pctl
