#pragma once

#include <cstddef>
#include <vector>

#include "pctl/interval_set.hpp"
#include "pctl/map_model.hpp"

namespace pctl {

/// Control bound U, disturbance bound beta and target Q = [A, B].
struct ControlParams {
  double u_bound = 0.0;
  double beta = 0.0;
  Interval target{};

  /// Throws std::invalid_argument on non-positive bounds or a degenerate target.
  void validate() const;
  /// The theory assumes U < beta.
  bool outside_regime() const { return u_bound >= beta; }
  IntervalSet target_set() const { return IntervalSet(target); }
};

struct SafeSetOptions {
  double tol = 1e-10;
  long max_iter = 100000;
  bool allow_non_expanding = false;
  /// Re-solve the boundary equations once the iteration has settled.
  bool polish = true;
  /// Components no wider than this are reported as points.
  double point_tol = 1e-6;
};

struct SafeSetResult {
  IntervalSet safe_set;
  long iterations = 0;
  bool converged = false;
  double residual = 0.0;
  /// Mismatch in f(S)+beta = [f(Q)+beta] ∩ [S+U]; 0 for an empty set.
  double maximality_residual = 0.0;
  bool outside_regime = false;
  bool polished = false;
  std::vector<std::size_t> point_components;
};

/// One sculpting step: S ∩ f^{-1}(erode(dilate(S, U), beta)).
IntervalSet sculpt_step(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p,
                        bool allow_non_expanding = false);

/// Largest S ⊆ Q with f(S)+beta ⊆ S+U, from the decreasing iteration started
/// at Q. An empty set with converged == true means no safe set exists.
SafeSetResult maximal_safe_set(const PiecewiseLinearMap& f, const ControlParams& p,
                               const SafeSetOptions& opts = {});

struct SafetyReport {
  bool safe = true;
  double worst_violation = 0.0;
  double worst_point = 0.0;  // point of f(S)+beta farthest from S+U
};

SafetyReport verify_safe(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p,
                         double tol);

/// Hausdorff distance between f(S)+beta and [f(Q)+beta] ∩ [S+U]. Throws
/// std::invalid_argument for an empty S.
double verify_maximality(const IntervalSet& s, const PiecewiseLinearMap& f, const ControlParams& p);

/// Grid oracle for the safe-set definition, independent of the interval
/// machinery: Q is sampled at n_grid points, disturbances and controls at
/// n_xi and n_u evenly spaced values. Points are deleted until every
/// surviving x has, for every sampled xi, some sampled u putting f(x)+xi+u
/// within one grid spacing of a surviving point.
std::vector<bool> brute_force_safe_grid(const PiecewiseLinearMap& f, const ControlParams& p,
                                        std::size_t n_grid, std::size_t n_xi, std::size_t n_u);

/// Runs of surviving grid points as [first, last] coordinates.
std::vector<Interval> grid_components(const std::vector<bool>& mask, Interval target);

}  // namespace pctl
