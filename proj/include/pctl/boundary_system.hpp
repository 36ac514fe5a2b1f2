#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pctl/interval_set.hpp"
#include "pctl/map_model.hpp"
#include "pctl/safeset.hpp"

namespace pctl {

/// How one boundary point of a safe set is pinned.
///   Fixed:  the point sits on the boundary of Q and f(x) is free (x = const).
///   Paired: the beta-ball around f(x) touches the edge of S+U, so
///           f(x) = x_target + beta_sign*beta + u_sign*U.
struct BoundaryEquation {
  enum class Kind { Fixed, Paired };
  Kind kind = Kind::Fixed;
  std::size_t target = 0;  // index into BoundarySystem::points (Paired)
  int beta_sign = 0;
  int u_sign = 0;
  double fixed_value = 0.0;  // (Fixed)
};

/// Boundary points of S (a1, b1, a2, b2, ...) with one equation each. The
/// active variables are the pairing targets; every other point follows from
/// them. In the active variables the system reads F(X) = M X + Delta(U).
struct BoundarySystem {
  std::vector<double> points;
  std::vector<BoundaryEquation> equations;
  std::vector<std::size_t> pieces;  // map piece of each point
  std::vector<std::size_t> active;  // sorted point indices
  double beta = 0.0;
  double u_bound = 0.0;
  Interval target{};

  std::size_t num_active() const { return active.size(); }
  /// 0-1 matrix over the active variables; row i has a 1 at the column of
  /// the pairing target of active[i] (none for a Fixed point).
  Eigen::MatrixXd pairing_matrix() const;
  /// dDelta/dU over the active variables.
  Eigen::VectorXd offset_derivative() const;
  /// J - M with J = diag(f'(x_i)).
  Eigen::MatrixXd jacobian(const PiecewiseLinearMap& f) const;

  /// Exact solve for a piecewise-linear map with each point held on its
  /// current piece; returns all boundary points at control bound u.
  std::vector<double> solve_at(const PiecewiseLinearMap& f, double u) const;
  /// d(active points)/dU from (J - M) X' = dDelta/dU.
  Eigen::VectorXd active_derivative(const PiecewiseLinearMap& f) const;

  std::string describe() const;
};

struct BoundaryOptions {
  /// Ball-touching and Q-boundary tolerance (state units).
  double touch_tol = 1e-8;
};

/// Classifies every boundary point of a safe set. Throws std::runtime_error
/// when a point matches neither case (non-maximal or unconverged S) or when
/// the beta-ball around f(x) is not inside S+U.
BoundarySystem build_boundary_system(const PiecewiseLinearMap& f, const IntervalSet& s,
                                     const ControlParams& p, const BoundaryOptions& opts = {});

/// Interval set from a flat list a1, b1, a2, b2, ... (no normalization of
/// inverted pairs; those throw).
IntervalSet set_from_points(const std::vector<double>& points);

}  // namespace pctl
