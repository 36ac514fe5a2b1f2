#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pctl/boundary_system.hpp"
#include "pctl/interval_set.hpp"
#include "pctl/map_model.hpp"
#include "pctl/safeset.hpp"

namespace pctl {

inline constexpr double kPointTol = 1e-6;
inline constexpr double kGapTol = 1e-6;

/// Indices of components no wider than point_tol (condition B1).
std::vector<std::size_t> check_B1(const IntervalSet& s, double point_tol = kPointTol);
/// Indices k such that |gap(k, k+1) - 2U| <= gap_tol (condition B2).
std::vector<std::size_t> check_B2(const IntervalSet& s, double u_bound, double gap_tol = kGapTol);

struct BifurcationEvent {
  enum class Kind { VanishingPoint, Split, Unflagged };
  Kind kind = Kind::Unflagged;
  double u_at = 0.0;
  double beta_at = 0.0;
  std::size_t component_index = 0;
  std::string detail;
  double u_lo = 0.0;  // bracket in U
  double u_hi = 0.0;
  std::size_t components_above = 0;  // at u_hi
  std::size_t components_below = 0;  // at u_lo
};

std::string to_string(BifurcationEvent::Kind kind);

struct BifurcationOptions {
  SafeSetOptions safeset{};
  double point_tol = kPointTol;
  double gap_tol = kGapTol;
  /// Bisection stops once the bracket is this narrow.
  double locate_tol = 1e-9;
  /// Hausdorff jumps larger than this multiple of the U-step count as
  /// discontinuities.
  double jump_factor = 10.0;
};

/// Given a discontinuity of S between u_a and u_b at fixed beta, bisects to
/// locate_tol and classifies it from the set just above the bracket.
BifurcationEvent locate_bifurcation(const PiecewiseLinearMap& f, Interval q, double beta, double u_a,
                                    double u_b, const BifurcationOptions& opts = {});

struct LineSample {
  double u = 0.0;
  std::size_t n_components = 0;
  double measure = 0.0;
  std::vector<std::size_t> b1;
  std::vector<std::size_t> b2;
};

struct LineScan {
  double beta = 0.0;
  std::vector<LineSample> samples;
  std::vector<BifurcationEvent> events;
};

/// Computes S along a U-grid at fixed beta; each discontinuity between
/// neighbouring samples becomes a located event.
LineScan scan_bifurcations(const PiecewiseLinearMap& f, Interval q, double beta,
                           const std::vector<double>& u_grid, const BifurcationOptions& opts = {});

struct SweepCell {
  double u_bound = 0.0;
  double beta = 0.0;
  bool exists = false;
  double measure = 0.0;
  std::size_t n_components = 0;
  bool outside_regime = false;
  bool computed = false;
  bool converged = false;
  std::string error;
};

struct SweepOptions {
  SafeSetOptions safeset{};
  unsigned jobs = 0;  // 0: hardware concurrency
  bool include_outside_regime = false;
};

/// One cell per (u, beta) pair, sorted by (u, beta). Cells are independent
/// and run on a thread pool; a failing cell records its error.
std::vector<SweepCell> sweep(const PiecewiseLinearMap& f, Interval q, const std::vector<double>& u_grid,
                             const std::vector<double>& beta_grid, const SweepOptions& opts = {});

/// lo + k (hi - lo) / n for k = 1..n.
std::vector<double> grid_points(double lo, double hi, std::size_t n);

struct UMinResult {
  double beta = 0.0;
  std::optional<double> u_min;  // nullopt: no safe set even at U = beta
  int iterations = 0;
};

/// Bisection on U in (0, beta] for the smallest U with a nonempty safe set.
UMinResult u_min(const PiecewiseLinearMap& f, Interval q, double beta, double tol,
                 const SafeSetOptions& opts = {});

struct SlopeSample {
  double beta = 0.0;
  std::optional<double> u_min;
  bool split_flagged = false;
};

struct SlopeSegment {
  double beta_from = 0.0;
  double beta_to = 0.0;
  std::size_t n_points = 0;
  double slope = 0.0;
  double deviation = 0.0;  // |slope - 1|
};

struct SlopeReport {
  std::vector<SlopeSample> samples;
  std::vector<SlopeSegment> segments;
  bool sufficient_data = false;
  double max_deviation = 0.0;
};

/// Samples u_min on an even beta grid, cuts the graph at split-flagged
/// samples and fits a least-squares slope to each remaining run.
SlopeReport umin_slope_check(const PiecewiseLinearMap& f, Interval q, double beta_lo, double beta_hi,
                             std::size_t n_samples, double tol, const BifurcationOptions& opts = {});

/// Factor of det(D - M): either d_i or (prod_{i in cycle} d_i) - 1.
struct DetFactor {
  std::vector<std::size_t> indices;
  bool cycle = false;
  double value = 0.0;
};

/// det(D - M) for D = diag(d) and a 0-1 matrix M with at most one 1 per row,
/// split into factors by peeling zero columns and then cycles.
/// row_target[i] is the column of row i's 1, or -1.
std::vector<DetFactor> det_factors(const std::vector<double>& d, const std::vector<int>& row_target);
double product_of(const std::vector<DetFactor>& factors);
/// Leibniz expansion; for n <= 8.
double leibniz_det(const std::vector<std::vector<double>>& a);

struct JacobianReport {
  double det = 0.0;              // LU determinant of J - M
  double det_from_factors = 0.0;
  std::vector<DetFactor> factors;
  std::vector<double> slopes;  // f'(x_i) for the active variables
  bool nonsingular = false;
};

JacobianReport jacobian_nonsingular(const BoundarySystem& sys, const PiecewiseLinearMap& f);

struct DetFactorReport {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  bool passed() const { return failures == 0 && cases > 0; }
};

/// Compares det_factors against leibniz_det for n = 1..n_max. Shapes with at
/// most 625 valid M are enumerated exhaustively, larger ones sampled
/// `trials` times; each M is paired with `trials` random diagonals.
DetFactorReport det_factor_check(std::size_t n_max, std::size_t trials, std::uint64_t seed = 1);

struct TraceSample {
  double u = 0.0;
  std::vector<double> points;
  std::vector<std::size_t> active;
  std::vector<double> active_derivative;
  std::optional<double> recompute_mismatch;
};

struct TraceOptions {
  BifurcationOptions bifurcation{};
  std::size_t check_every = 10;
  bool stop_at_first_event = true;
};

struct TraceRecord {
  std::vector<TraceSample> samples;
  std::vector<BifurcationEvent> events;
  double max_mismatch = 0.0;
  std::size_t reseeds = 0;
  std::string halted;  // empty when u_to was reached
};

/// Continues the boundary points of S in U at fixed beta by exact solves of
/// the boundary system, re-checking against a from-scratch computation
/// every check_every steps. Bifurcations are bracketed to one step and
/// then located by bisection.
TraceRecord trace_boundaries(const PiecewiseLinearMap& f, const ControlParams& p, double u_from,
                             double u_to, double du, const TraceOptions& opts = {});

}  // namespace pctl
