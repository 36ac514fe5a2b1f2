#include "pctl/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pctl {

std::vector<std::size_t> check_B1(const IntervalSet& s, double point_tol) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k].width() <= point_tol) out.push_back(k);
  return out;
}

std::vector<std::size_t> check_B2(const IntervalSet& s, double u_bound, double gap_tol) {
  std::vector<std::size_t> out;
  const auto g = gaps(s);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(g[k] - 2.0 * u_bound) <= gap_tol) out.push_back(k);
  return out;
}

std::string to_string(BifurcationEvent::Kind kind) {
  switch (kind) {
    case BifurcationEvent::Kind::VanishingPoint: return "vanishing-point";
    case BifurcationEvent::Kind::Split: return "split";
    case BifurcationEvent::Kind::Unflagged: return "unflagged";
  }
  return "unknown";
}

namespace {

IntervalSet safe_set_at(const PiecewiseLinearMap& f, Interval q, double u, double beta,
                        const SafeSetOptions& opts) {
  return maximal_safe_set(f, ControlParams{u, beta, q}, opts).safe_set;
}

bool discontinuous(const IntervalSet& a, const IntervalSet& b, double du, double jump_factor) {
  if (a.size() != b.size()) return true;
  if (a.empty()) return false;
  return hausdorff_distance(a, b) > jump_factor * du;
}

}  // namespace

BifurcationEvent locate_bifurcation(const PiecewiseLinearMap& f, Interval q, double beta, double u_a,
                                    double u_b, const BifurcationOptions& opts) {
  double lo = std::min(u_a, u_b), hi = std::max(u_a, u_b);
  IntervalSet s_lo = safe_set_at(f, q, lo, beta, opts.safeset);
  IntervalSet s_hi = safe_set_at(f, q, hi, beta, opts.safeset);
  while (hi - lo > opts.locate_tol) {
    const double mid = 0.5 * (lo + hi);
    IntervalSet s_mid = safe_set_at(f, q, mid, beta, opts.safeset);
    // Keep the half that still carries the jump; component counts decide
    // first, Hausdorff size breaks ties.
    const bool left_count = s_lo.size() != s_mid.size();
    const bool right_count = s_mid.size() != s_hi.size();
    bool go_left;
    if (left_count != right_count) {
      go_left = left_count;
    } else {
      const double dl = (s_lo.empty() || s_mid.empty()) ? (s_lo.empty() == s_mid.empty() ? 0.0 : 1.0)
                                                         : hausdorff_distance(s_lo, s_mid);
      const double dr = (s_mid.empty() || s_hi.empty()) ? (s_mid.empty() == s_hi.empty() ? 0.0 : 1.0)
                                                         : hausdorff_distance(s_mid, s_hi);
      go_left = dl >= dr;
    }
    if (go_left) {
      hi = mid;
      s_hi = std::move(s_mid);
    } else {
      lo = mid;
      s_lo = std::move(s_mid);
    }
  }

  BifurcationEvent ev;
  ev.u_lo = lo;
  ev.u_hi = hi;
  ev.u_at = hi;
  ev.beta_at = beta;
  ev.components_above = s_hi.size();
  ev.components_below = s_lo.size();
  const auto b1 = check_B1(s_hi, opts.point_tol);
  const auto b2 = check_B2(s_hi, hi, opts.gap_tol);
  std::ostringstream detail;
  detail.precision(10);
  if (!b1.empty()) {
    ev.kind = BifurcationEvent::Kind::VanishingPoint;
    ev.component_index = b1.front();
    detail << "component " << b1.front() << " has width " << s_hi[b1.front()].width();
  } else if (!b2.empty()) {
    ev.kind = BifurcationEvent::Kind::Split;
    ev.component_index = b2.front();
    detail << "gap after component " << b2.front() << " minus 2U is "
           << gaps(s_hi)[b2.front()] - 2.0 * hi;
  } else {
    ev.kind = BifurcationEvent::Kind::Unflagged;
    detail << "no B1/B2 condition at the located point";
  }
  detail << "; components " << ev.components_above << " above, " << ev.components_below << " below";
  ev.detail = detail.str();
  return ev;
}

LineScan scan_bifurcations(const PiecewiseLinearMap& f, Interval q, double beta,
                           const std::vector<double>& u_grid, const BifurcationOptions& opts) {
  LineScan scan;
  scan.beta = beta;
  std::vector<IntervalSet> sets;
  for (double u : u_grid) {
    IntervalSet s = safe_set_at(f, q, u, beta, opts.safeset);
    scan.samples.push_back({u, s.size(), measure(s), check_B1(s, opts.point_tol),
                            check_B2(s, u, opts.gap_tol)});
    sets.push_back(std::move(s));
  }
  for (std::size_t k = 1; k < sets.size(); ++k) {
    const double du = std::abs(u_grid[k] - u_grid[k - 1]);
    if (discontinuous(sets[k - 1], sets[k], du, opts.jump_factor))
      scan.events.push_back(locate_bifurcation(f, q, beta, u_grid[k - 1], u_grid[k], opts));
  }
  return scan;
}

std::vector<double> grid_points(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t k = 1; k <= n; ++k)
    out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n));
  return out;
}

std::vector<SweepCell> sweep(const PiecewiseLinearMap& f, Interval q, const std::vector<double>& u_grid,
                             const std::vector<double>& beta_grid, const SweepOptions& opts) {
  std::vector<SweepCell> cells;
  for (double u : u_grid)
    for (double b : beta_grid) {
      SweepCell c;
      c.u_bound = u;
      c.beta = b;
      c.outside_regime = u >= b;
      cells.push_back(c);
    }
  std::sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return a.u_bound < b.u_bound || (a.u_bound == b.u_bound && a.beta < b.beta);
  });

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepCell& c = cells[i];
      if (c.outside_regime && !opts.include_outside_regime) continue;
      c.computed = true;
      try {
        const auto res = maximal_safe_set(f, ControlParams{c.u_bound, c.beta, q}, opts.safeset);
        c.converged = res.converged;
        c.exists = !res.safe_set.empty();
        c.measure = measure(res.safe_set);
        c.n_components = res.safe_set.size();
        if (!res.converged) c.error = "not converged";
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  unsigned jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, cells.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  return cells;
}

UMinResult u_min(const PiecewiseLinearMap& f, Interval q, double beta, double tol,
                 const SafeSetOptions& opts) {
  if (!(beta > 0.0) || !(tol > 0.0)) throw std::invalid_argument("u_min needs beta > 0 and tol > 0");
  UMinResult res;
  res.beta = beta;
  auto exists = [&](double u) {
    ++res.iterations;
    return !safe_set_at(f, q, u, beta, opts).empty();
  };
  if (!exists(beta)) return res;
  double lo = 0.0, hi = beta;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (exists(mid))
      hi = mid;
    else
      lo = mid;
  }
  res.u_min = hi;
  return res;
}

SlopeReport umin_slope_check(const PiecewiseLinearMap& f, Interval q, double beta_lo, double beta_hi,
                             std::size_t n_samples, double tol, const BifurcationOptions& opts) {
  if (!(beta_lo > 0.0) || !(beta_hi >= beta_lo)) throw std::invalid_argument("need 0 < beta_lo <= beta_hi");
  SlopeReport rep;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double beta = n_samples == 1 ? beta_lo
                                       : beta_lo + (beta_hi - beta_lo) * static_cast<double>(k) /
                                                       static_cast<double>(n_samples - 1);
    SlopeSample smp;
    smp.beta = beta;
    smp.u_min = u_min(f, q, beta, tol, opts.safeset).u_min;
    if (smp.u_min) {
      const IntervalSet s = safe_set_at(f, q, *smp.u_min, beta, opts.safeset);
      smp.split_flagged = !check_B2(s, *smp.u_min, opts.gap_tol).empty();
    }
    rep.samples.push_back(smp);
  }

  auto fit = [&](std::size_t from, std::size_t to) {
    const std::size_t n = to - from;
    double mb = 0.0, mu = 0.0;
    for (std::size_t i = from; i < to; ++i) {
      mb += rep.samples[i].beta;
      mu += *rep.samples[i].u_min;
    }
    mb /= static_cast<double>(n);
    mu /= static_cast<double>(n);
    double sbb = 0.0, sbu = 0.0;
    for (std::size_t i = from; i < to; ++i) {
      const double db = rep.samples[i].beta - mb;
      sbb += db * db;
      sbu += db * (*rep.samples[i].u_min - mu);
    }
    if (sbb <= 0.0) return;
    SlopeSegment seg{rep.samples[from].beta, rep.samples[to - 1].beta, n, sbu / sbb, 0.0};
    seg.deviation = std::abs(seg.slope - 1.0);
    rep.max_deviation = std::max(rep.max_deviation, seg.deviation);
    rep.segments.push_back(seg);
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i <= rep.samples.size(); ++i) {
    const bool cut = i == rep.samples.size() || rep.samples[i].split_flagged || !rep.samples[i].u_min;
    if (!cut) continue;
    if (i - start >= 2) fit(start, i);
    start = i + 1;
  }
  rep.sufficient_data = !rep.segments.empty();
  return rep;
}

JacobianReport jacobian_nonsingular(const BoundarySystem& sys, const PiecewiseLinearMap& f) {
  JacobianReport rep;
  const Eigen::MatrixXd jm = sys.jacobian(f);
  const Eigen::MatrixXd m = sys.pairing_matrix();
  std::vector<int> targets(sys.num_active(), -1);
  for (std::size_t r = 0; r < sys.num_active(); ++r) {
    rep.slopes.push_back(f.derivative_at(sys.points[sys.active[r]]));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(static_cast<Eigen::Index>(r), c) != 0.0) targets[r] = static_cast<int>(c);
  }
  rep.det = sys.num_active() == 0 ? 1.0 : jm.determinant();
  rep.factors = det_factors(rep.slopes, targets);
  rep.det_from_factors = product_of(rep.factors);
  rep.nonsingular = rep.det != 0.0 && std::isfinite(rep.det);
  return rep;
}

namespace {

struct Structure {
  std::vector<double> gap_margin;  // gap_k - 2U
};

Structure structure_of(const std::vector<double>& pts, double u) {
  Structure st;
  for (std::size_t i = 2; i + 1 < pts.size() + 1 && i < pts.size(); i += 2)
    st.gap_margin.push_back(pts[i] - pts[i - 1] - 2.0 * u);
  return st;
}

}  // namespace

TraceRecord trace_boundaries(const PiecewiseLinearMap& f, const ControlParams& p, double u_from,
                             double u_to, double du, const TraceOptions& opts) {
  p.validate();
  if (!(du > 0.0)) throw std::invalid_argument("continuation step must be positive");
  const auto& bo = opts.bifurcation;
  const double dir = u_to >= u_from ? 1.0 : -1.0;
  TraceRecord rec;

  auto recompute = [&](double u) { return safe_set_at(f, p.target, u, p.beta, bo.safeset); };
  ControlParams cp = p;
  cp.u_bound = u_from;

  double u = u_from;
  IntervalSet s = recompute(u);
  if (s.empty()) {
    rec.halted = "safe set is empty at the starting U";
    return rec;
  }
  if (!check_B1(s, bo.point_tol).empty() || !check_B2(s, u, bo.gap_tol).empty()) {
    rec.halted = "bifurcation condition holds at the starting U";
    return rec;
  }

  BoundarySystem sys;
  auto reseed = [&](const IntervalSet& set, double at) {
    cp.u_bound = at;
    sys = build_boundary_system(f, set, cp);
  };
  auto record = [&](double at, std::optional<double> mismatch) {
    TraceSample smp;
    smp.u = at;
    smp.points = sys.points;
    smp.active = sys.active;
    try {
      const Eigen::VectorXd d = sys.active_derivative(f);
      smp.active_derivative.assign(d.data(), d.data() + d.size());
    } catch (const std::exception&) {
    }
    smp.recompute_mismatch = mismatch;
    rec.samples.push_back(std::move(smp));
  };

  try {
    reseed(s, u);
  } catch (const std::exception& e) {
    rec.halted = std::string("cannot build boundary system: ") + e.what();
    return rec;
  }
  record(u, std::nullopt);

  std::size_t step = 0;
  while (dir * (u_to - u) > 1e-15) {
    const double un = u + dir * std::min(du, std::abs(u_to - u));
    const std::vector<double> pts = sys.solve_at(f, un);

    bool suspicious = false;
    for (std::size_t i = 0; i < pts.size() && !suspicious; ++i) {
      if (!std::isfinite(pts[i]) || pts[i] < p.target.lo - 1e-12 || pts[i] > p.target.hi + 1e-12) {
        suspicious = true;
        break;
      }
      if (f.piece_of(std::clamp(pts[i], p.target.lo, p.target.hi)) != sys.pieces[i]) suspicious = true;
      if (i % 2 == 1 && pts[i] - pts[i - 1] <= bo.point_tol) suspicious = true;
    }
    if (!suspicious) {
      const auto before = structure_of(sys.points, u).gap_margin;
      const auto after = structure_of(pts, un).gap_margin;
      for (std::size_t k = 0; k < after.size(); ++k)
        if (std::abs(after[k]) <= bo.gap_tol || (before[k] > 0.0) != (after[k] > 0.0)) suspicious = true;
    }

    ++step;
    const bool check_now = opts.check_every > 0 && step % opts.check_every == 0;
    if (!suspicious && !check_now) {
      sys.points = pts;
      u = un;
      record(u, std::nullopt);
      continue;
    }

    const IntervalSet s_prev = set_from_points(sys.points);
    const IntervalSet s_next = recompute(un);
    if (discontinuous(s_prev, s_next, std::abs(un - u), bo.jump_factor)) {
      rec.events.push_back(locate_bifurcation(f, p.target, p.beta, u, un, bo));
      if (opts.stop_at_first_event) {
        rec.halted = "bifurcation located";
        return rec;
      }
    }
    std::optional<double> mismatch;
    if (!suspicious && !s_next.empty()) {
      const IntervalSet continued = set_from_points(pts);
      if (continued.size() == s_next.size()) {
        mismatch = hausdorff_distance(continued, s_next);
        rec.max_mismatch = std::max(rec.max_mismatch, *mismatch);
      }
    }
    u = un;
    if (s_next.empty()) {
      rec.halted = "safe set vanished";
      return rec;
    }
    try {
      reseed(s_next, u);
      if (suspicious) ++rec.reseeds;
    } catch (const std::exception& e) {
      rec.halted = std::string("cannot rebuild boundary system: ") + e.what();
      return rec;
    }
    record(u, mismatch);
  }
  return rec;
}

}  // namespace pctl
