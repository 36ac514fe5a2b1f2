#include "pctl/boundary_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pctl {

namespace {

// Intercept of the linear piece k: f(x) = slope*x + c.
double piece_intercept(const PiecewiseLinearMap& f, std::size_t k) {
  return f.values()[k] - f.slope(k) * f.breakpoints()[k];
}

}  // namespace

BoundarySystem build_boundary_system(const PiecewiseLinearMap& f, const IntervalSet& s,
                                     const ControlParams& p, const BoundaryOptions& opts) {
  p.validate();
  BoundarySystem sys;
  sys.beta = p.beta;
  sys.u_bound = p.u_bound;
  sys.target = p.target;
  if (s.empty()) return sys;

  for (const auto& iv : s) {
    sys.points.push_back(iv.lo);
    sys.points.push_back(iv.hi);
  }

  // Components of S+U, with the S-boundary point that generates each edge.
  const IntervalSet grown = dilate(s, p.u_bound);
  std::vector<std::size_t> left_src(grown.size()), right_src(grown.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto g = grown.component_of(s[k].lo).value();
    if (std::abs(grown[g].lo - (s[k].lo - p.u_bound)) <= opts.touch_tol) left_src[g] = 2 * k;
    if (std::abs(grown[g].hi - (s[k].hi + p.u_bound)) <= opts.touch_tol) right_src[g] = 2 * k + 1;
  }

  const double tol = opts.touch_tol;
  for (std::size_t i = 0; i < sys.points.size(); ++i) {
    const double x = sys.points[i];
    sys.pieces.push_back(f.piece_of(x));
    const double y = f(x);
    const auto g = grown.component_of(y, tol);
    if (!g || y - p.beta < grown[*g].lo - tol || y + p.beta > grown[*g].hi + tol) {
      std::ostringstream msg;
      msg << "boundary point " << x << ": f(x)+beta ball is not inside S+U";
      throw std::runtime_error(msg.str());
    }
    BoundaryEquation eq;
    if (std::abs((y - p.beta) - grown[*g].lo) <= tol) {
      eq.kind = BoundaryEquation::Kind::Paired;
      eq.target = left_src[*g];
      eq.beta_sign = +1;
      eq.u_sign = -1;
    } else if (std::abs((y + p.beta) - grown[*g].hi) <= tol) {
      eq.kind = BoundaryEquation::Kind::Paired;
      eq.target = right_src[*g];
      eq.beta_sign = -1;
      eq.u_sign = +1;
    } else if (std::abs(x - p.target.lo) <= tol || std::abs(x - p.target.hi) <= tol) {
      eq.kind = BoundaryEquation::Kind::Fixed;
      eq.fixed_value = std::abs(x - p.target.lo) <= tol ? p.target.lo : p.target.hi;
    } else {
      std::ostringstream msg;
      msg << "boundary point " << x
          << " is neither on the boundary of Q nor pinned by a touching ball";
      throw std::runtime_error(msg.str());
    }
    sys.equations.push_back(eq);
  }

  for (const auto& eq : sys.equations)
    if (eq.kind == BoundaryEquation::Kind::Paired) sys.active.push_back(eq.target);
  std::sort(sys.active.begin(), sys.active.end());
  sys.active.erase(std::unique(sys.active.begin(), sys.active.end()), sys.active.end());
  return sys;
}

Eigen::MatrixXd BoundarySystem::pairing_matrix() const {
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& eq = equations[active[r]];
    if (eq.kind != BoundaryEquation::Kind::Paired) continue;
    const auto col = std::lower_bound(active.begin(), active.end(), eq.target) - active.begin();
    m(r, col) = 1.0;
  }
  return m;
}

Eigen::VectorXd BoundarySystem::offset_derivative() const {
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& eq = equations[active[r]];
    if (eq.kind == BoundaryEquation::Kind::Paired) d(r) = eq.u_sign;
  }
  return d;
}

Eigen::MatrixXd BoundarySystem::jacobian(const PiecewiseLinearMap& f) const {
  Eigen::MatrixXd jm = -pairing_matrix();
  for (std::size_t r = 0; r < active.size(); ++r)
    jm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) += f.derivative_at(points[active[r]]);
  return jm;
}

std::vector<double> BoundarySystem::solve_at(const PiecewiseLinearMap& f, double u) const {
  const auto n = static_cast<Eigen::Index>(active.size());
  std::vector<double> out = points;
  if (n > 0) {
    // Row r: slope*x_r - x_target = beta_sign*beta + u_sign*u - c  (Paired)
    //        slope*x_r            = slope*fixed_value              (Fixed)
    Eigen::MatrixXd a = -pairing_matrix();
    Eigen::VectorXd rhs(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t i = active[r];
      const std::size_t k = pieces[i];
      const double s = f.slope(k);
      a(r, r) += s;
      const auto& eq = equations[i];
      if (eq.kind == BoundaryEquation::Kind::Paired)
        rhs(r) = eq.beta_sign * beta + eq.u_sign * u - piece_intercept(f, k);
      else
        rhs(r) = s * eq.fixed_value;
    }
    const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    for (Eigen::Index r = 0; r < n; ++r) out[active[r]] = x(r);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::binary_search(active.begin(), active.end(), i)) continue;
    const auto& eq = equations[i];
    if (eq.kind == BoundaryEquation::Kind::Fixed) {
      out[i] = eq.fixed_value;
    } else {
      const std::size_t k = pieces[i];
      out[i] = (out[eq.target] + eq.beta_sign * beta + eq.u_sign * u - piece_intercept(f, k)) /
               f.slope(k);
    }
  }
  return out;
}

Eigen::VectorXd BoundarySystem::active_derivative(const PiecewiseLinearMap& f) const {
  if (active.empty()) return {};
  return jacobian(f).partialPivLu().solve(offset_derivative());
}

std::string BoundarySystem::describe() const {
  std::ostringstream os;
  auto name = [](std::size_t i) {
    return std::string(i % 2 == 0 ? "a" : "b") + std::to_string(i / 2 + 1);
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& eq = equations[i];
    os << name(i) << " = " << points[i] << ": ";
    if (eq.kind == BoundaryEquation::Kind::Fixed) {
      os << "fixed at " << eq.fixed_value;
    } else {
      os << "f(" << name(i) << ") = " << name(eq.target) << (eq.beta_sign > 0 ? " + beta" : " - beta")
         << (eq.u_sign > 0 ? " + U" : " - U");
    }
    os << '\n';
  }
  return os.str();
}

IntervalSet set_from_points(const std::vector<double>& points) {
  if (points.size() % 2 != 0) throw std::invalid_argument("odd number of boundary points");
  std::vector<Interval> parts;
  for (std::size_t i = 0; i < points.size(); i += 2) parts.push_back({points[i], points[i + 1]});
  return IntervalSet::normalize(std::move(parts));
}

}  // namespace pctl
