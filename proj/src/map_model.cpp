#include "pctl/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pctl {

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() < 2) throw std::invalid_argument("map needs at least two breakpoints");
  if (breakpoints_.size() != values_.size())
    throw std::invalid_argument("map breakpoints and values differ in length");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!std::isfinite(breakpoints_[k]) || !std::isfinite(values_[k]))
      throw std::invalid_argument("map entries must be finite");
    if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1]))
      throw std::invalid_argument("map breakpoints must be strictly increasing");
  }
  expanding_ = true;
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    const double s = (values_[k + 1] - values_[k]) / (breakpoints_[k + 1] - breakpoints_[k]);
    slopes_.push_back(s);
    if (!(std::abs(s) > 1.0)) expanding_ = false;
  }
}

void PiecewiseLinearMap::check_in_domain(double x) const {
  if (!(x >= breakpoints_.front() && x <= breakpoints_.back())) {
    std::ostringstream msg;
    msg << "x = " << x << " is outside the map domain [" << breakpoints_.front() << ", "
        << breakpoints_.back() << "]";
    throw std::out_of_range(msg.str());
  }
}

std::size_t PiecewiseLinearMap::piece_of(double x) const {
  check_in_domain(x);
  auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), x);
  if (it == breakpoints_.end()) --it;
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double PiecewiseLinearMap::eval_on_piece(std::size_t k, double x) const {
  const double x0 = breakpoints_[k], x1 = breakpoints_[k + 1];
  const double t = (x - x0) / (x1 - x0);
  return values_[k] + t * (values_[k + 1] - values_[k]);
}

double PiecewiseLinearMap::eval(double x) const { return eval_on_piece(piece_of(x), x); }

double PiecewiseLinearMap::derivative_at(double x) const {
  check_in_domain(x);
  for (std::size_t k = 1; k + 1 < breakpoints_.size(); ++k) {
    if (x == breakpoints_[k]) {
      std::ostringstream msg;
      msg << "map is not differentiable at breakpoint " << x;
      throw std::domain_error(msg.str());
    }
  }
  return slopes_[piece_of(x)];
}

double PiecewiseLinearMap::distance_to_kink(double x) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < breakpoints_.size(); ++k)
    d = std::min(d, std::abs(x - breakpoints_[k]));
  return d;
}

IntervalSet PiecewiseLinearMap::image_of(const IntervalSet& x) const {
  if (x.empty()) return {};
  const Interval dom = domain();
  if (x.front().lo < dom.lo || x.back().hi > dom.hi)
    throw std::out_of_range("set extends outside the map domain");
  std::vector<Interval> out;
  for (const auto& iv : x) {
    const std::size_t first = piece_of(iv.lo);
    const std::size_t last = piece_of(iv.hi);
    for (std::size_t k = first; k <= last; ++k) {
      const double a = std::max(iv.lo, breakpoints_[k]);
      const double b = std::min(iv.hi, breakpoints_[k + 1]);
      const double fa = (a == breakpoints_[k]) ? values_[k] : eval_on_piece(k, a);
      const double fb = (b == breakpoints_[k + 1]) ? values_[k + 1] : eval_on_piece(k, b);
      out.push_back({std::min(fa, fb), std::max(fa, fb)});
    }
  }
  return IntervalSet::normalize(std::move(out));
}

IntervalSet PiecewiseLinearMap::preimage_of(const IntervalSet& y) const {
  std::vector<Interval> out;
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    const double x0 = breakpoints_[k], x1 = breakpoints_[k + 1];
    const double y0 = values_[k], y1 = values_[k + 1];
    const double ylo = std::min(y0, y1), yhi = std::max(y0, y1);
    for (const auto& iv : y) {
      if (iv.hi < ylo || iv.lo > yhi) continue;
      if (y0 == y1) {
        out.push_back({x0, x1});
        continue;
      }
      // Invert the piece on the part of iv it actually covers.
      const double c = std::max(iv.lo, ylo);
      const double d = std::min(iv.hi, yhi);
      auto inv = [&](double v) {
        if (v == y0) return x0;
        if (v == y1) return x1;
        return x0 + (v - y0) / (y1 - y0) * (x1 - x0);
      };
      double a = inv(c), b = inv(d);
      if (a > b) std::swap(a, b);
      a = std::clamp(a, x0, x1);
      b = std::clamp(b, x0, x1);
      out.push_back({a, b});
    }
  }
  return IntervalSet::normalize(std::move(out));
}

PiecewiseLinearMap asymmetric_tent() { return PiecewiseLinearMap({0.0, 0.7, 1.0}, {0.0, 0.91, 0.01}); }

PiecewiseLinearMap parse_map_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("map file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("breakpoints") || !doc.contains("values"))
    throw std::invalid_argument("map file needs \"breakpoints\" and \"values\" arrays");
  try {
    return PiecewiseLinearMap(doc.at("breakpoints").get<std::vector<double>>(),
                              doc.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("map arrays must hold numbers: ") + e.what());
  }
}

PiecewiseLinearMap load_map(const std::string& source) {
  if (source == "asymmetric-tent") return asymmetric_tent();
  std::ifstream in(source);
  if (!in) throw std::invalid_argument("cannot open map file '" + source + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map_json(buf.str());
}

}  // namespace pctl
