#pragma once

// Randomized algebra laws for IntervalSet. Each law returns a report so the
// same code backs the unit suite and the acceptance run.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "pctl/interval_set.hpp"

namespace laws {

struct Report {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;
  bool ok() const { return cases > 0 && failures == 0; }
};

inline std::string show(const pctl::IntervalSet& s) {
  std::ostringstream os;
  os.precision(17);
  os << '{';
  for (const auto& iv : s) os << '[' << iv.lo << ',' << iv.hi << ']';
  os << '}';
  return os.str();
}

inline bool close(const pctl::IntervalSet& a, const pctl::IntervalSet& b, double tol) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  return pctl::hausdorff_distance(a, b) <= tol;
}

// One case: returns an empty string on success, a description otherwise.
using Case = std::function<std::string(gen::Rng&)>;

inline Report run(const std::string& name, std::size_t cases, std::uint64_t seed, const Case& body) {
  Report r{name};
  gen::Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    ++r.cases;
    std::string why;
    try {
      why = body(rng);
    } catch (const std::exception& e) {
      why = std::string("threw: ") + e.what();
    }
    if (!why.empty()) {
      if (r.failures++ == 0) r.first_failure = "case " + std::to_string(k) + ": " + why;
    }
  }
  return r;
}

inline constexpr double kTol = 1e-12;

inline Report normalization_idempotent(std::size_t cases, std::uint64_t seed) {
  return run("normalization idempotence", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto raw = gen::raw_intervals(rng, 8);
    const auto once = pctl::IntervalSet::normalize(raw);
    const auto twice = pctl::IntervalSet::normalize(once.intervals());
    if (!(once == twice)) return "normalize not idempotent: " + show(once) + " vs " + show(twice);
    if (!pctl::is_canonical(once.intervals())) return "not canonical: " + show(once);
    // Union preserved: every raw endpoint and midpoint is covered, and every
    // output endpoint lies in some raw interval (up to merge slack).
    for (const auto& iv : raw)
      for (double x : {iv.lo, iv.hi, 0.5 * (iv.lo + iv.hi)})
        if (!once.contains(x)) return "lost point " + std::to_string(x);
    for (const auto& iv : once)
      for (double x : {iv.lo, iv.hi}) {
        bool hit = false;
        for (const auto& r : raw) hit = hit || r.contains(x, pctl::kMergeEps);
        if (!hit) return "invented point " + std::to_string(x);
      }
    return {};
  });
}

inline Report dilation_semigroup(std::size_t cases, std::uint64_t seed) {
  return run("dilation semigroup + monotonicity", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto x = gen::any_set(rng, 8);
    const double u = gen::uniform(rng, 0.0, 0.1), v = gen::uniform(rng, 0.0, 0.1);
    const auto lhs = pctl::dilate(x, u + v);
    const auto rhs = pctl::dilate(pctl::dilate(x, u), v);
    if (!close(lhs, rhs, kTol)) return "X+(u+v) != (X+u)+v for X=" + show(x);
    const auto y = pctl::unite(x, gen::any_set(rng, 4));
    if (!pctl::dilate(x, u).is_subset_of(pctl::dilate(y, u), kTol)) return "dilation not monotone";
    if (!x.is_subset_of(pctl::dilate(x, u), kTol)) return "X not inside X+u";
    return {};
  });
}

inline Report erode_dilate_adjunction(std::size_t cases, std::uint64_t seed) {
  return run("erode/dilate adjunction", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto x = gen::any_set(rng, 6);
    const auto y = gen::any_set(rng, 6, -0.2, 1.2);
    const double u = gen::uniform(rng, 0.0, 0.1);
    // X+u ⊆ Y  <=>  X ⊆ Y⊖u
    const bool left = pctl::dilate(x, u).is_subset_of(y, kTol);
    const bool right = x.is_subset_of(pctl::erode(y, u), kTol);
    if (left != right) return "adjunction broken for X=" + show(x) + " Y=" + show(y);
    // Closure laws and the positive case built to hold.
    if (!x.is_subset_of(pctl::erode(pctl::dilate(x, u), u), kTol)) return "X not inside (X+u)⊖u";
    if (!pctl::dilate(pctl::erode(y, u), u).is_subset_of(y, kTol)) return "(Y⊖u)+u not inside Y";
    const auto big = pctl::unite(pctl::dilate(x, u), y);
    if (!x.is_subset_of(pctl::erode(big, u), kTol)) return "X not inside ((X+u)∪Y)⊖u";
    return {};
  });
}

/// Split identity: no gap of X equals 2U (margin m) implies
/// (X+U)⊖δ = X+(U−δ) for δ < m/2; a gap of exactly 2U breaks it for all δ.
inline Report split_identity(std::size_t cases, std::uint64_t seed) {
  return run("split identity (X+U)-d = X+(U-d)", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto x = gen::nonempty_set(rng, 6);
    const double u = gen::uniform(rng, 0.005, 0.08);
    double margin = 1.0;
    for (double g : pctl::gaps(x)) margin = std::min(margin, std::abs(g - 2.0 * u));
    if (margin > 1e-9) {
      const double d = std::min(u, 0.5 * margin) * gen::uniform(rng, 0.01, 0.99);
      const auto lhs = pctl::erode(pctl::dilate(x, u), d);
      const auto rhs = pctl::dilate(x, u - d);
      if (!close(lhs, rhs, 1e-11)) return "identity fails away from 2U gaps, X=" + show(x);
    }
    // Force one gap to exactly 2U: the identity must fail for small δ.
    const double a = gen::uniform(rng, 0.0, 0.5);
    const double w = gen::uniform(rng, 0.01, 0.1);
    const auto pinned = pctl::IntervalSet::normalize({{a, a + w}, {a + w + 2.0 * u, a + 2.0 * w + 2.0 * u}});
    const double d = u * gen::uniform(rng, 1e-4, 0.5);
    if (close(pctl::erode(pctl::dilate(pinned, u), d), pctl::dilate(pinned, u - d), 1e-11))
      return "identity holds across a 2U gap";
    return {};
  });
}

/// Decreasing chain K_δ = K ∪ ((K+δ) ∩ R) with ∩ K_δ = K:
/// nested, and d_H(K, K_δ) <= δ -> 0.
inline Report nested_chain_continuity(std::size_t cases, std::uint64_t seed) {
  return run("nested chain Hausdorff continuity", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto k = gen::nonempty_set(rng, 5);
    const auto r = gen::any_set(rng, 8, -0.1, 1.1);
    pctl::IntervalSet prev;
    bool first = true;
    for (double d = 0.1; d > 1e-9; d *= 0.1) {
      const auto kd = pctl::unite(k, pctl::intersect(pctl::dilate(k, d), r));
      if (!first && !kd.is_subset_of(prev, kTol)) return "chain not decreasing at d=" + std::to_string(d);
      const double h = pctl::hausdorff_distance(k, kd);
      if (h > d + kTol) return "d_H(K, K_d) = " + std::to_string(h) + " > d";
      prev = kd;
      first = false;
    }
    return {};
  });
}

/// ∩_δ (K_δ + (u+δ)) = K + u on the same nested chains.
inline Report dilated_intersection(std::size_t cases, std::uint64_t seed) {
  return run("intersection of dilated chain", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto k = gen::nonempty_set(rng, 5);
    const auto r = gen::any_set(rng, 8, -0.1, 1.1);
    const double u = gen::uniform(rng, 0.0, 0.05);
    const auto target = pctl::dilate(k, u);
    pctl::IntervalSet acc = pctl::dilate(k, 1.0);
    double last = 0.0;
    for (double d = 0.1; d > 1e-10; d *= 0.1) {
      const auto kd = pctl::unite(k, pctl::intersect(pctl::dilate(k, d), r));
      acc = pctl::intersect(acc, pctl::dilate(kd, u + d));
      if (!target.is_subset_of(acc, kTol)) return "K+u escaped the intersection";
      last = d;
    }
    if (pctl::hausdorff_distance(acc, target) > 2.0 * last + kTol)
      return "intersection " + show(acc) + " far from K+u " + show(target);
    return {};
  });
}

/// X⊖u = B \ ((B \ X)+u) for X well inside B.
inline Report erosion_duality(std::size_t cases, std::uint64_t seed) {
  return run("erosion/dilation duality", cases, seed, [](gen::Rng& rng) -> std::string {
    const auto x = gen::any_set(rng, 8, 0.2, 0.8);
    const double u = gen::uniform(rng, 0.0, 0.1);
    const pctl::Interval b{0.0, 1.0};
    const auto lhs = pctl::erode(x, u);
    const auto rhs = pctl::complement_within(pctl::dilate(pctl::complement_within(x, b), u), b);
    // Components of width exactly 2u become points on one side only; the
    // generator hits that with probability zero.
    if (!close(lhs, rhs, kTol)) return "duality fails: " + show(lhs) + " vs " + show(rhs);
    return {};
  });
}

inline std::vector<Report> all(std::size_t cases, std::uint64_t seed) {
  return {normalization_idempotent(cases, seed),     dilation_semigroup(cases, seed + 1),
          erode_dilate_adjunction(cases, seed + 2),  split_identity(cases, seed + 3),
          nested_chain_continuity(cases, seed + 4),  dilated_intersection(cases, seed + 5),
          erosion_duality(cases, seed + 6)};
}

}  // namespace laws
