#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pctl/bifurcation.hpp"

namespace pctl {

std::vector<DetFactor> det_factors(const std::vector<double>& d, const std::vector<int>& row_target) {
  const std::size_t n = d.size();
  if (row_target.size() != n) throw std::invalid_argument("matrix shape mismatch");
  std::vector<bool> alive(n, true);
  std::vector<DetFactor> out;
  std::size_t remaining = n;
  while (remaining > 0) {
    // A column with no 1 among the live rows: expand along it.
    std::vector<bool> hit(n, false);
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i] && row_target[i] >= 0 && alive[static_cast<std::size_t>(row_target[i])])
        hit[static_cast<std::size_t>(row_target[i])] = true;
    std::size_t empty_col = n;
    for (std::size_t j = 0; j < n && empty_col == n; ++j)
      if (alive[j] && !hit[j]) empty_col = j;
    if (empty_col < n) {
      out.push_back({{empty_col}, false, d[empty_col]});
      alive[empty_col] = false;
      --remaining;
      continue;
    }
    // Every live column is hit and each row has at most one 1, so the live
    // block of M is a permutation; peel off one cycle.
    std::size_t start = 0;
    while (!alive[start]) ++start;
    DetFactor cyc{{}, true, 1.0};
    std::size_t i = start;
    do {
      cyc.indices.push_back(i);
      cyc.value *= d[i];
      alive[i] = false;
      --remaining;
      i = static_cast<std::size_t>(row_target[i]);
    } while (i != start);
    cyc.value -= 1.0;
    out.push_back(std::move(cyc));
  }
  return out;
}

double product_of(const std::vector<DetFactor>& factors) {
  double p = 1.0;
  for (const auto& f : factors) p *= f.value;
  return p;
}

double leibniz_det(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return 1.0;
  if (n > 8) throw std::invalid_argument("leibniz_det is limited to n <= 8");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double det = 0.0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    double term = inversions % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n && term != 0.0; ++i) term *= a[i][perm[i]];
    det += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

DetFactorReport det_factor_check(std::size_t n_max, std::size_t trials, std::uint64_t seed) {
  if (n_max > 6) throw std::invalid_argument("det_factor_check supports n <= 6");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  DetFactorReport rep;

  auto run_case = [&](const std::vector<int>& targets) {
    const std::size_t n = targets.size();
    for (std::size_t t = 0; t < trials; ++t) {
      std::vector<double> d(n);
      for (auto& v : d) v = entry(rng);
      std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
      double scale = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = d[i];
        if (targets[i] >= 0) a[i][static_cast<std::size_t>(targets[i])] -= 1.0;
        scale *= std::abs(d[i]) + 1.0;
      }
      const double direct = leibniz_det(a);
      const double predicted = product_of(det_factors(d, targets));
      const double rel = std::abs(direct - predicted) / scale;
      rep.max_rel_error = std::max(rep.max_rel_error, rel);
      ++rep.cases;
      if (!(rel <= 1e-9)) ++rep.failures;
    }
  };

  for (std::size_t n = 1; n <= n_max; ++n) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < n; ++i) count *= n + 1;
    std::vector<int> targets(n, -1);
    if (count <= 625) {
      // Odometer over {-1, 0, .., n-1}^n.
      for (std::size_t c = 0; c < count; ++c) {
        std::size_t code = c;
        for (std::size_t i = 0; i < n; ++i) {
          targets[i] = static_cast<int>(code % (n + 1)) - 1;
          code /= n + 1;
        }
        run_case(targets);
      }
    } else {
      std::uniform_int_distribution<int> pick(-1, static_cast<int>(n) - 1);
      for (std::size_t t = 0; t < trials; ++t) {
        for (auto& v : targets) v = pick(rng);
        run_case(targets);
      }
    }
  }
  return rep;
}

}  // namespace pctl
