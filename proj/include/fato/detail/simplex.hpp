#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace fato::detail {

struct SimplexResult {
  std::vector<double> x;
  double fx = 0.0;
  int evaluations = 0;
};

// Nelder-Mead with standard coefficients. Stops when the spread of
// function values across the simplex drops below ftol and the vertices
// have collapsed to within xtol of the best one, or after max_evals.
// Both are needed: a simplex straddling a minimum can have equal values.
template <class F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, double step, double ftol,
                          int max_evals, double xtol = 1e-10) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> vals(n + 1);
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]), ++evals;

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto point_at = [&](double coef, std::vector<double>& out, std::size_t worst) {
    for (std::size_t j = 0; j < n; ++j)
      out[j] = centroid[j] + coef * (pts[worst][j] - centroid[j]);
  };

  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (vals[worst] - vals[best] <= ftol) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) spread = std::max(spread, std::abs(pts[i][j] - pts[best][j]));
      if (spread <= xtol) break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    }

    point_at(-1.0, trial, worst);
    const double fr = f(trial);
    ++evals;
    if (fr < vals[best]) {
      point_at(-2.0, trial2, worst);
      const double fe = f(trial2);
      ++evals;
      if (fe < fr) {
        pts[worst] = trial2, vals[worst] = fe;
      } else {
        pts[worst] = trial, vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial, vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    point_at(outside ? -0.5 : 0.5, trial2, worst);
    const double fc = f(trial2);
    ++evals;
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = trial2, vals[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      vals[i] = f(pts[i]);
      ++evals;
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  return {pts[static_cast<std::size_t>(it - vals.begin())], *it, evals};
}

}  // namespace fato::detail
