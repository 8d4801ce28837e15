#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's dose, planning or detection code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

// Lethality by explicit time stepping: integrate the instantaneous dose
// rate k_nir * E_nir + k_uva * E_uva over [0, duration] in `step` increments.
inline double integrate_lethality(double e_nir, double e_uva, double k_nir, double k_uva, double duration,
                                  double step = 1e-3) {
  const auto steps = static_cast<std::size_t>(std::floor(duration / step));
  double dose_nir = 0.0;
  double dose_uva = 0.0;
  // Kahan summation keeps the reference tighter than the tolerance it checks.
  double c_nir = 0.0;
  double c_uva = 0.0;
  auto add = [](double& sum, double& c, double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  };
  for (std::size_t i = 0; i < steps; ++i) {
    add(dose_nir, c_nir, e_nir * step);
    add(dose_uva, c_uva, e_uva * step);
  }
  const double tail = duration - static_cast<double>(steps) * step;
  add(dose_nir, c_nir, e_nir * tail);
  add(dose_uva, c_uva, e_uva * tail);
  return std::min(1.0, k_nir * dose_nir + k_uva * dose_uva);
}

// Time at which forward accumulation in `step` increments first reaches `target`.
inline double forward_time_to_target(double rate, double target, double step = 1e-4) {
  double lethal = 0.0;
  double t = 0.0;
  while (lethal < target) {
    lethal += rate * step;
    t += step;
  }
  // Linear interpolation back into the last step.
  return t - (lethal - target) / rate;
}

// Minimum number of cap-sized batches over every assignment of weeds to
// stop offsets, by plain enumeration. `cover[w]` lists the offsets that can
// reach weed w. Exponential; only for tiny instances.
inline std::size_t min_batches_enumerated(const std::vector<std::vector<std::size_t>>& cover, std::size_t positions,
                                          std::size_t cap) {
  std::vector<std::size_t> choice(cover.size(), 0);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  while (true) {
    std::vector<std::size_t> counts(positions, 0);
    for (std::size_t w = 0; w < cover.size(); ++w) ++counts[cover[w][choice[w]]];
    std::size_t batches = 0;
    for (auto k : counts) batches += (k + cap - 1) / cap;
    best = std::min(best, batches);
    std::size_t w = 0;
    while (w < cover.size() && ++choice[w] == cover[w].size()) choice[w++] = 0;
    if (w == cover.size()) break;
  }
  return best;
}

inline double poisson_cdf(std::size_t k, double mean) {
  double term = std::exp(-mean);
  double sum = term;
  for (std::size_t i = 1; i <= k; ++i) {
    term *= mean / static_cast<double>(i);
    sum += term;
  }
  return sum;
}

// Smallest k with P(X <= k) >= q.
inline std::size_t poisson_quantile(double q, double mean) {
  std::size_t k = 0;
  while (poisson_cdf(k, mean) < q) ++k;
  return k;
}

// Chi-square goodness of fit p-value for two degrees of freedom.
inline double chi_square_p_df2(double statistic) { return std::exp(-statistic / 2.0); }

// Binomial normal-approximation half-width at z standard errors.
inline double binomial_halfwidth(double p, double n, double z) { return z * std::sqrt(p * (1.0 - p) / n); }

}  // namespace oracle
