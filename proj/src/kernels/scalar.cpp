#include "deweed/kernels.hpp"

#include <algorithm>

namespace deweed::kernels::scalar {

void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept {
  const double increment = irradiance * dt;
  for (std::size_t i = 0; i < n; ++i) dose[i] = dose[i] + increment * weight[i];
  if (irradiance > 0.0) {
    for (std::size_t i = 0; i < n; ++i) time[i] = time[i] + dt * weight[i];
  }
}

void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = kn * dn[i] + ku * du[i];
    out[i] = std::min(raw, 1.0);
  }
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace deweed::kernels::scalar
