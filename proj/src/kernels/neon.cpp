#include "deweed/kernels.hpp"

#include <arm_neon.h>

namespace deweed::kernels::neon {

void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept {
  const double increment = irradiance * dt;
  const float64x2_t inc = vdupq_n_f64(increment);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t w = vld1q_f64(weight + i);
    const float64x2_t d = vld1q_f64(dose + i);
    // Separate multiply and add; vfmaq would round differently from the scalar path.
    vst1q_f64(dose + i, vaddq_f64(d, vmulq_f64(inc, w)));
  }
  for (; i < n; ++i) dose[i] = dose[i] + increment * weight[i];

  if (irradiance > 0.0) {
    const float64x2_t step = vdupq_n_f64(dt);
    i = 0;
    for (; i + 2 <= n; i += 2) {
      const float64x2_t w = vld1q_f64(weight + i);
      const float64x2_t t = vld1q_f64(time + i);
      vst1q_f64(time + i, vaddq_f64(t, vmulq_f64(step, w)));
    }
    for (; i < n; ++i) time[i] = time[i] + dt * weight[i];
  }
}

void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept {
  const float64x2_t vkn = vdupq_n_f64(kn);
  const float64x2_t vku = vdupq_n_f64(ku);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t raw = vaddq_f64(vmulq_f64(vkn, vld1q_f64(dn + i)), vmulq_f64(vku, vld1q_f64(du + i)));
    const uint64x2_t over = vcltq_f64(one, raw);
    vst1q_f64(out + i, vbslq_f64(over, one, raw));
  }
  for (; i < n; ++i) {
    const double raw = kn * dn[i] + ku * du[i];
    out[i] = 1.0 < raw ? 1.0 : raw;
  }
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept {
  const float64x2_t t = vdupq_n_f64(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t ge = vcgeq_f64(vld1q_f64(values + i), t);
    count += (vgetq_lane_u64(ge, 0) & 1u) + (vgetq_lane_u64(ge, 1) & 1u);
  }
  for (; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace deweed::kernels::neon
