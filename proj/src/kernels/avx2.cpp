// Compiled with -mavx2; only reached through dispatch after a CPUID check.
#include "deweed/kernels.hpp"

#include <immintrin.h>

#include <bit>

namespace deweed::kernels::avx2 {

void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept {
  const double increment = irradiance * dt;
  const __m256d inc = _mm256_set1_pd(increment);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_loadu_pd(weight + i);
    const __m256d d = _mm256_loadu_pd(dose + i);
    _mm256_storeu_pd(dose + i, _mm256_add_pd(d, _mm256_mul_pd(inc, w)));
  }
  for (; i < n; ++i) dose[i] = dose[i] + increment * weight[i];

  if (irradiance > 0.0) {
    const __m256d step = _mm256_set1_pd(dt);
    i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d w = _mm256_loadu_pd(weight + i);
      const __m256d t = _mm256_loadu_pd(time + i);
      _mm256_storeu_pd(time + i, _mm256_add_pd(t, _mm256_mul_pd(step, w)));
    }
    for (; i < n; ++i) time[i] = time[i] + dt * weight[i];
  }
}

void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept {
  const __m256d vkn = _mm256_set1_pd(kn);
  const __m256d vku = _mm256_set1_pd(ku);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_mul_pd(vkn, _mm256_loadu_pd(dn + i));
    const __m256d b = _mm256_mul_pd(vku, _mm256_loadu_pd(du + i));
    // min_pd(one, raw) yields `raw` unless one < raw, matching std::min(raw, 1.0).
    _mm256_storeu_pd(out + i, _mm256_min_pd(one, _mm256_add_pd(a, b)));
  }
  for (; i < n; ++i) {
    const double raw = kn * dn[i] + ku * du[i];
    out[i] = 1.0 < raw ? 1.0 : raw;
  }
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(values + i), t, _CMP_GE_OQ);
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(ge))));
  }
  for (; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace deweed::kernels::avx2
