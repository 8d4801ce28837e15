#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "deweed/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__) || defined(_M_IX86)
#define DEWEED_HAVE_AVX2 1
#else
#define DEWEED_HAVE_AVX2 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define DEWEED_HAVE_NEON 1
#else
#define DEWEED_HAVE_NEON 0
#endif

namespace deweed::kernels {

namespace {

std::atomic<Isa>& selection() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if DEWEED_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon: return DEWEED_HAVE_NEON != 0;
  }
  return false;
}

Isa detect_isa() noexcept {
  const char* force = std::getenv("DEWEED_FORCE_SCALAR");
  if (force != nullptr && *force != '\0' && *force != '0') return Isa::Scalar;
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() noexcept { return selection().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) noexcept {
  if (!isa_available(isa)) return false;
  selection().store(isa, std::memory_order_relaxed);
  return true;
}

void accumulate_dose(std::span<double> dose, std::span<double> time, std::span<const double> weight,
                     double irradiance, double dt) {
  check_sizes(dose.size(), time.size());
  check_sizes(dose.size(), weight.size());
  switch (active_isa()) {
#if DEWEED_HAVE_AVX2
    case Isa::Avx2: return avx2::accumulate_dose(dose.data(), time.data(), weight.data(), dose.size(), irradiance, dt);
#endif
#if DEWEED_HAVE_NEON
    case Isa::Neon: return neon::accumulate_dose(dose.data(), time.data(), weight.data(), dose.size(), irradiance, dt);
#endif
    default: return scalar::accumulate_dose(dose.data(), time.data(), weight.data(), dose.size(), irradiance, dt);
  }
}

void lethality(std::span<double> out, std::span<const double> dose_near_ir, std::span<const double> dose_uva,
               double k_near_ir, double k_uva) {
  check_sizes(out.size(), dose_near_ir.size());
  check_sizes(out.size(), dose_uva.size());
  switch (active_isa()) {
#if DEWEED_HAVE_AVX2
    case Isa::Avx2: return avx2::lethality(out.data(), dose_near_ir.data(), dose_uva.data(), out.size(), k_near_ir, k_uva);
#endif
#if DEWEED_HAVE_NEON
    case Isa::Neon: return neon::lethality(out.data(), dose_near_ir.data(), dose_uva.data(), out.size(), k_near_ir, k_uva);
#endif
    default: return scalar::lethality(out.data(), dose_near_ir.data(), dose_uva.data(), out.size(), k_near_ir, k_uva);
  }
}

std::size_t count_at_least(std::span<const double> values, double threshold) {
  switch (active_isa()) {
#if DEWEED_HAVE_AVX2
    case Isa::Avx2: return avx2::count_at_least(values.data(), values.size(), threshold);
#endif
#if DEWEED_HAVE_NEON
    case Isa::Neon: return neon::count_at_least(values.data(), values.size(), threshold);
#endif
    default: return scalar::count_at_least(values.data(), values.size(), threshold);
  }
}

}  // namespace deweed::kernels
