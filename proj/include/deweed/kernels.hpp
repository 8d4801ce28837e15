#pragma once

// Data-parallel inner loops over per-cell dose ledgers.
//
// Every kernel has a portable scalar reference and, where the target CPU
// supports it, a vector variant (AVX2 on x86-64, NEON on aarch64). The
// variant is selected once at runtime. Vector variants perform the same
// IEEE operations in the same order as the scalar reference, so results are
// bit-identical; the equivalence tests assert exact equality.

#include <cstddef>
#include <span>
#include <string_view>

namespace deweed::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

// True when `isa` was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

// Best available ISA, unless DEWEED_FORCE_SCALAR is set in the environment.
Isa detect_isa() noexcept;

Isa active_isa() noexcept;

// Overrides dispatch (tests use this to compare variants). Returns false and
// leaves the selection unchanged when `isa` is unavailable.
bool set_active_isa(Isa isa) noexcept;

// dose[i] += (irradiance * dt) * weight[i]
// if irradiance > 0: time[i] += dt * weight[i]
void accumulate_dose(std::span<double> dose, std::span<double> time, std::span<const double> weight,
                     double irradiance, double dt);

// out[i] = min(1, k_near_ir * dose_near_ir[i] + k_uva * dose_uva[i])
void lethality(std::span<double> out, std::span<const double> dose_near_ir, std::span<const double> dose_uva,
               double k_near_ir, double k_uva);

// Number of i with values[i] >= threshold.
std::size_t count_at_least(std::span<const double> values, double threshold);

// Per-ISA entry points, exposed for the equivalence tests.
namespace scalar {
void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept;
void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept;
std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept;
}  // namespace scalar

namespace avx2 {
void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept;
void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept;
std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept;
}  // namespace avx2

namespace neon {
void accumulate_dose(double* dose, double* time, const double* weight, std::size_t n, double irradiance,
                     double dt) noexcept;
void lethality(double* out, const double* dn, const double* du, std::size_t n, double kn, double ku) noexcept;
std::size_t count_at_least(const double* values, std::size_t n, double threshold) noexcept;
}  // namespace neon

}  // namespace deweed::kernels
