#pragma once

// Dual-band radiant dose and lethality model.
//
// Lethality is linear in the per-band dose integrals:
//
//   L = min(1, k_near_ir * D_near_ir + k_uva * D_uva),   D_band = sum(E_band * dt)
//
// For constant irradiance D_band = E_band * T_band, so the defaults
// k_near_ir = 5.5e-6 and k_uva = 6.5e-5 (per W/m^2 per second) reproduce
// the published crabgrass fit. Working with integrals keeps the model well
// defined when sources switch on and off or the array moves.

#include <string>

namespace deweed::dose {

inline constexpr double kDefaultNearIrCoefficient = 5.5e-6;
inline constexpr double kDefaultUvaCoefficient = 6.5e-5;

// Slack applied when comparing an accumulated lethality against a target it
// was planned to reach exactly.
inline constexpr double kLethalityTolerance = 1e-9;

struct DoseRecipe {
  std::string label;
  double e_near_ir = 0.0;  // W/m^2
  double e_uva = 0.0;      // W/m^2
  double k_near_ir = kDefaultNearIrCoefficient;
  double k_uva = kDefaultUvaCoefficient;

  // k_near_ir * e_near_ir + k_uva * e_uva, lethality per second of exposure.
  double dose_rate() const noexcept { return k_near_ir * e_near_ir + k_uva * e_uva; }

  // Throws ValidationError on negative or non-finite fields.
  void validate() const;
};

struct ExposureLedger {
  double t_near_ir = 0.0;  // s
  double t_uva = 0.0;      // s
  double dose_near_ir = 0.0;  // J/m^2
  double dose_uva = 0.0;      // J/m^2

  bool empty() const noexcept {
    return t_near_ir == 0.0 && t_uva == 0.0 && dose_near_ir == 0.0 && dose_uva == 0.0;
  }
  friend bool operator==(const ExposureLedger&, const ExposureLedger&) = default;
};

// Phase I bulb array: 110 W/m^2 UV-A (11 mW/cm^2) and a configured
// 5000 W/m^2 near-IR share. Target-1.0 dwell is about 28.86 s.
DoseRecipe phase1_recipe();

// Phase II LED end effector: 0.06 W/cm^2 MWIR in the near-IR slot and
// 0.85 W/cm^2 of 450 nm light in the short-wavelength slot.
DoseRecipe phase2_recipe();

double lethality(const ExposureLedger& ledger, const DoseRecipe& recipe);

// Adds dt seconds of exposure under `recipe`. Throws ValidationError on dt < 0.
ExposureLedger accumulate(ExposureLedger ledger, const DoseRecipe& recipe, double dt);

// Exposure time after which lethality reaches `target` with both bands on.
// Throws ValidationError for target outside (0, 1] and UnreachableTarget for
// a zero dose rate.
double dwell_time_for_target(const DoseRecipe& recipe, double target);

}  // namespace deweed::dose
