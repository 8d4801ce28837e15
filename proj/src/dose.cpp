#include "deweed/dose.hpp"

#include <algorithm>
#include <cmath>

#include "deweed/error.hpp"

namespace deweed::dose {

namespace {

void require_non_negative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw ValidationError(std::string("recipe.") + name + " must be a finite value >= 0");
  }
}

}  // namespace

void DoseRecipe::validate() const {
  require_non_negative(e_near_ir, "e_near_ir_w_m2");
  require_non_negative(e_uva, "e_uva_w_m2");
  require_non_negative(k_near_ir, "k_near_ir");
  require_non_negative(k_uva, "k_uva");
}

DoseRecipe phase1_recipe() { return DoseRecipe{"phase1", 5000.0, 110.0}; }

DoseRecipe phase2_recipe() { return DoseRecipe{"phase2", 0.06 * 1e4, 0.85 * 1e4}; }

double lethality(const ExposureLedger& ledger, const DoseRecipe& recipe) {
  const double raw = recipe.k_near_ir * ledger.dose_near_ir + recipe.k_uva * ledger.dose_uva;
  return std::min(raw, 1.0);
}

ExposureLedger accumulate(ExposureLedger ledger, const DoseRecipe& recipe, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ValidationError("exposure duration must be >= 0");
  ledger.dose_near_ir = ledger.dose_near_ir + recipe.e_near_ir * dt;
  ledger.dose_uva = ledger.dose_uva + recipe.e_uva * dt;
  if (recipe.e_near_ir > 0.0) ledger.t_near_ir += dt;
  if (recipe.e_uva > 0.0) ledger.t_uva += dt;
  return ledger;
}

double dwell_time_for_target(const DoseRecipe& recipe, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw ValidationError("lethality target must lie in (0, 1]");
  const double rate = recipe.dose_rate();
  if (!(rate > 0.0)) {
    throw UnreachableTarget("unreachable target: recipe '" + recipe.label + "' has zero dose rate");
  }
  return target / rate;
}

}  // namespace deweed::dose
