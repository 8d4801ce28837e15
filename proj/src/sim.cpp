#include "deweed/sim.hpp"

#include <cmath>
#include <random>

#include "deweed/error.hpp"

namespace deweed::sim {

std::string_view mode_name(MissionMode mode) noexcept {
  return mode == MissionMode::Dwell ? "dwell" : "continuous";
}

void RobotConfig::validate() const {
  if (!(transit_speed > 0.0) || !std::isfinite(transit_speed)) throw ValidationError("robot.transit_speed_m_s must be > 0");
  if (!(wiggle_sigma >= 0.0) || !std::isfinite(wiggle_sigma)) throw ValidationError("robot.wiggle_sigma must be >= 0");
}

void MissionConfig::validate() const {
  if (!(target > 0.0 && target <= 1.0)) throw ValidationError("mission.target must lie in (0, 1]");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ValidationError("mission.speed_m_s must be > 0");
  if (!(collateral_threshold >= 0.0 && collateral_threshold <= 1.0)) {
    throw ValidationError("mission.collateral_threshold must lie in [0, 1]");
  }
}

double collateral_threshold(const dose::DoseRecipe&) { return kDefaultCollateralThreshold; }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  // splitmix64 finalizer over the (seed, stream) pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

MissionMetrics score(const field::FieldGrid& treated, const detect::DetectionReport& report,
                     const dose::DoseRecipe& recipe, const MissionConfig& mission) {
  MissionMetrics m;
  m.detection_tally = report.tally;
  const auto lethal = treated.lethality_map(recipe);
  const auto dn = treated.dose_near_ir();
  const auto du = treated.dose_uva();
  const double kill_level = mission.target - dose::kLethalityTolerance;
  for (std::size_t i = 0; i < treated.size(); ++i) {
    const auto truth = treated.truth(i);
    if (truth == field::CellClass::Weed) {
      ++m.true_weeds;
      const bool killed = lethal[i] >= kill_level;
      if (killed) ++m.killed_weeds;
      else if (report.reports_weed(i)) ++m.underdosed_weeds;
      else ++m.missed_weeds;
    } else if (truth == field::CellClass::Crop) {
      const bool irradiated = dn[i] > 0.0 || du[i] > 0.0;
      if (irradiated && lethal[i] >= mission.collateral_threshold) ++m.crop_collateral;
    }
  }
  m.weed_kill_fraction =
      m.true_weeds == 0 ? 1.0 : static_cast<double>(m.killed_weeds) / static_cast<double>(m.true_weeds);
  return m;
}

MissionResult execute_mission(const field::FieldGrid& grid, const sched::ArrayLayout& layout,
                              const RobotConfig& robot, const detect::ConfusionSpec& detector,
                              const MissionConfig& mission, std::uint64_t seed) {
  layout.validate();
  robot.validate();
  mission.validate();
  detector.validate();

  auto report = detect::survey_field(grid, detector, derive_seed(seed, 1));
  const sched::PlanOptions options{robot.transit_speed};

  sched::ActivationPlan planned;
  bool feasible = true;
  std::string verdict;
  if (mission.mode == MissionMode::Dwell) {
    planned = sched::plan_move_then_dwell(grid, report, layout, mission.target, options);
  } else {
    auto continuous = sched::plan_continuous(grid, report, layout, mission.speed, mission.target, options);
    planned = std::move(continuous.plan);
    feasible = continuous.verdict.feasible;
    verdict = continuous.verdict.reason;
  }

  // Lateral offset of the array from its planned track, a Gaussian random
  // walk in distance traveled. Detection coordinates were taken camera_lead
  // ahead, so drift over that distance is already present at the first firing.
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto drift = [&](double distance) {
    if (robot.wiggle_sigma <= 0.0 || distance <= 0.0) return 0.0;
    return robot.wiggle_sigma * std::sqrt(distance) * gauss(rng);
  };
  double offset = drift(layout.camera_lead);

  sched::ActivationPlan executed;
  executed.target = planned.target;
  executed.steps.reserve(planned.steps.size());
  std::uint64_t mismatches = 0;
  const sched::ActivationStep* previous = nullptr;
  for (const auto& step : planned.steps) {
    const bool firing = !step.active_set.empty();
    if (robot.course_correction && firing) {
      const bool new_stop = step.mode == sched::StepMode::Moving || previous == nullptr ||
                            previous->mode != sched::StepMode::Dwell || previous->array_pose.x != step.array_pose.x ||
                            previous->array_pose.y != step.array_pose.y;
      if (new_stop) offset = 0.0;
    }
    auto actual = step;
    actual.array_pose.y += offset;
    for (std::size_t source : step.active_set) {
      const auto want = sched::cell_under_source(grid, layout, step, source);
      const auto got = sched::cell_under_source(grid, layout, actual, source);
      if (want != got) ++mismatches;
    }
    if (step.mode == sched::StepMode::Moving) offset += drift(step.speed * step.duration);
    executed.steps.push_back(std::move(actual));
    previous = &step;
  }
  executed.finalize(layout.per_source_power);

  auto treated = sched::simulate_plan(grid, executed, layout);
  auto metrics = score(treated, report, layout.recipe, mission);
  metrics.total_time = executed.total_time;
  metrics.total_energy = executed.total_energy;
  metrics.mismatch_events = mismatches;
  metrics.feasible = feasible;
  metrics.verdict = verdict;
  metrics.seed = seed;
  return {std::move(metrics), std::move(report), std::move(planned), std::move(executed), std::move(treated)};
}

MissionMetrics run_mission(const field::FieldGrid& grid, const sched::ArrayLayout& layout, const RobotConfig& robot,
                           const detect::ConfusionSpec& detector, const MissionConfig& mission, std::uint64_t seed) {
  return execute_mission(grid, layout, robot, detector, mission, seed).metrics;
}

}  // namespace deweed::sim
