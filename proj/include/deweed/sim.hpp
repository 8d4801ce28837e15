#pragma once

// End-to-end mission execution: survey ahead of the array, plan, execute
// with lateral drift of the towing vehicle, apply dose, score the outcome.

#include <cstdint>
#include <string>

#include "deweed/detect.hpp"
#include "deweed/field.hpp"
#include "deweed/sched.hpp"

namespace deweed::sim {

inline constexpr double kDefaultCollateralThreshold = 0.25;

enum class MissionMode { Dwell, Continuous };

std::string_view mode_name(MissionMode mode) noexcept;

struct RobotConfig {
  double transit_speed = sched::kOneKmPerHour;  // m/s
  // Lateral drift: std-dev in meters accrued per square-root meter traveled.
  double wiggle_sigma = 0.0;
  // Re-align to the planned track at every stop (every firing step when moving).
  bool course_correction = false;

  void validate() const;
};

struct MissionConfig {
  double target = 1.0;
  MissionMode mode = MissionMode::Dwell;
  double speed = sched::kOneKmPerHour;  // continuous-mode ground speed, m/s
  double collateral_threshold = kDefaultCollateralThreshold;

  void validate() const;
};

struct MissionMetrics {
  double weed_kill_fraction = 1.0;
  std::uint64_t true_weeds = 0;
  std::uint64_t killed_weeds = 0;
  std::uint64_t missed_weeds = 0;     // never reported and not killed
  std::uint64_t underdosed_weeds = 0; // reported but below target
  std::uint64_t crop_collateral = 0;
  double total_time = 0.0;    // s
  double total_energy = 0.0;  // J
  detect::ClassificationTally detection_tally;
  std::uint64_t mismatch_events = 0;
  bool feasible = true;
  std::string verdict;  // empty when feasible
  std::uint64_t seed = 0;

  friend bool operator==(const MissionMetrics&, const MissionMetrics&) = default;
};

struct MissionResult {
  MissionMetrics metrics;
  detect::DetectionReport report;
  sched::ActivationPlan planned;
  sched::ActivationPlan executed;  // poses after drift
  field::FieldGrid treated;
};

// Lethality above which an irradiated crop cell counts as collateral.
double collateral_threshold(const dose::DoseRecipe& recipe);

// Independent stream seed derived from a mission seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

MissionResult execute_mission(const field::FieldGrid& grid, const sched::ArrayLayout& layout,
                              const RobotConfig& robot, const detect::ConfusionSpec& detector,
                              const MissionConfig& mission, std::uint64_t seed);

MissionMetrics run_mission(const field::FieldGrid& grid, const sched::ArrayLayout& layout, const RobotConfig& robot,
                           const detect::ConfusionSpec& detector, const MissionConfig& mission, std::uint64_t seed);

// Scores a treated field against ground truth and the detection report.
MissionMetrics score(const field::FieldGrid& treated, const detect::DetectionReport& report,
                     const dose::DoseRecipe& recipe, const MissionConfig& mission);

}  // namespace deweed::sim
