#pragma once

// Power-constrained activation planning for the source array.
//
// Geometry: the array is `rows` sources across the direction of travel and
// `cols` sources along it, on the same pitch as the field cells. The array
// drives lanes along +x; lane k covers field rows [k*rows, (k+1)*rows).
// An array pose is the world position of the footprint's minimum corner and
// source (r, c) sits over the cell containing
// (pose.x + (c + 0.5) * pitch, pose.y + (r + 0.5) * pitch).
// Source indices are row-major: r * cols + c.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deweed/detect.hpp"
#include "deweed/dose.hpp"
#include "deweed/error.hpp"
#include "deweed/field.hpp"

namespace deweed::sched {

inline constexpr double kOneKmPerHour = 1000.0 / 3600.0;
inline constexpr std::size_t kPublishedSourceLimit = 16;

struct ArrayLayout {
  std::size_t rows = 7;
  std::size_t cols = 15;
  double source_pitch = field::kDefaultPitch;
  double per_source_power = 410.0;  // W
  double power_budget = 6400.0;     // W
  // Unset: floor(power_budget / per_source_power), or 16 with honor_paper_16.
  std::optional<std::size_t> max_simultaneous;
  // Accept the published 16-source limit even though 16 x 410 W > 6400 W.
  bool honor_paper_16 = false;
  dose::DoseRecipe recipe = dose::phase1_recipe();
  double source_height = 0.1524;  // m, 6 inches
  double camera_lead = 0.3;       // m ahead of the array
  std::size_t max_lanes = 0;      // 0: as many as the field needs

  std::size_t source_count() const noexcept { return rows * cols; }
  std::size_t effective_cap() const noexcept;
  // Throws ValidationError naming the offending key.
  void validate() const;
  // Whether `active` simultaneous sources respect the power invariant.
  bool admits(std::size_t active) const noexcept;
};

enum class StepMode { Dwell, Moving };

struct ActivationStep {
  std::vector<std::size_t> active_set;  // sorted source indices
  double duration = 0.0;                // s
  field::WorldPose array_pose;          // at step start
  StepMode mode = StepMode::Dwell;
  double speed = 0.0;                   // m/s along +x when Moving

  friend bool operator==(const ActivationStep& a, const ActivationStep& b) {
    return a.active_set == b.active_set && a.duration == b.duration && a.array_pose.x == b.array_pose.x &&
           a.array_pose.y == b.array_pose.y && a.array_pose.heading == b.array_pose.heading && a.mode == b.mode &&
           a.speed == b.speed;
  }
};

struct ActivationPlan {
  std::vector<ActivationStep> steps;
  double total_time = 0.0;    // s
  double total_energy = 0.0;  // J
  double target = 1.0;        // lethality the plan was built for

  std::size_t activation_steps() const noexcept;
  // Recomputes total_time and total_energy from the steps.
  void finalize(double per_source_power);
};

struct FeasibilityVerdict {
  bool feasible = true;
  double exposure_window = 0.0;  // s each cell spends under the passing sources
  double required_dwell = 0.0;   // s
  std::size_t peak_demand = 0;   // most sources wanted at one instant
  std::optional<double> bottleneck_time;  // first instant demand exceeded the cap
  std::string reason;
};

struct ContinuousPlan {
  ActivationPlan plan;
  FeasibilityVerdict verdict;
};

struct PlanOptions {
  double transit_speed = kOneKmPerHour;  // m/s between dwell stops and lanes
};

// Reported weed cells no array pose can reach.
class UnreachableCells : public ValidationError {
 public:
  explicit UnreachableCells(std::vector<field::CellIndex> cells);
  const std::vector<field::CellIndex>& cells() const noexcept { return cells_; }

 private:
  std::vector<field::CellIndex> cells_;
};

double required_dwell(const ArrayLayout& layout, double target);

// Time a cell spends under the `cols` sources passing over it at `speed`.
double exposure_window(const ArrayLayout& layout, double speed);

// Speed at which the exposure window equals the required dwell.
double critical_speed(const ArrayLayout& layout, double target);

// Greedy Move-then-Dwell: per lane, stop with the footprint's leading edge
// on the leftmost untreated weed column, then fire the covered weeds in
// row-major batches of at most effective_cap() sources.
ActivationPlan plan_move_then_dwell(const field::FieldGrid& grid, const detect::DetectionReport& report,
                                    const ArrayLayout& layout, double target, const PlanOptions& options = {});

// Constant-speed pass: each reported weed is irradiated by the source over
// it for min(required_dwell, exposure_window) seconds from the moment the
// leading source column reaches it.
ContinuousPlan plan_continuous(const field::FieldGrid& grid, const detect::DetectionReport& report,
                               const ArrayLayout& layout, double speed, double target,
                               const PlanOptions& options = {});

inline constexpr std::size_t kBruteForceMaxWeeds = 12;
inline constexpr std::size_t kBruteForceMaxPositions = 6;

// Exact minimum-time dwell plan over every stop position and weed-to-stop
// assignment. Ties go to lower energy, then the lexicographically smallest
// assignment. Throws GuardError above 12 weeds or 6 array positions.
ActivationPlan brute_force_plan(const field::FieldGrid& grid, const detect::DetectionReport& report,
                                const ArrayLayout& layout, double target, const PlanOptions& options = {});

// Throws ValidationError if any step breaks the layout's power or size rules.
void validate_plan(const ActivationPlan& plan, const ArrayLayout& layout);

// Cell beneath `source` during `step`, evaluated at the step's midpoint.
std::optional<field::CellIndex> cell_under_source(const field::FieldGrid& grid, const ArrayLayout& layout,
                                                  const ActivationStep& step, std::size_t source);

// Applies every step's exposure to a copy of `grid` and refreshes the
// treated flags against plan.target.
field::FieldGrid simulate_plan(const field::FieldGrid& grid, const ActivationPlan& plan, const ArrayLayout& layout);

// step_index,mode,pose_x,pose_y,duration_s,active_source_indices,step_energy_j
// mode is "dwell" or "moving:<speed>"; numbers use shortest round-trip form.
std::string plan_csv(const ActivationPlan& plan, const ArrayLayout& layout);
ActivationPlan parse_plan_csv(std::string_view text, const ArrayLayout& layout);

}  // namespace deweed::sched
