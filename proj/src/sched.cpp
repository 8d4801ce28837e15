#include "deweed/sched.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "deweed/text.hpp"

namespace deweed::sched {

using field::CellIndex;
using field::FieldGrid;

std::size_t ArrayLayout::effective_cap() const noexcept {
  if (max_simultaneous) return *max_simultaneous;
  if (honor_paper_16) return kPublishedSourceLimit;
  if (!(per_source_power > 0.0) || !(power_budget >= 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(power_budget / per_source_power));
}

bool ArrayLayout::admits(std::size_t active) const noexcept {
  if (active > effective_cap()) return false;
  if (static_cast<double>(active) * per_source_power <= power_budget) return true;
  return honor_paper_16 && active <= kPublishedSourceLimit;
}

void ArrayLayout::validate() const {
  if (rows == 0 || cols == 0) throw ValidationError("layout.rows and layout.cols must be >= 1");
  if (!(source_pitch > 0.0) || !std::isfinite(source_pitch)) throw ValidationError("layout.source_pitch_m must be > 0");
  if (!(per_source_power > 0.0) || !std::isfinite(per_source_power)) {
    throw ValidationError("layout.per_source_power_w must be > 0");
  }
  if (!(power_budget > 0.0) || !std::isfinite(power_budget)) throw ValidationError("layout.power_budget_w must be > 0");
  if (!(source_height >= 0.0)) throw ValidationError("layout.source_height_m must be >= 0");
  if (!(camera_lead >= 0.0)) throw ValidationError("layout.camera_lead_m must be >= 0");
  const std::size_t cap = effective_cap();
  if (cap == 0) throw ValidationError("layout.max_simultaneous: power budget admits no source");
  if (!admits(cap)) {
    const double draw = static_cast<double>(cap) * per_source_power;
    std::string msg = "layout.max_simultaneous: " + std::to_string(cap) + " sources x " +
                      text::format_double(per_source_power) + " W = " + text::format_double(draw) +
                      " W exceeds the power budget of " + text::format_double(power_budget) + " W";
    if (!honor_paper_16 && cap <= kPublishedSourceLimit) msg += " (set layout.honor_paper_16=true to accept the 16-source limit)";
    throw ValidationError(msg);
  }
  recipe.validate();
}

std::size_t ActivationPlan::activation_steps() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const ActivationStep& s) { return !s.active_set.empty(); }));
}

void ActivationPlan::finalize(double per_source_power) {
  total_time = 0.0;
  total_energy = 0.0;
  for (const auto& s : steps) {
    total_time += s.duration;
    total_energy += static_cast<double>(s.active_set.size()) * per_source_power * s.duration;
  }
}

namespace {

std::string describe_cells(const std::vector<CellIndex>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i == 8) {
      out += ", ... (" + std::to_string(cells.size()) + " total)";
      break;
    }
    out += (i ? ", (" : "(") + std::to_string(cells[i].row) + ", " + std::to_string(cells[i].col) + ")";
  }
  return out;
}

}  // namespace

UnreachableCells::UnreachableCells(std::vector<CellIndex> cells)
    : ValidationError("unreachable cell(s): " + describe_cells(cells)), cells_(std::move(cells)) {}

double required_dwell(const ArrayLayout& layout, double target) {
  return dose::dwell_time_for_target(layout.recipe, target);
}

double exposure_window(const ArrayLayout& layout, double speed) {
  if (!(speed > 0.0)) throw ValidationError("mission.speed_m_s must be > 0");
  return static_cast<double>(layout.cols) * layout.source_pitch / speed;
}

double critical_speed(const ArrayLayout& layout, double target) {
  return static_cast<double>(layout.cols) * layout.source_pitch / required_dwell(layout, target);
}

namespace {

// Shared lane geometry for every planner.
struct Lanes {
  std::size_t needed = 0;     // lanes to cover all field rows
  std::size_t reachable = 0;  // lanes the layout may drive
  std::size_t max_offset = 0; // last dwell offset along a lane, in cells
  double pitch = 0.0;
};

Lanes lane_geometry(const FieldGrid& grid, const ArrayLayout& layout) {
  Lanes lanes;
  lanes.needed = (grid.rows() + layout.rows - 1) / layout.rows;
  lanes.reachable = layout.max_lanes == 0 ? lanes.needed : std::min(lanes.needed, layout.max_lanes);
  lanes.max_offset = grid.cols() > layout.cols ? grid.cols() - layout.cols : 0;
  lanes.pitch = grid.pitch();
  return lanes;
}

void check_inputs(const FieldGrid& grid, const detect::DetectionReport& report, const ArrayLayout& layout) {
  layout.validate();
  if (report.rows != grid.rows() || report.cols != grid.cols() || report.reported.size() != grid.size()) {
    throw ValidationError("detection report does not cover the field");
  }
  if (std::abs(layout.source_pitch - grid.pitch()) > 1e-12) {
    throw ValidationError("layout.source_pitch_m must equal the field pitch");
  }
}

// Reported weeds grouped by lane, row-major within each lane.
std::vector<std::vector<CellIndex>> weeds_by_lane(const FieldGrid& grid, const detect::DetectionReport& report,
                                                  const ArrayLayout& layout, const Lanes& lanes) {
  std::vector<std::vector<CellIndex>> out(lanes.reachable);
  std::vector<CellIndex> unreachable;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!report.reports_weed(i)) continue;
    const CellIndex idx = grid.unflat(i);
    const std::size_t lane = idx.row / layout.rows;
    if (lane >= lanes.reachable) {
      unreachable.push_back(idx);
    } else {
      out[lane].push_back(idx);
    }
  }
  if (!unreachable.empty()) throw UnreachableCells(std::move(unreachable));
  return out;
}

ActivationStep travel_step(double x, double y, double distance, double speed) {
  ActivationStep step;
  step.duration = distance / speed;
  step.array_pose = field::make_pose(x, y);
  step.mode = StepMode::Moving;
  step.speed = speed;
  return step;
}

// Emits a dwell-mode lane: travel to each stop in ascending offset, fire
// the stop's cells in row-major batches, then travel to the lane end.
// `stops` maps offset -> cells assigned to that stop.
void emit_dwell_lane(std::vector<ActivationStep>& steps, std::size_t lane, bool last_lane,
                     const std::map<std::size_t, std::vector<CellIndex>>& stops, const ArrayLayout& layout,
                     const Lanes& lanes, double dwell, double transit_speed) {
  const double p = lanes.pitch;
  const std::size_t row0 = lane * layout.rows;
  const double y = static_cast<double>(row0) * p;
  const std::size_t cap = layout.effective_cap();
  std::size_t position = 0;
  for (const auto& [offset, assigned] : stops) {
    if (assigned.empty()) continue;
    if (offset > position) {
      steps.push_back(travel_step(static_cast<double>(position) * p, y, static_cast<double>(offset - position) * p,
                                  transit_speed));
      position = offset;
    }
    std::vector<CellIndex> cells = assigned;
    std::sort(cells.begin(), cells.end());
    for (std::size_t begin = 0; begin < cells.size(); begin += cap) {
      ActivationStep step;
      step.duration = dwell;
      step.array_pose = field::make_pose(static_cast<double>(offset) * p, y);
      step.mode = StepMode::Dwell;
      const std::size_t end = std::min(cells.size(), begin + cap);
      for (std::size_t k = begin; k < end; ++k) {
        step.active_set.push_back((cells[k].row - row0) * layout.cols + (cells[k].col - offset));
      }
      std::sort(step.active_set.begin(), step.active_set.end());
      steps.push_back(std::move(step));
    }
  }
  if (lanes.max_offset > position) {
    steps.push_back(travel_step(static_cast<double>(position) * p, y,
                                static_cast<double>(lanes.max_offset - position) * p, transit_speed));
  }
  if (!last_lane) {
    // Return to the lane start and shift across by one array width.
    const double distance = static_cast<double>(lanes.max_offset) * p + static_cast<double>(layout.rows) * p;
    steps.push_back(travel_step(static_cast<double>(lanes.max_offset) * p, y, distance, transit_speed));
  }
}

void check_transit(const PlanOptions& options) {
  if (!(options.transit_speed > 0.0) || !std::isfinite(options.transit_speed)) {
    throw ValidationError("robot.transit_speed_m_s must be > 0");
  }
}

}  // namespace

ActivationPlan plan_move_then_dwell(const FieldGrid& grid, const detect::DetectionReport& report,
                                    const ArrayLayout& layout, double target, const PlanOptions& options) {
  check_inputs(grid, report, layout);
  check_transit(options);
  const double dwell = required_dwell(layout, target);
  const Lanes lanes = lane_geometry(grid, layout);
  const auto lane_weeds = weeds_by_lane(grid, report, layout, lanes);

  ActivationPlan plan;
  plan.target = target;
  for (std::size_t lane = 0; lane < lanes.reachable; ++lane) {
    // Column-major order makes the leftmost uncovered weed the front.
    std::vector<CellIndex> pending = lane_weeds[lane];
    std::sort(pending.begin(), pending.end(),
              [](const CellIndex& a, const CellIndex& b) { return std::tie(a.col, a.row) < std::tie(b.col, b.row); });
    std::map<std::size_t, std::vector<CellIndex>> stops;
    std::size_t front = 0;
    while (front < pending.size()) {
      const std::size_t offset = std::min(pending[front].col, lanes.max_offset);
      auto& assigned = stops[offset];
      while (front < pending.size() && pending[front].col < offset + layout.cols) assigned.push_back(pending[front++]);
    }
    emit_dwell_lane(plan.steps, lane, lane + 1 == lanes.reachable, stops, layout, lanes, dwell, options.transit_speed);
  }
  plan.finalize(layout.per_source_power);
  return plan;
}

ActivationPlan brute_force_plan(const FieldGrid& grid, const detect::DetectionReport& report,
                                const ArrayLayout& layout, double target, const PlanOptions& options) {
  check_inputs(grid, report, layout);
  check_transit(options);
  const double dwell = required_dwell(layout, target);
  const Lanes lanes = lane_geometry(grid, layout);
  const auto lane_weeds = weeds_by_lane(grid, report, layout, lanes);

  std::size_t weeds = 0;
  std::size_t positions = 0;
  for (const auto& lw : lane_weeds) {
    weeds += lw.size();
    if (!lw.empty()) positions += lanes.max_offset + 1;
  }
  if (weeds > kBruteForceMaxWeeds) {
    throw GuardError("exhaustive planner accepts at most " + std::to_string(kBruteForceMaxWeeds) +
                     " reported weeds, got " + std::to_string(weeds));
  }
  if (positions > kBruteForceMaxPositions) {
    throw GuardError("exhaustive planner accepts at most " + std::to_string(kBruteForceMaxPositions) +
                     " array positions, got " + std::to_string(positions));
  }

  const std::size_t cap = layout.effective_cap();
  ActivationPlan plan;
  plan.target = target;
  for (std::size_t lane = 0; lane < lanes.reachable; ++lane) {
    const auto& cells = lane_weeds[lane];  // row-major
    const std::size_t n_pos = lanes.max_offset + 1;
    auto first_offset = [&](const CellIndex& c) { return c.col + 1 > layout.cols ? c.col + 1 - layout.cols : 0; };
    auto last_offset = [&](const CellIndex& c) { return std::min(c.col, lanes.max_offset); };

    // Minimum batch count for weeds [i, n) given per-position counts so far.
    // Time and energy depend only on these counts, so memoizing on them
    // keeps the search exhaustive over assignments.
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::vector<std::size_t>&)> best =
        [&](std::size_t i, std::vector<std::size_t>& counts) -> std::size_t {
      if (i == cells.size()) {
        std::size_t batches = 0;
        for (std::size_t k : counts) batches += (k + cap - 1) / cap;
        return batches;
      }
      auto key = std::make_pair(i, counts);
      if (auto it = memo.find(key); it != memo.end()) return it->second;
      std::size_t result = std::numeric_limits<std::size_t>::max();
      for (std::size_t o = first_offset(cells[i]); o <= last_offset(cells[i]); ++o) {
        ++counts[o];
        result = std::min(result, best(i + 1, counts));
        --counts[o];
      }
      memo.emplace(std::move(key), result);
      return result;
    };

    std::vector<std::size_t> counts(n_pos, 0);
    const std::size_t optimum = best(0, counts);
    // Lexicographically smallest assignment achieving the optimum.
    std::map<std::size_t, std::vector<CellIndex>> stops;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (std::size_t o = first_offset(cells[i]); o <= last_offset(cells[i]); ++o) {
        ++counts[o];
        if (best(i + 1, counts) == optimum) {
          stops[o].push_back(cells[i]);
          break;
        }
        --counts[o];
      }
    }
    emit_dwell_lane(plan.steps, lane, lane + 1 == lanes.reachable, stops, layout, lanes, dwell, options.transit_speed);
  }
  plan.finalize(layout.per_source_power);
  return plan;
}

ContinuousPlan plan_continuous(const FieldGrid& grid, const detect::DetectionReport& report,
                               const ArrayLayout& layout, double speed, double target, const PlanOptions& options) {
  check_inputs(grid, report, layout);
  check_transit(options);
  ContinuousPlan result;
  auto& verdict = result.verdict;
  verdict.exposure_window = exposure_window(layout, speed);
  verdict.required_dwell = required_dwell(layout, target);

  const Lanes lanes = lane_geometry(grid, layout);
  const auto lane_weeds = weeds_by_lane(grid, report, layout, lanes);
  const double p = lanes.pitch;
  const std::size_t m = layout.cols;
  const std::size_t cap = layout.effective_cap();
  const double slot = p / speed;
  const std::size_t slots = grid.cols() + m - 1;
  const bool full_window = verdict.required_dwell >= verdict.exposure_window;
  const double exposure = std::min(verdict.required_dwell, verdict.exposure_window);
  // Lane-local x of the footprint corner at t = 0: the leading source column
  // is centred on the boundary of column 0.
  const double x0 = -(static_cast<double>(m) - 1.0) * p - 0.5 * p;

  auto& steps = result.plan.steps;
  result.plan.target = target;
  double clock = 0.0;

  for (std::size_t lane = 0; lane < lanes.reachable; ++lane) {
    const std::size_t row0 = lane * layout.rows;
    const double y = static_cast<double>(row0) * p;
    const auto& cells = lane_weeds[lane];
    std::vector<double> start(cells.size());
    std::vector<double> end(cells.size());
    std::vector<double> breaks;
    breaks.reserve(slots + 1 + cells.size());
    for (std::size_t k = 0; k <= slots; ++k) breaks.push_back(static_cast<double>(k) * slot);
    for (std::size_t w = 0; w < cells.size(); ++w) {
      start[w] = static_cast<double>(cells[w].col) * slot;
      end[w] = full_window ? static_cast<double>(cells[w].col + m) * slot : start[w] + exposure;
      breaks.push_back(end[w]);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const double lane_end = breaks.back();
    std::optional<std::size_t> open_travel;  // index of a Moving step collecting idle time
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double t0 = breaks[b];
      const double t1 = breaks[b + 1];
      if (t1 - t0 <= 1e-12 * slot) continue;
      const double mid = 0.5 * (t0 + t1);
      const std::size_t s = std::min(static_cast<std::size_t>(mid / slot), slots - 1);
      ActivationStep step;
      step.duration = t1 - t0;
      step.array_pose = field::make_pose(x0 + speed * t0, y);
      step.mode = StepMode::Moving;
      step.speed = speed;
      std::size_t demand = 0;
      for (std::size_t w = 0; w < cells.size(); ++w) {
        if (!(start[w] <= mid && mid < end[w])) continue;
        ++demand;
        if (step.active_set.size() < cap) {
          const std::size_t c = cells[w].col + m - 1 - s;
          step.active_set.push_back((cells[w].row - row0) * m + c);
        }
      }
      verdict.peak_demand = std::max(verdict.peak_demand, demand);
      if (demand > cap && !verdict.bottleneck_time) verdict.bottleneck_time = clock + t0;
      std::sort(step.active_set.begin(), step.active_set.end());
      if (step.active_set.empty()) {
        if (open_travel) {
          steps[*open_travel].duration += step.duration;
        } else {
          open_travel = steps.size();
          steps.push_back(std::move(step));
        }
      } else {
        open_travel.reset();
        steps.push_back(std::move(step));
      }
    }
    clock += lane_end;
    if (lane + 1 < lanes.reachable) {
      const double distance = static_cast<double>(slots) * p + static_cast<double>(layout.rows) * p;
      steps.push_back(travel_step(x0 + speed * lane_end, y, distance, options.transit_speed));
      clock += steps.back().duration;
    }
  }

  if (verdict.exposure_window < verdict.required_dwell) {
    verdict.feasible = false;
    verdict.reason = "exposure window " + text::format_double(verdict.exposure_window) + " s is shorter than the " +
                     text::format_double(verdict.required_dwell) + " s dwell";
  }
  if (verdict.bottleneck_time) {
    verdict.feasible = false;
    if (!verdict.reason.empty()) verdict.reason += "; ";
    verdict.reason += "demand of " + std::to_string(verdict.peak_demand) + " sources exceeds the cap of " +
                      std::to_string(cap) + " at t=" + text::format_double(*verdict.bottleneck_time) + " s";
  }
  result.plan.finalize(layout.per_source_power);
  return result;
}

void validate_plan(const ActivationPlan& plan, const ArrayLayout& layout) {
  layout.validate();
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    const std::string where = "plan step " + std::to_string(i) + ": ";
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw ValidationError(where + "duration must be > 0");
    if (s.mode == StepMode::Moving && (!(s.speed > 0.0) || !std::isfinite(s.speed))) {
      throw ValidationError(where + "moving step needs a positive speed");
    }
    if (!layout.admits(s.active_set.size())) {
      throw ValidationError(where + std::to_string(s.active_set.size()) + " active sources break the power limit");
    }
    for (std::size_t k = 0; k < s.active_set.size(); ++k) {
      if (s.active_set[k] >= layout.source_count()) throw ValidationError(where + "source index out of range");
      if (k > 0 && s.active_set[k] <= s.active_set[k - 1]) {
        throw ValidationError(where + "active set must be sorted without duplicates");
      }
    }
  }
}

std::optional<CellIndex> cell_under_source(const FieldGrid& grid, const ArrayLayout& layout,
                                           const ActivationStep& step, std::size_t source) {
  const std::size_t r = source / layout.cols;
  const std::size_t c = source % layout.cols;
  const double travel = step.mode == StepMode::Moving ? 0.5 * step.speed * step.duration : 0.0;
  const double x = step.array_pose.x + travel * std::cos(step.array_pose.heading) +
                   (static_cast<double>(c) + 0.5) * layout.source_pitch;
  const double y = step.array_pose.y + travel * std::sin(step.array_pose.heading) +
                   (static_cast<double>(r) + 0.5) * layout.source_pitch;
  return field::cell_at(grid, field::make_pose(x, y));
}

FieldGrid simulate_plan(const FieldGrid& grid, const ActivationPlan& plan, const ArrayLayout& layout) {
  validate_plan(plan, layout);
  FieldGrid out = grid;
  std::vector<double> weight(out.size(), 0.0);
  for (const auto& step : plan.steps) {
    if (step.active_set.empty()) continue;
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t source : step.active_set) {
      if (auto cell = cell_under_source(out, layout, step, source)) weight[out.flat(*cell)] += 1.0;
    }
    out.expose(weight, layout.recipe, step.duration);
  }
  out.mark_treated(layout.recipe, plan.target);
  return out;
}

namespace {

constexpr std::string_view kPlanHeader =
    "step_index,mode,pose_x,pose_y,duration_s,active_source_indices,step_energy_j";

}  // namespace

std::string plan_csv(const ActivationPlan& plan, const ArrayLayout& layout) {
  std::string out(kPlanHeader);
  out += '\n';
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    out += std::to_string(i) + ',';
    out += s.mode == StepMode::Dwell ? std::string("dwell") : "moving:" + text::format_double(s.speed);
    out += ',' + text::format_double(s.array_pose.x) + ',' + text::format_double(s.array_pose.y) + ',' +
           text::format_double(s.duration) + ',';
    for (std::size_t k = 0; k < s.active_set.size(); ++k) {
      if (k) out += ';';
      out += std::to_string(s.active_set[k]);
    }
    out += ',' + text::format_double(static_cast<double>(s.active_set.size()) * layout.per_source_power * s.duration);
    out += '\n';
  }
  return out;
}

ActivationPlan parse_plan_csv(std::string_view csv, const ArrayLayout& layout) {
  ActivationPlan plan;
  std::size_t line_no = 0;
  bool header = false;
  for (std::string_view line : text::split(csv, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != kPlanHeader) throw ParseError(line_no, 1, "unexpected plan CSV header");
      header = true;
      continue;
    }
    const auto fields = text::split(line, ',');
    if (fields.size() != 7) throw ParseError(line_no, 1, "expected 7 columns");
    ActivationStep step;
    if (fields[1] == "dwell") {
      step.mode = StepMode::Dwell;
    } else if (fields[1].starts_with("moving:")) {
      step.mode = StepMode::Moving;
      const auto v = text::parse_double(fields[1].substr(7));
      if (!v) throw ParseError(line_no, 2, "bad moving speed");
      step.speed = *v;
    } else {
      throw ParseError(line_no, 2, "unknown mode '" + std::string(fields[1]) + "'");
    }
    const auto x = text::parse_double(fields[2]);
    const auto y = text::parse_double(fields[3]);
    const auto d = text::parse_double(fields[4]);
    if (!x || !y || !d) throw ParseError(line_no, 3, "bad numeric field");
    step.array_pose = field::make_pose(*x, *y);
    step.duration = *d;
    if (!fields[5].empty()) {
      for (auto tok : text::split(fields[5], ';')) {
        const auto idx = text::parse_unsigned(tok);
        if (!idx) throw ParseError(line_no, 6, "bad source index '" + std::string(tok) + "'");
        step.active_set.push_back(static_cast<std::size_t>(*idx));
      }
    }
    plan.steps.push_back(std::move(step));
  }
  if (!header) throw ParseError(1, 1, "empty plan CSV");
  plan.finalize(layout.per_source_power);
  return plan;
}

}  // namespace deweed::sched
