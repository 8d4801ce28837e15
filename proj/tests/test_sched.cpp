#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "deweed/detect.hpp"
#include "deweed/error.hpp"
#include "deweed/sched.hpp"
#include "oracles.hpp"

using namespace deweed;
using field::CellClass;
using field::CellIndex;
using sched::ArrayLayout;

namespace {

constexpr double kPhase1Dwell = 1.0 / 0.03465;

field::FieldGrid grid_with_weeds(std::size_t rows, std::size_t cols, const std::vector<CellIndex>& weeds) {
  field::FieldGrid g(rows, cols, field::kDefaultPitch);
  for (std::size_t i = 0; i < g.size(); ++i) g.set_truth(g.unflat(i), CellClass::Soil);
  for (const auto& w : weeds) g.set_truth(w, CellClass::Weed);
  return g;
}

std::vector<CellIndex> random_weeds(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::size_t n) {
  std::vector<std::size_t> flat(rows * cols);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = i;
  std::shuffle(flat.begin(), flat.end(), rng);
  std::vector<CellIndex> out;
  for (std::size_t i = 0; i < std::min(n, flat.size()); ++i) out.push_back({flat[i] / cols, flat[i] % cols});
  return out;
}

double dwell_time(const sched::ActivationPlan& plan) {
  double t = 0.0;
  for (const auto& s : plan.steps) {
    if (s.mode == sched::StepMode::Dwell) t += s.duration;
  }
  return t;
}

// Independent power check: per-step wattage against the budget.
bool within_power(const sched::ActivationPlan& plan, const ArrayLayout& layout) {
  for (const auto& s : plan.steps) {
    const double watts = static_cast<double>(s.active_set.size()) * layout.per_source_power;
    const bool budget_ok = watts <= layout.power_budget;
    const bool override_ok = layout.honor_paper_16 && s.active_set.size() <= sched::kPublishedSourceLimit;
    if (!budget_ok && !override_ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("layout cap: floor(6400 / 410) = 15, 16 only with the override") {
  ArrayLayout layout;
  CHECK(layout.effective_cap() == 15);
  CHECK(layout.source_count() == 105);
  CHECK_NOTHROW(layout.validate());

  layout.max_simultaneous = 16;
  CHECK_THROWS_AS(layout.validate(), ValidationError);
  layout.honor_paper_16 = true;
  CHECK_NOTHROW(layout.validate());
  CHECK(layout.admits(16));
  CHECK_FALSE(layout.admits(17));

  ArrayLayout honored;
  honored.honor_paper_16 = true;
  CHECK(honored.effective_cap() == 16);

  ArrayLayout bad;
  bad.per_source_power = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("required_dwell") {
  ArrayLayout layout;
  CHECK(sched::required_dwell(layout, 1.0) == doctest::Approx(28.860).epsilon(1e-4));
  CHECK(sched::required_dwell(layout, 0.5) == doctest::Approx(14.430).epsilon(1e-4));
  CHECK(sched::required_dwell(layout, 1.0) ==
        doctest::Approx(oracle::forward_time_to_target(layout.recipe.dose_rate(), 1.0)).epsilon(1e-9));
  layout.recipe = dose::DoseRecipe{"dark", 0.0, 0.0};
  CHECK_THROWS_AS(sched::required_dwell(layout, 1.0), UnreachableTarget);
}

TEST_CASE("move-then-dwell: no reported weeds gives a travel-only plan") {
  const auto grid = grid_with_weeds(7, 30, {});
  const auto plan = sched::plan_move_then_dwell(grid, detect::truth_report(grid), ArrayLayout{}, 1.0);
  CHECK(plan.activation_steps() == 0);
  CHECK(plan.total_energy == 0.0);
  // 15 columns of travel at 1 km/h.
  CHECK(plan.total_time == doctest::Approx(15 * 0.102 / sched::kOneKmPerHour));
}

TEST_CASE("move-then-dwell: single weed under source (0,0)") {
  const auto grid = grid_with_weeds(7, 15, {{0, 0}});
  const auto plan = sched::plan_move_then_dwell(grid, detect::truth_report(grid), ArrayLayout{}, 1.0);
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.steps[0].active_set == std::vector<std::size_t>{0});
  CHECK(plan.steps[0].duration == doctest::Approx(kPhase1Dwell).epsilon(1e-12));
  CHECK(plan.total_time == doctest::Approx(28.86).epsilon(1e-4));
  CHECK(plan.total_energy == doctest::Approx(410.0 * kPhase1Dwell).epsilon(1e-12));
  CHECK(plan.total_energy == doctest::Approx(11832.6).epsilon(1e-5));
}

TEST_CASE("move-then-dwell: 33 weeds under one footprint") {
  std::mt19937_64 rng(33);
  const auto grid = grid_with_weeds(7, 15, random_weeds(rng, 7, 15, 33));
  const auto report = detect::truth_report(grid);

  ArrayLayout honored;
  honored.honor_paper_16 = true;
  const auto plan16 = sched::plan_move_then_dwell(grid, report, honored, 1.0);
  REQUIRE(plan16.activation_steps() == 3);
  CHECK(plan16.steps[0].active_set.size() == 16);
  CHECK(plan16.steps[1].active_set.size() == 16);
  CHECK(plan16.steps[2].active_set.size() == 1);
  CHECK(plan16.total_time == doctest::Approx(3 * kPhase1Dwell).epsilon(1e-12));

  const auto plan15 = sched::plan_move_then_dwell(grid, report, ArrayLayout{}, 1.0);
  CHECK(plan15.activation_steps() == 3);
  CHECK(plan15.steps[2].active_set.size() == 3);

  // Each reported weed is fired exactly once.
  std::vector<int> fired(105, 0);
  for (const auto& s : plan15.steps) {
    for (auto k : s.active_set) ++fired[k];
  }
  for (std::size_t i = 0; i < 105; ++i) CHECK(fired[i] == (report.reports_weed(i) ? 1 : 0));
}

TEST_CASE("move-then-dwell: unreachable reported weeds are listed") {
  const auto grid = grid_with_weeds(14, 15, {{2, 3}, {9, 4}, {13, 0}});
  ArrayLayout layout;
  layout.max_lanes = 1;
  try {
    sched::plan_move_then_dwell(grid, detect::truth_report(grid), layout, 1.0);
    FAIL("expected unreachable cells");
  } catch (const sched::UnreachableCells& e) {
    CHECK(e.cells() == std::vector<CellIndex>{{9, 4}, {13, 0}});
    CHECK(std::string(e.what()).find("(9, 4)") != std::string::npos);
  }
}

TEST_CASE("move-then-dwell: rejects mismatched inputs") {
  const auto grid = grid_with_weeds(7, 15, {{0, 0}});
  auto report = detect::truth_report(grid);
  report.reported.pop_back();
  CHECK_THROWS_AS(sched::plan_move_then_dwell(grid, report, ArrayLayout{}, 1.0), ValidationError);
  ArrayLayout layout;
  layout.source_pitch = 0.2;
  CHECK_THROWS_AS(sched::plan_move_then_dwell(grid, detect::truth_report(grid), layout, 1.0), ValidationError);
}

TEST_CASE("brute force: 1 x 5 examples") {
  const auto grid = grid_with_weeds(1, 5, {{0, 0}, {0, 4}});
  ArrayLayout layout;
  layout.rows = 1;
  layout.cols = 5;
  layout.honor_paper_16 = true;
  const auto plan = sched::brute_force_plan(grid, detect::truth_report(grid), layout, 1.0);
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.steps[0].active_set == std::vector<std::size_t>{0, 4});
  CHECK(plan.total_time == doctest::Approx(28.86).epsilon(1e-4));

  layout.honor_paper_16 = false;
  layout.max_simultaneous = 1;
  const auto serial = sched::brute_force_plan(grid, detect::truth_report(grid), layout, 1.0);
  CHECK(serial.steps.size() == 2);
  CHECK(serial.total_time == doctest::Approx(57.72).epsilon(1e-4));

  const auto empty = grid_with_weeds(1, 5, {});
  CHECK(sched::brute_force_plan(empty, detect::truth_report(empty), layout, 1.0).steps.empty());
}

TEST_CASE("brute force: guards") {
  std::mt19937_64 rng(1);
  const auto many = grid_with_weeds(7, 15, random_weeds(rng, 7, 15, 13));
  CHECK_THROWS_AS(sched::brute_force_plan(many, detect::truth_report(many), ArrayLayout{}, 1.0), GuardError);
  const auto wide = grid_with_weeds(7, 21, {{0, 0}});
  CHECK_THROWS_AS(sched::brute_force_plan(wide, detect::truth_report(wide), ArrayLayout{}, 1.0), GuardError);
}

TEST_CASE("brute force: batch count matches plain enumeration over assignments") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 150; ++trial) {
    ArrayLayout layout;
    layout.rows = 1 + rng() % 3;
    layout.cols = 2 + rng() % 4;
    layout.max_simultaneous = 1 + rng() % 3;
    const std::size_t cols = layout.cols + rng() % 4;  // up to 4 offsets
    const std::size_t rows = layout.rows;
    const std::size_t n = rng() % std::min<std::size_t>(9, rows * cols + 1);
    const auto weeds = random_weeds(rng, rows, cols, n);
    const auto grid = grid_with_weeds(rows, cols, weeds);
    const auto plan = sched::brute_force_plan(grid, detect::truth_report(grid), layout, 1.0);

    const std::size_t positions = cols - layout.cols + 1;
    std::vector<std::vector<std::size_t>> cover;
    for (const auto& w : weeds) {
      std::vector<std::size_t> offsets;
      for (std::size_t o = 0; o < positions; ++o) {
        if (o <= w.col && w.col < o + layout.cols) offsets.push_back(o);
      }
      cover.push_back(offsets);
    }
    const std::size_t expected = weeds.empty() ? 0 : oracle::min_batches_enumerated(cover, positions, *layout.max_simultaneous);
    CHECK(plan.activation_steps() == expected);
    CHECK(within_power(plan, layout));
  }
}

TEST_CASE("greedy vs exhaustive: equal on single stops, bounded on multi-stop") {
  std::mt19937_64 rng(7);
  double worst = 1.0;
  for (int trial = 0; trial < 300; ++trial) {
    ArrayLayout layout;
    layout.max_simultaneous = std::vector<std::size_t>{1, 2, 3, 5, 15}[rng() % 5];
    const bool single = trial % 2 == 0;
    const std::size_t cols = single ? 15 : 15 + 1 + rng() % 5;
    const auto weeds = random_weeds(rng, 7, cols, rng() % 13);
    const auto grid = grid_with_weeds(7, cols, weeds);
    const auto report = detect::truth_report(grid);
    const auto greedy = sched::plan_move_then_dwell(grid, report, layout, 1.0);
    const auto exact = sched::brute_force_plan(grid, report, layout, 1.0);
    CHECK(exact.total_time <= greedy.total_time + 1e-9);
    if (single) {
      CHECK(greedy.total_time == doctest::Approx(exact.total_time).epsilon(1e-12));
    } else if (exact.total_time > 0.0) {
      const double ratio = dwell_time(greedy) > 0 ? greedy.total_time / exact.total_time : 1.0;
      worst = std::max(worst, ratio);
      CHECK(ratio <= 1.5);
    }
  }
  MESSAGE("worst greedy/exhaustive total_time ratio: " << worst);
}

TEST_CASE("plan invariants: power cap, completeness, monotone in cap") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    const auto grid = field::build_field(7 + rng() % 15, 15 + rng() % 30, field::kDefaultPitch,
                                         0.05 + 0.4 * static_cast<double>(rng() % 100) / 100.0, rng());
    const auto report = detect::truth_report(grid);
    ArrayLayout layout;
    layout.honor_paper_16 = rng() % 2 == 0;
    const auto plan = sched::plan_move_then_dwell(grid, report, layout, 1.0);
    CHECK(within_power(plan, layout));
    CHECK_NOTHROW(sched::validate_plan(plan, layout));

    const auto treated = sched::simulate_plan(grid, plan, layout);
    const auto lethal = treated.lethality_map(layout.recipe);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (report.reports_weed(i)) CHECK(lethal[i] >= 1.0 - 1e-9);
    }

    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t cap = 1; cap <= 15; ++cap) {
      ArrayLayout capped;
      capped.max_simultaneous = cap;
      const double t = sched::plan_move_then_dwell(grid, report, capped, 1.0).total_time;
      CHECK(t <= previous + 1e-9);
      previous = t;
    }
  }
}

TEST_CASE("simulate_plan: empty plan and false-positive collateral") {
  const auto grid = grid_with_weeds(7, 15, {{1, 1}});
  ArrayLayout layout;
  const auto untouched = sched::simulate_plan(grid, sched::ActivationPlan{}, layout);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(untouched.ledger(i).empty());

  auto crop_grid = grid;
  crop_grid.set_truth({3, 7}, CellClass::Crop);
  auto report = detect::truth_report(crop_grid);
  report.reported[crop_grid.flat({3, 7})] = CellClass::Weed;
  const auto plan = sched::plan_move_then_dwell(crop_grid, report, layout, 1.0);
  const auto treated = sched::simulate_plan(crop_grid, plan, layout);
  const auto lethal = treated.lethality_map(layout.recipe);
  CHECK(lethal[crop_grid.flat({3, 7})] >= 1.0 - 1e-9);
  CHECK(lethal[crop_grid.flat({1, 1})] >= 1.0 - 1e-9);
  CHECK(lethal[crop_grid.flat({0, 0})] == 0.0);

  sched::ActivationPlan invalid;
  invalid.steps.push_back(sched::ActivationStep{{0, 1}, -1.0, field::make_pose(0, 0), sched::StepMode::Dwell, 0.0});
  CHECK_THROWS_AS(sched::simulate_plan(grid, invalid, layout), ValidationError);
}

TEST_CASE("continuous: exposure window and verdicts") {
  ArrayLayout layout;
  CHECK(sched::exposure_window(layout, sched::kOneKmPerHour) == doctest::Approx(5.508).epsilon(1e-12));
  CHECK(std::abs(sched::exposure_window(layout, sched::kOneKmPerHour) - 6.0) <= 0.6);
  CHECK_THROWS_AS(sched::exposure_window(layout, 0.0), ValidationError);

  const auto grid = field::build_field(7, 40, field::kDefaultPitch, 0.02, 3);
  const auto report = detect::truth_report(grid);
  const auto phase1 = sched::plan_continuous(grid, report, layout, sched::kOneKmPerHour, 1.0);
  CHECK_FALSE(phase1.verdict.feasible);
  CHECK(phase1.verdict.required_dwell == doctest::Approx(28.86).epsilon(1e-4));

  ArrayLayout phase2;
  phase2.recipe = dose::phase2_recipe();
  const auto fast = sched::plan_continuous(grid, report, phase2, sched::kOneKmPerHour, 1.0);
  CHECK(fast.verdict.required_dwell <= 5.0);
  CHECK(fast.verdict.feasible);
  CHECK(fast.verdict.reason.empty());
}

TEST_CASE("continuous: feasible pass doses every reported weed to target") {
  std::mt19937_64 rng(21);
  ArrayLayout layout;
  layout.recipe = dose::phase2_recipe();
  for (int trial = 0; trial < 20; ++trial) {
    const auto grid = field::build_field(14, 20 + rng() % 20, field::kDefaultPitch, 0.03, rng());
    const auto report = detect::truth_report(grid);
    const auto result = sched::plan_continuous(grid, report, layout, sched::kOneKmPerHour, 1.0);
    if (!result.verdict.feasible) continue;
    CHECK(within_power(result.plan, layout));
    const auto treated = sched::simulate_plan(grid, result.plan, layout);
    const auto lethal = treated.lethality_map(layout.recipe);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (report.reports_weed(i)) {
        CHECK(lethal[i] >= 1.0 - 1e-9);
      } else {
        CHECK(lethal[i] == 0.0);
      }
    }
  }
}

TEST_CASE("continuous: cap overload yields a bottleneck verdict, never a cap breach") {
  const auto grid = field::build_field(7, 30, field::kDefaultPitch, 1.0, 2);
  ArrayLayout layout;
  layout.recipe = dose::phase2_recipe();
  const auto result = sched::plan_continuous(grid, detect::truth_report(grid), layout, sched::kOneKmPerHour, 1.0);
  CHECK_FALSE(result.verdict.feasible);
  REQUIRE(result.verdict.bottleneck_time.has_value());
  CHECK(*result.verdict.bottleneck_time >= 0.0);
  CHECK(result.verdict.peak_demand > 15);
  CHECK(within_power(result.plan, layout));
}

TEST_CASE("continuous: verdict flips at the critical speed (bisection)") {
  const auto grid = grid_with_weeds(7, 20, {{3, 10}});
  const auto report = detect::truth_report(grid);
  for (const auto& recipe : {dose::phase1_recipe(), dose::phase2_recipe()}) {
    ArrayLayout layout;
    layout.recipe = recipe;
    const double critical = 15 * 0.102 / dose::dwell_time_for_target(recipe, 1.0);
    CHECK(sched::critical_speed(layout, 1.0) == doctest::Approx(critical).epsilon(1e-12));
    double lo = critical / 4;
    double hi = critical * 4;
    REQUIRE(sched::plan_continuous(grid, report, layout, lo, 1.0).verdict.feasible);
    REQUIRE_FALSE(sched::plan_continuous(grid, report, layout, hi, 1.0).verdict.feasible);
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (sched::plan_continuous(grid, report, layout, mid, 1.0).verdict.feasible ? lo : hi) = mid;
    }
    CHECK(lo == doctest::Approx(critical).epsilon(1e-12));
    CHECK(hi == doctest::Approx(critical).epsilon(1e-12));
  }
}

TEST_CASE("plan CSV round-trips losslessly") {
  std::mt19937_64 rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    const auto grid = field::build_field(14, 25, field::kDefaultPitch, 0.2, rng());
    const auto report = detect::truth_report(grid);
    ArrayLayout layout;
    layout.recipe = trial % 2 ? dose::phase2_recipe() : dose::phase1_recipe();
    const auto plan = trial % 2 ? sched::plan_continuous(grid, report, layout, 0.31, 1.0).plan
                                : sched::plan_move_then_dwell(grid, report, layout, 0.9);
    const auto csv = sched::plan_csv(plan, layout);
    const auto back = sched::parse_plan_csv(csv, layout);
    REQUIRE(back.steps.size() == plan.steps.size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) CHECK(back.steps[i] == plan.steps[i]);
    CHECK(sched::plan_csv(back, layout) == csv);
  }
  CHECK_THROWS_AS(sched::parse_plan_csv("", ArrayLayout{}), ParseError);
  CHECK_THROWS_AS(sched::parse_plan_csv("a,b\n", ArrayLayout{}), ParseError);
}

TEST_CASE("plan CSV columns and energy") {
  const auto grid = grid_with_weeds(7, 15, {{0, 0}});
  ArrayLayout layout;
  const auto csv = sched::plan_csv(sched::plan_move_then_dwell(grid, detect::truth_report(grid), layout, 1.0), layout);
  CHECK(csv.rfind("step_index,mode,pose_x,pose_y,duration_s,active_source_indices,step_energy_j\n", 0) == 0);
  CHECK(csv.find("\n0,dwell,0,0,") != std::string::npos);
}
