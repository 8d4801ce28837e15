#pragma once

// Export formats for mission outcomes.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deweed/field.hpp"
#include "deweed/sim.hpp"
#include "json.hpp"

namespace deweed::report {

std::string metrics_csv_header();
std::string metrics_csv_row(const sim::MissionMetrics& m, sim::MissionMode mode);
// Header plus one row per mission.
std::string metrics_csv(std::span<const sim::MissionMetrics> missions, sim::MissionMode mode);
// Inverse of metrics_csv; throws ParseError.
std::vector<sim::MissionMetrics> parse_metrics_csv(std::string_view text);

nlohmann::json metrics_json(const sim::MissionMetrics& m, sim::MissionMode mode);

// Binary PPM heat map of per-cell lethality, `scale` pixels per cell.
// Cell borders are tinted by ground truth: magenta weed, green crop, brown soil.
std::string heatmap_ppm(const field::FieldGrid& grid, std::span<const double> lethality, std::size_t scale = 12);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

Aggregate aggregate(std::span<const double> values);

struct SweepRow {
  std::string value;
  std::size_t seeds = 0;
  double feasible_fraction = 0.0;
  Aggregate kill_fraction;
  Aggregate missed_weeds;
  Aggregate underdosed_weeds;
  Aggregate crop_collateral;
  Aggregate total_time;
  Aggregate total_energy;
  Aggregate mismatch_events;
  Aggregate accuracy;
};

SweepRow summarize(std::string value, std::span<const sim::MissionMetrics> missions);

std::string sweep_csv(std::string_view axis, std::span<const SweepRow> rows);
std::vector<SweepRow> parse_sweep_csv(std::string_view text, std::string* axis = nullptr);

// RFC 4180 style quoting of a single field when needed.
std::string csv_field(std::string_view value);
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace deweed::report
