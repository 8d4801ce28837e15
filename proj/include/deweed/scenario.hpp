#pragma once

// Scenario documents: one JSON object with a section per module.
//
//   {
//     "field":    {"rows": 7, "cols": 15, "pitch_m": 0.102, "weed_fraction": 0.3,
//                  "crop_share": 0.5, "map": "optional/field-map.txt"},
//     "recipes":  {"name": {"label": "...", "e_near_ir_w_m2": 0, "e_uva_w_m2": 0,
//                           "k_near_ir": 5.5e-6, "k_uva": 6.5e-5}},
//     "layout":   {"rows": 7, "cols": 15, "source_pitch_m": 0.102, "per_source_power_w": 410,
//                  "power_budget_w": 6400, "max_simultaneous": 15, "honor_paper_16": false,
//                  "source_height_m": 0.1524, "camera_lead_m": 0.3, "max_lanes": 0,
//                  "recipe": "phase1"},
//     "robot":    {"transit_speed_m_s": 0.2777, "wiggle_sigma": 0, "course_correction": false},
//     "detector": {"preset": "perfect"}  or  {"classes": ["W","C","S"], "matrix": [[...], ...]},
//     "mission":  {"target": 1.0, "mode": "dwell", "speed_m_s": 0.2777, "collateral_threshold": 0.25,
//                  "seed": 1, "seeds": 30},
//     "output":   {"dir": "out"}
//   }
//
// Every section and key is optional; unknown keys are rejected. The recipe
// presets "phase1" and "phase2" are always defined and may be overridden.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "deweed/detect.hpp"
#include "deweed/field.hpp"
#include "deweed/sched.hpp"
#include "deweed/sim.hpp"
#include "json.hpp"

namespace deweed::scenario {

struct FieldSpec {
  std::size_t rows = 7;
  std::size_t cols = 15;
  double pitch = field::kDefaultPitch;
  double weed_fraction = 0.3;
  double crop_share = 0.5;
  std::optional<field::FieldGrid> map;  // loaded when "map" is given
};

struct Scenario {
  FieldSpec field;
  sched::ArrayLayout layout;
  sim::RobotConfig robot;
  detect::ConfusionSpec detector;
  std::string detector_name;  // preset name or "custom"
  sim::MissionConfig mission;
  std::uint64_t seed = 1;
  std::size_t seeds = 30;
  std::string output_dir = "out";
};

// Reads and parses JSON. Throws IoError when unreadable and ParseError on
// malformed JSON.
nlohmann::json read_document(const std::filesystem::path& path);

// Applies "dotted.key=value". The value is parsed as JSON when possible and
// taken as a string otherwise. Throws ValidationError on a malformed assignment.
void apply_override(nlohmann::json& document, std::string_view assignment);

// Builds and validates the whole scenario. Relative map paths resolve
// against `base_dir`. Throws ValidationError naming the offending key.
Scenario parse(const nlohmann::json& document, const std::filesystem::path& base_dir = {});

Scenario load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Field for a mission seed: the loaded map, or a generated field.
field::FieldGrid make_field(const Scenario& scenario, std::uint64_t seed);

sim::MissionResult replay_full(std::uint64_t seed, const Scenario& scenario);

// Bit-identical metrics for identical (seed, scenario).
sim::MissionMetrics replay(std::uint64_t seed, const Scenario& scenario);

// Resolved configuration plus derived quantities (required dwell, exposure
// window, effective cap, critical speed).
nlohmann::json effective_config(const Scenario& scenario);

}  // namespace deweed::scenario
