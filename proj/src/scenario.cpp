#include "deweed/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

#include "deweed/error.hpp"
#include "deweed/text.hpp"

namespace deweed::scenario {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

const json& section(const json& doc, std::string_view name, std::initializer_list<std::string_view> keys) {
  static const json empty = json::object();
  const auto it = doc.find(std::string(name));
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ValidationError(std::string(name) + ": expected an object");
  for (const auto& [key, value] : it->items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      std::string known;
      for (auto k : keys) known += (known.empty() ? "" : ", ") + std::string(k);
      throw ValidationError(join(std::string(name), key) + ": unknown key (known: " + known + ")");
    }
  }
  return *it;
}

double number(const json& obj, const std::string& path, std::string_view key, double fallback) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw ValidationError(join(path, key) + ": expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ValidationError(join(path, key) + ": must be finite");
  return v;
}

std::optional<std::uint64_t> count(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  throw ValidationError(join(path, key) + ": expected a non-negative integer");
}

bool boolean(const json& obj, const std::string& path, std::string_view key, bool fallback) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) throw ValidationError(join(path, key) + ": expected true or false");
  return it->get<bool>();
}

std::optional<std::string> string(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(join(path, key) + ": expected a string");
  return it->get<std::string>();
}

dose::DoseRecipe parse_recipe(const json& obj, const std::string& path, dose::DoseRecipe base) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  static constexpr std::string_view keys[] = {"label", "e_near_ir_w_m2", "e_uva_w_m2", "k_near_ir", "k_uva"};
  for (const auto& [key, value] : obj.items()) {
    if (std::find(std::begin(keys), std::end(keys), key) == std::end(keys)) {
      throw ValidationError(join(path, key) + ": unknown key");
    }
  }
  base.label = string(obj, path, "label").value_or(base.label);
  base.e_near_ir = number(obj, path, "e_near_ir_w_m2", base.e_near_ir);
  base.e_uva = number(obj, path, "e_uva_w_m2", base.e_uva);
  base.k_near_ir = number(obj, path, "k_near_ir", base.k_near_ir);
  base.k_uva = number(obj, path, "k_uva", base.k_uva);
  try {
    base.validate();
  } catch (const ValidationError& e) {
    // Re-anchor "recipe.<key>" onto the document path.
    std::string msg = e.what();
    if (msg.starts_with("recipe.")) msg = path + msg.substr(6);
    throw ValidationError(msg);
  }
  return base;
}

detect::ConfusionSpec parse_detector(const json& doc, std::string& name) {
  const json& det = section(doc, "detector", {"preset", "classes", "matrix"});
  const auto preset = string(det, "detector", "preset");
  const bool explicit_matrix = det.contains("matrix") || det.contains("classes");
  if (preset && explicit_matrix) throw ValidationError("detector: give either 'preset' or 'classes'/'matrix', not both");
  if (!explicit_matrix) {
    name = preset.value_or("perfect");
    return detect::preset(name);
  }
  name = "custom";
  detect::ConfusionSpec spec;
  const auto classes = det.find("classes");
  if (classes == det.end() || !classes->is_array()) throw ValidationError("detector.classes: expected an array");
  for (const auto& c : *classes) {
    const auto parsed = c.is_string() ? field::class_from_string(c.get<std::string>()) : std::nullopt;
    if (!parsed) throw ValidationError("detector.classes: entries must be W, C or S");
    spec.classes.push_back(*parsed);
  }
  const auto matrix = det.find("matrix");
  if (matrix == det.end() || !matrix->is_array()) throw ValidationError("detector.matrix: expected an array of rows");
  for (const auto& row : *matrix) {
    if (!row.is_array()) throw ValidationError("detector.matrix: rows must be arrays");
    std::vector<double> values;
    for (const auto& v : row) {
      if (!v.is_number()) throw ValidationError("detector.matrix: entries must be numbers");
      values.push_back(v.get<double>());
    }
    spec.matrix.push_back(std::move(values));
  }
  spec.validate();
  return spec;
}

}  // namespace

json read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(1, e.byte, std::string("scenario '") + path.string() + "': " + e.what());
  }
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override '" + std::string(assignment) + "' must have the form key.path=value");
  }
  const auto key = text::trim(assignment.substr(0, eq));
  const auto raw = std::string(text::trim(assignment.substr(eq + 1)));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &document;
  const auto parts = text::split(key, '.');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ValidationError("override key '" + std::string(key) + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ValidationError("override key '" + std::string(key) + "' descends into a non-object");
      *node = json::object();
    }
    node = &(*node)[std::string(parts[i])];
  }
  *node = std::move(value);
}

Scenario parse(const json& document, const std::filesystem::path& base_dir) {
  if (!document.is_object()) throw ValidationError("scenario: expected a JSON object");
  static constexpr std::string_view sections[] = {"field", "recipes", "layout", "robot", "detector", "mission", "output"};
  for (const auto& [key, value] : document.items()) {
    if (std::find(std::begin(sections), std::end(sections), key) == std::end(sections)) {
      throw ValidationError(key + ": unknown section");
    }
  }
  Scenario sc;

  const json& f = section(document, "field", {"rows", "cols", "pitch_m", "weed_fraction", "crop_share", "map"});
  sc.field.rows = count(f, "field", "rows").value_or(sc.field.rows);
  sc.field.cols = count(f, "field", "cols").value_or(sc.field.cols);
  sc.field.pitch = number(f, "field", "pitch_m", sc.field.pitch);
  sc.field.weed_fraction = number(f, "field", "weed_fraction", sc.field.weed_fraction);
  sc.field.crop_share = number(f, "field", "crop_share", sc.field.crop_share);
  if (sc.field.rows == 0 || sc.field.cols == 0) throw ValidationError("field.rows and field.cols must be >= 1");
  if (!(sc.field.pitch > 0.0)) throw ValidationError("field.pitch_m must be > 0");
  if (!(sc.field.weed_fraction >= 0.0 && sc.field.weed_fraction <= 1.0)) {
    throw ValidationError("field.weed_fraction must lie in [0, 1]");
  }
  if (!(sc.field.crop_share >= 0.0 && sc.field.crop_share <= 1.0)) {
    throw ValidationError("field.crop_share must lie in [0, 1]");
  }
  if (const auto map = string(f, "field", "map")) {
    std::filesystem::path p(*map);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::ifstream in(p);
    if (!in) throw IoError("field.map: cannot read '" + p.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      sc.field.map = field::load_field(buffer.str());
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.column(), "field.map '" + p.string() + "': " + e.what());
    }
    sc.field.rows = sc.field.map->rows();
    sc.field.cols = sc.field.map->cols();
    sc.field.pitch = sc.field.map->pitch();
  }

  std::map<std::string, dose::DoseRecipe> recipes{{"phase1", dose::phase1_recipe()},
                                                  {"phase2", dose::phase2_recipe()}};
  if (const auto it = document.find("recipes"); it != document.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("recipes: expected an object of named recipes");
    for (const auto& [name, body] : it->items()) {
      dose::DoseRecipe base;
      if (const auto existing = recipes.find(name); existing != recipes.end()) base = existing->second;
      base.label = name;
      recipes[name] = parse_recipe(body, "recipes." + name, base);
    }
  }

  const json& l = section(document, "layout",
                          {"rows", "cols", "source_pitch_m", "per_source_power_w", "power_budget_w", "max_simultaneous",
                           "honor_paper_16", "source_height_m", "camera_lead_m", "max_lanes", "recipe"});
  auto& layout = sc.layout;
  layout.rows = count(l, "layout", "rows").value_or(layout.rows);
  layout.cols = count(l, "layout", "cols").value_or(layout.cols);
  layout.source_pitch = number(l, "layout", "source_pitch_m", sc.field.pitch);
  layout.per_source_power = number(l, "layout", "per_source_power_w", layout.per_source_power);
  layout.power_budget = number(l, "layout", "power_budget_w", layout.power_budget);
  if (const auto cap = count(l, "layout", "max_simultaneous")) layout.max_simultaneous = *cap;
  layout.honor_paper_16 = boolean(l, "layout", "honor_paper_16", layout.honor_paper_16);
  layout.source_height = number(l, "layout", "source_height_m", layout.source_height);
  layout.camera_lead = number(l, "layout", "camera_lead_m", layout.camera_lead);
  layout.max_lanes = count(l, "layout", "max_lanes").value_or(layout.max_lanes);
  const std::string recipe_name = string(l, "layout", "recipe").value_or("phase1");
  const auto recipe = recipes.find(recipe_name);
  if (recipe == recipes.end()) {
    throw ValidationError("layout.recipe: '" + recipe_name + "' does not name a recipe");
  }
  layout.recipe = recipe->second;
  layout.validate();
  if (std::abs(layout.source_pitch - sc.field.pitch) > 1e-12) {
    throw ValidationError("layout.source_pitch_m must equal the field pitch");
  }

  const json& r = section(document, "robot", {"transit_speed_m_s", "wiggle_sigma", "course_correction"});
  sc.robot.transit_speed = number(r, "robot", "transit_speed_m_s", sc.robot.transit_speed);
  sc.robot.wiggle_sigma = number(r, "robot", "wiggle_sigma", sc.robot.wiggle_sigma);
  sc.robot.course_correction = boolean(r, "robot", "course_correction", sc.robot.course_correction);
  sc.robot.validate();

  sc.detector = parse_detector(document, sc.detector_name);

  const json& m = section(document, "mission",
                          {"target", "mode", "speed_m_s", "collateral_threshold", "seed", "seeds"});
  sc.mission.target = number(m, "mission", "target", sc.mission.target);
  const std::string mode = string(m, "mission", "mode").value_or("dwell");
  if (mode == "dwell") sc.mission.mode = sim::MissionMode::Dwell;
  else if (mode == "continuous") sc.mission.mode = sim::MissionMode::Continuous;
  else throw ValidationError("mission.mode: expected 'dwell' or 'continuous', got '" + mode + "'");
  sc.mission.speed = number(m, "mission", "speed_m_s", sc.mission.speed);
  sc.mission.collateral_threshold = number(m, "mission", "collateral_threshold", sc.mission.collateral_threshold);
  sc.seed = count(m, "mission", "seed").value_or(sc.seed);
  sc.seeds = count(m, "mission", "seeds").value_or(sc.seeds);
  if (sc.seeds == 0) throw ValidationError("mission.seeds must be >= 1");
  sc.mission.validate();
  // Surface an unreachable recipe at load time rather than mid-run.
  try {
    sched::required_dwell(layout, sc.mission.target);
  } catch (const UnreachableTarget& e) {
    throw ValidationError(std::string("layout.recipe: ") + e.what());
  }

  const json& o = section(document, "output", {"dir"});
  sc.output_dir = string(o, "output", "dir").value_or(sc.output_dir);
  return sc;
}

Scenario load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = read_document(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse(doc, path.parent_path());
}

field::FieldGrid make_field(const Scenario& scenario, std::uint64_t seed) {
  if (scenario.field.map) return *scenario.field.map;
  return field::build_field(scenario.field.rows, scenario.field.cols, scenario.field.pitch,
                            scenario.field.weed_fraction, sim::derive_seed(seed, 0), scenario.field.crop_share);
}

sim::MissionResult replay_full(std::uint64_t seed, const Scenario& scenario) {
  const auto grid = make_field(scenario, seed);
  return sim::execute_mission(grid, scenario.layout, scenario.robot, scenario.detector, scenario.mission, seed);
}

sim::MissionMetrics replay(std::uint64_t seed, const Scenario& scenario) { return replay_full(seed, scenario).metrics; }

json effective_config(const Scenario& sc) {
  json j;
  j["field"] = {{"rows", sc.field.rows},
                {"cols", sc.field.cols},
                {"pitch_m", sc.field.pitch},
                {"weed_fraction", sc.field.weed_fraction},
                {"crop_share", sc.field.crop_share},
                {"source", sc.field.map ? "map" : "generated"}};
  const auto& rc = sc.layout.recipe;
  j["recipe"] = {{"label", rc.label},
                 {"e_near_ir_w_m2", rc.e_near_ir},
                 {"e_uva_w_m2", rc.e_uva},
                 {"k_near_ir", rc.k_near_ir},
                 {"k_uva", rc.k_uva},
                 {"dose_rate_per_s", rc.dose_rate()}};
  const auto& l = sc.layout;
  j["layout"] = {{"rows", l.rows},
                 {"cols", l.cols},
                 {"source_pitch_m", l.source_pitch},
                 {"per_source_power_w", l.per_source_power},
                 {"power_budget_w", l.power_budget},
                 {"honor_paper_16", l.honor_paper_16},
                 {"source_height_m", l.source_height},
                 {"camera_lead_m", l.camera_lead},
                 {"max_lanes", l.max_lanes}};
  j["robot"] = {{"transit_speed_m_s", sc.robot.transit_speed},
                {"wiggle_sigma", sc.robot.wiggle_sigma},
                {"course_correction", sc.robot.course_correction}};
  j["detector"] = {{"name", sc.detector_name}};
  json rows = json::array();
  for (const auto& row : sc.detector.matrix) rows.push_back(row);
  json classes = json::array();
  for (auto c : sc.detector.classes) classes.push_back(std::string(1, field::class_code(c)));
  j["detector"]["classes"] = classes;
  j["detector"]["matrix"] = rows;
  j["mission"] = {{"target", sc.mission.target},
                  {"mode", std::string(sim::mode_name(sc.mission.mode))},
                  {"speed_m_s", sc.mission.speed},
                  {"collateral_threshold", sc.mission.collateral_threshold},
                  {"seed", sc.seed},
                  {"seeds", sc.seeds}};
  j["output"] = {{"dir", sc.output_dir}};
  const double dwell = sched::required_dwell(l, sc.mission.target);
  const double window = sched::exposure_window(l, sc.mission.speed);
  j["derived"] = {{"required_dwell_s", dwell},
                  {"exposure_window_s", window},
                  {"effective_cap", l.effective_cap()},
                  {"power_at_cap_w", static_cast<double>(l.effective_cap()) * l.per_source_power},
                  {"critical_speed_m_s", sched::critical_speed(l, sc.mission.target)},
                  {"continuous_window_covers_dwell", window >= dwell}};
  return j;
}

}  // namespace deweed::scenario
