#include "deweed/report.hpp"

#include <algorithm>
#include <cmath>

#include "deweed/detect.hpp"
#include "deweed/error.hpp"
#include "deweed/text.hpp"

namespace deweed::report {

using text::format_double;

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

namespace {

constexpr std::string_view kMetricsColumns[] = {
    "seed",           "mode",          "feasible",     "weed_kill_fraction", "true_weeds",  "killed_weeds",
    "missed_weeds",   "underdosed_weeds", "crop_collateral", "total_time_s", "total_energy_j", "tp",
    "tn",             "fp",            "fn",           "mismatch_events",    "verdict"};

std::uint64_t need_unsigned(const std::string& v, std::size_t line, std::size_t col) {
  const auto parsed = text::parse_unsigned(v);
  if (!parsed) throw ParseError(line, col, "expected a count, found '" + v + "'");
  return *parsed;
}

double need_double(const std::string& v, std::size_t line, std::size_t col) {
  const auto parsed = text::parse_double(v);
  if (!parsed) throw ParseError(line, col, "expected a number, found '" + v + "'");
  return *parsed;
}

}  // namespace

std::string metrics_csv_header() {
  std::string out;
  for (auto c : kMetricsColumns) out += (out.empty() ? "" : ",") + std::string(c);
  return out;
}

std::string metrics_csv_row(const sim::MissionMetrics& m, sim::MissionMode mode) {
  const auto& t = m.detection_tally;
  std::string out = std::to_string(m.seed);
  out += ',' + std::string(sim::mode_name(mode));
  out += ',' + std::string(m.feasible ? "true" : "false");
  out += ',' + format_double(m.weed_kill_fraction);
  out += ',' + std::to_string(m.true_weeds);
  out += ',' + std::to_string(m.killed_weeds);
  out += ',' + std::to_string(m.missed_weeds);
  out += ',' + std::to_string(m.underdosed_weeds);
  out += ',' + std::to_string(m.crop_collateral);
  out += ',' + format_double(m.total_time);
  out += ',' + format_double(m.total_energy);
  out += ',' + std::to_string(t.tp) + ',' + std::to_string(t.tn) + ',' + std::to_string(t.fp) + ',' +
         std::to_string(t.fn);
  out += ',' + std::to_string(m.mismatch_events);
  out += ',' + csv_field(m.verdict);
  return out;
}

std::string metrics_csv(std::span<const sim::MissionMetrics> missions, sim::MissionMode mode) {
  std::string out = metrics_csv_header() + "\n";
  for (const auto& m : missions) out += metrics_csv_row(m, mode) + "\n";
  return out;
}

std::vector<sim::MissionMetrics> parse_metrics_csv(std::string_view csv) {
  std::vector<sim::MissionMetrics> out;
  std::size_t line_no = 0;
  bool header = false;
  for (std::string_view line : text::split(csv, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    if (!header) {
      if (text::trim(line) != metrics_csv_header()) throw ParseError(line_no, 1, "unexpected metrics CSV header");
      header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != std::size(kMetricsColumns)) throw ParseError(line_no, 1, "expected 17 columns");
    sim::MissionMetrics m;
    m.seed = need_unsigned(f[0], line_no, 1);
    if (f[2] != "true" && f[2] != "false") throw ParseError(line_no, 3, "feasible must be true or false");
    m.feasible = f[2] == "true";
    m.weed_kill_fraction = need_double(f[3], line_no, 4);
    m.true_weeds = need_unsigned(f[4], line_no, 5);
    m.killed_weeds = need_unsigned(f[5], line_no, 6);
    m.missed_weeds = need_unsigned(f[6], line_no, 7);
    m.underdosed_weeds = need_unsigned(f[7], line_no, 8);
    m.crop_collateral = need_unsigned(f[8], line_no, 9);
    m.total_time = need_double(f[9], line_no, 10);
    m.total_energy = need_double(f[10], line_no, 11);
    m.detection_tally.tp = need_unsigned(f[11], line_no, 12);
    m.detection_tally.tn = need_unsigned(f[12], line_no, 13);
    m.detection_tally.fp = need_unsigned(f[13], line_no, 14);
    m.detection_tally.fn = need_unsigned(f[14], line_no, 15);
    m.mismatch_events = need_unsigned(f[15], line_no, 16);
    m.verdict = f[16];
    out.push_back(std::move(m));
  }
  if (!header) throw ParseError(1, 1, "empty metrics CSV");
  return out;
}

nlohmann::json metrics_json(const sim::MissionMetrics& m, sim::MissionMode mode) {
  const auto& t = m.detection_tally;
  nlohmann::json j = {
      {"seed", m.seed},
      {"mode", std::string(sim::mode_name(mode))},
      {"feasible", m.feasible},
      {"verdict", m.verdict},
      {"weed_kill_fraction", m.weed_kill_fraction},
      {"true_weeds", m.true_weeds},
      {"killed_weeds", m.killed_weeds},
      {"missed_weeds", m.missed_weeds},
      {"underdosed_weeds", m.underdosed_weeds},
      {"crop_collateral", m.crop_collateral},
      {"total_time_s", m.total_time},
      {"total_energy_j", m.total_energy},
      {"mismatch_events", m.mismatch_events},
      {"detection", {{"tp", t.tp}, {"tn", t.tn}, {"fp", t.fp}, {"fn", t.fn}}},
  };
  if (t.total() > 0) j["detection"]["accuracy"] = detect::accuracy(t);
  return j;
}

std::string heatmap_ppm(const field::FieldGrid& grid, std::span<const double> lethality, std::size_t scale) {
  if (lethality.size() != grid.size()) throw ValidationError("heat map needs one lethality value per cell");
  scale = std::max<std::size_t>(scale, 3);
  const std::size_t width = grid.cols() * scale;
  const std::size_t height = grid.rows() * scale;
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + width * height * 3);
  auto ramp = [](double v, unsigned char rgb[3]) {
    // black -> red -> yellow -> white
    v = std::clamp(v, 0.0, 1.0) * 3.0;
    const double r = std::min(v, 1.0);
    const double g = std::clamp(v - 1.0, 0.0, 1.0);
    const double b = std::clamp(v - 2.0, 0.0, 1.0);
    rgb[0] = static_cast<unsigned char>(std::lround(r * 255.0));
    rgb[1] = static_cast<unsigned char>(std::lround(g * 255.0));
    rgb[2] = static_cast<unsigned char>(std::lround(b * 255.0));
  };
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const field::CellIndex idx{y / scale, x / scale};
      const std::size_t i = grid.flat(idx);
      unsigned char rgb[3] = {0, 0, 0};
      const bool border = (x % scale == 0) || (y % scale == 0);
      if (border) {
        switch (grid.truth(i)) {
          case field::CellClass::Weed: rgb[0] = 200, rgb[1] = 40, rgb[2] = 200; break;
          case field::CellClass::Crop: rgb[0] = 40, rgb[1] = 180, rgb[2] = 40; break;
          case field::CellClass::Soil: rgb[0] = 90, rgb[1] = 70, rgb[2] = 50; break;
        }
      } else {
        ramp(lethality[i], rgb);
      }
      const std::size_t at = header + (y * width + x) * 3;
      out[at] = static_cast<char>(rgb[0]);
      out[at + 1] = static_cast<char>(rgb[1]);
      out[at + 2] = static_cast<char>(rgb[2]);
    }
  }
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

SweepRow summarize(std::string value, std::span<const sim::MissionMetrics> missions) {
  SweepRow row;
  row.value = std::move(value);
  row.seeds = missions.size();
  std::vector<double> kill, missed, under, collateral, time, energy, mismatch, acc;
  std::size_t feasible = 0;
  for (const auto& m : missions) {
    feasible += m.feasible ? 1 : 0;
    kill.push_back(m.weed_kill_fraction);
    missed.push_back(static_cast<double>(m.missed_weeds));
    under.push_back(static_cast<double>(m.underdosed_weeds));
    collateral.push_back(static_cast<double>(m.crop_collateral));
    time.push_back(m.total_time);
    energy.push_back(m.total_energy);
    mismatch.push_back(static_cast<double>(m.mismatch_events));
    if (m.detection_tally.total() > 0) acc.push_back(detect::accuracy(m.detection_tally));
  }
  row.feasible_fraction = missions.empty() ? 0.0 : static_cast<double>(feasible) / static_cast<double>(missions.size());
  row.kill_fraction = aggregate(kill);
  row.missed_weeds = aggregate(missed);
  row.underdosed_weeds = aggregate(under);
  row.crop_collateral = aggregate(collateral);
  row.total_time = aggregate(time);
  row.total_energy = aggregate(energy);
  row.mismatch_events = aggregate(mismatch);
  row.accuracy = aggregate(acc);
  return row;
}

namespace {

constexpr std::string_view kSweepMetrics[] = {"weed_kill_fraction", "missed_weeds",  "underdosed_weeds",
                                              "crop_collateral",    "total_time_s",  "total_energy_j",
                                              "mismatch_events",    "accuracy"};

Aggregate SweepRow::*const kSweepFields[] = {&SweepRow::kill_fraction,   &SweepRow::missed_weeds,
                                             &SweepRow::underdosed_weeds, &SweepRow::crop_collateral,
                                             &SweepRow::total_time,       &SweepRow::total_energy,
                                             &SweepRow::mismatch_events,  &SweepRow::accuracy};

std::string sweep_header() {
  std::string h = "axis,value,seeds,feasible_fraction";
  for (auto name : kSweepMetrics) h += ",mean_" + std::string(name) + ",std_" + std::string(name);
  return h;
}

}  // namespace

std::string sweep_csv(std::string_view axis, std::span<const SweepRow> rows) {
  std::string out = sweep_header() + "\n";
  for (const auto& r : rows) {
    out += csv_field(axis) + ',' + csv_field(r.value) + ',' + std::to_string(r.seeds) + ',' +
           format_double(r.feasible_fraction);
    for (auto field : kSweepFields) {
      out += ',' + format_double((r.*field).mean) + ',' + format_double((r.*field).stddev);
    }
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view csv, std::string* axis) {
  std::vector<SweepRow> rows;
  std::size_t line_no = 0;
  bool header = false;
  const std::size_t columns = 4 + 2 * std::size(kSweepMetrics);
  for (std::string_view line : text::split(csv, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    if (!header) {
      if (text::trim(line) != sweep_header()) throw ParseError(line_no, 1, "unexpected sweep CSV header");
      header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != columns) throw ParseError(line_no, 1, "expected " + std::to_string(columns) + " columns");
    if (axis) *axis = f[0];
    SweepRow r;
    r.value = f[1];
    r.seeds = need_unsigned(f[2], line_no, 3);
    r.feasible_fraction = need_double(f[3], line_no, 4);
    for (std::size_t k = 0; k < std::size(kSweepFields); ++k) {
      (r.*kSweepFields[k]).mean = need_double(f[4 + 2 * k], line_no, 5 + 2 * k);
      (r.*kSweepFields[k]).stddev = need_double(f[5 + 2 * k], line_no, 6 + 2 * k);
    }
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(1, 1, "empty sweep CSV");
  return rows;
}

}  // namespace deweed::report
