#include "deweed/field.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include "deweed/error.hpp"
#include "deweed/kernels.hpp"

namespace deweed::field {

char class_code(CellClass c) noexcept {
  switch (c) {
    case CellClass::Weed: return 'W';
    case CellClass::Crop: return 'C';
    case CellClass::Soil: return 'S';
  }
  return '?';
}

std::optional<CellClass> class_from_code(char code) noexcept {
  switch (code) {
    case 'W': return CellClass::Weed;
    case 'C': return CellClass::Crop;
    case 'S': return CellClass::Soil;
    default: return std::nullopt;
  }
}

std::string_view class_name(CellClass c) noexcept {
  switch (c) {
    case CellClass::Weed: return "weed";
    case CellClass::Crop: return "crop";
    case CellClass::Soil: return "soil";
  }
  return "unknown";
}

std::optional<CellClass> class_from_string(std::string_view text) noexcept {
  if (text.size() == 1) return class_from_code(text[0]);
  for (CellClass c : kAllClasses) {
    if (text == class_name(c)) return c;
  }
  return std::nullopt;
}

double normalize_heading(double radians) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double h = std::fmod(radians + std::numbers::pi, two_pi);
  if (h < 0.0) h += two_pi;
  h -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for tiny negative inputs.
  if (h >= std::numbers::pi) h -= two_pi;
  return h;
}

WorldPose make_pose(double x, double y, double heading) noexcept { return {x, y, normalize_heading(heading)}; }

FieldGrid::FieldGrid(std::size_t rows, std::size_t cols, double pitch) : rows_(rows), cols_(cols), pitch_(pitch) {
  if (rows == 0 || cols == 0) throw ValidationError("field dimensions must be >= 1 (got " + std::to_string(rows) + " x " + std::to_string(cols) + ")");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ValidationError("field pitch must be > 0");
  const std::size_t n = rows * cols;
  truth_.assign(n, CellClass::Soil);
  dose_near_ir_.assign(n, 0.0);
  dose_uva_.assign(n, 0.0);
  time_near_ir_.assign(n, 0.0);
  time_uva_.assign(n, 0.0);
  treated_.assign(n, 0);
}

std::size_t FieldGrid::count(CellClass c) const noexcept {
  std::size_t n = 0;
  for (CellClass t : truth_) n += t == c ? 1 : 0;
  return n;
}

dose::ExposureLedger FieldGrid::ledger(std::size_t i) const {
  return {time_near_ir_.at(i), time_uva_.at(i), dose_near_ir_.at(i), dose_uva_.at(i)};
}

Cell FieldGrid::cell(CellIndex idx) const {
  if (!contains(idx)) throw ValidationError("cell index outside the field");
  const std::size_t i = flat(idx);
  return {idx, truth_[i], ledger(i), treated_[i] != 0};
}

void FieldGrid::expose(std::span<const double> weight, const dose::DoseRecipe& recipe, double dt) {
  if (weight.size() != size()) throw ValidationError("exposure weights do not match the field size");
  if (!(dt >= 0.0)) throw ValidationError("exposure duration must be >= 0");
  kernels::accumulate_dose(dose_near_ir_, time_near_ir_, weight, recipe.e_near_ir, dt);
  kernels::accumulate_dose(dose_uva_, time_uva_, weight, recipe.e_uva, dt);
}

std::vector<double> FieldGrid::lethality_map(const dose::DoseRecipe& recipe) const {
  std::vector<double> out(size());
  kernels::lethality(out, dose_near_ir_, dose_uva_, recipe.k_near_ir, recipe.k_uva);
  return out;
}

std::size_t FieldGrid::mark_treated(const dose::DoseRecipe& recipe, double target) {
  const auto lethal = lethality_map(recipe);
  const double threshold = target - dose::kLethalityTolerance;
  std::size_t n = 0;
  for (std::size_t i = 0; i < lethal.size(); ++i) {
    treated_[i] = lethal[i] >= threshold ? 1 : 0;
    n += treated_[i];
  }
  return n;
}

void FieldGrid::reset_ledgers() {
  std::fill(dose_near_ir_.begin(), dose_near_ir_.end(), 0.0);
  std::fill(dose_uva_.begin(), dose_uva_.end(), 0.0);
  std::fill(time_near_ir_.begin(), time_near_ir_.end(), 0.0);
  std::fill(time_uva_.begin(), time_uva_.end(), 0.0);
  std::fill(treated_.begin(), treated_.end(), std::uint8_t{0});
}

bool FieldGrid::same_layout(const FieldGrid& other) const noexcept {
  return rows_ == other.rows_ && cols_ == other.cols_ && pitch_ == other.pitch_ && truth_ == other.truth_;
}

FieldGrid build_field(std::size_t rows, std::size_t cols, double pitch, double weed_fraction, std::uint64_t seed,
                      double crop_share) {
  if (!(weed_fraction >= 0.0 && weed_fraction <= 1.0)) throw ValidationError("weed_fraction must lie in [0, 1]");
  if (!(crop_share >= 0.0 && crop_share <= 1.0)) throw ValidationError("crop_share must lie in [0, 1]");
  FieldGrid grid(rows, cols, pitch);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      CellClass cls;
      if (unit(rng) < weed_fraction) {
        cls = CellClass::Weed;
      } else {
        cls = unit(rng) < crop_share ? CellClass::Crop : CellClass::Soil;
      }
      grid.set_truth({r, c}, cls);
    }
  }
  return grid;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

template <typename T>
T parse_number(const Token& tok, std::size_t line, const char* what) {
  T value{};
  const char* end = tok.text.data() + tok.text.size();
  auto [ptr, ec] = std::from_chars(tok.text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, tok.column, std::string("expected ") + what + ", found '" + std::string(tok.text) + "'");
  }
  return value;
}

}  // namespace

FieldGrid load_field(std::string_view document) {
  std::optional<FieldGrid> grid;
  std::size_t line_no = 0;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t nl = document.find('\n', pos);
    if (nl == std::string_view::npos) nl = document.size();
    std::string_view line = document.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (!grid) {
      if (tokens.size() != 3) {
        throw ParseError(line_no, tokens.front().column, "header must be 'rows cols pitch_m'");
      }
      const auto rows = parse_number<std::size_t>(tokens[0], line_no, "row count");
      const auto cols = parse_number<std::size_t>(tokens[1], line_no, "column count");
      const auto pitch = parse_number<double>(tokens[2], line_no, "pitch in meters");
      grid.emplace(rows, cols, pitch);
      continue;
    }

    if (row >= grid->rows()) {
      throw ValidationError("line " + std::to_string(line_no) + ": more than the declared " +
                            std::to_string(grid->rows()) + " rows");
    }
    if (tokens.size() != grid->cols()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(grid->cols()) +
                            " cells, found " + std::to_string(tokens.size()));
    }
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const auto cls = tokens[c].text.size() == 1 ? class_from_code(tokens[c].text[0]) : std::nullopt;
      if (!cls) {
        throw ParseError(line_no, tokens[c].column, "unknown cell code '" + std::string(tokens[c].text) + "'");
      }
      grid->set_truth({row, c}, *cls);
    }
    ++row;
  }
  if (!grid) throw ParseError(line_no == 0 ? 1 : line_no, 1, "empty field map");
  if (row != grid->rows()) {
    throw ValidationError("field map declares " + std::to_string(grid->rows()) + " rows but contains " +
                          std::to_string(row));
  }
  return std::move(*grid);
}

std::string save_field(const FieldGrid& grid) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, grid.pitch());
  std::string out = std::to_string(grid.rows()) + " " + std::to_string(grid.cols()) + " " +
                    std::string(buf, res.ptr) + "\n";
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c != 0) out += ' ';
      out += class_code(grid.truth(CellIndex{r, c}));
    }
    out += '\n';
  }
  return out;
}

std::optional<CellIndex> cell_at(const FieldGrid& grid, const WorldPose& pose) noexcept {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y)) return std::nullopt;
  if (pose.x < 0.0 || pose.y < 0.0) return std::nullopt;
  const double col = std::floor(pose.x / grid.pitch());
  const double row = std::floor(pose.y / grid.pitch());
  if (col >= static_cast<double>(grid.cols()) || row >= static_cast<double>(grid.rows())) return std::nullopt;
  return CellIndex{static_cast<std::size_t>(row), static_cast<std::size_t>(col)};
}

}  // namespace deweed::field
