#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deweed/dose.hpp"

namespace deweed::field {

// Reflector pitch: 4 x 4 inch (102 mm) reflectors, one treatment cell each.
inline constexpr double kDefaultPitch = 0.102;

enum class CellClass : std::uint8_t { Weed, Crop, Soil };

inline constexpr CellClass kAllClasses[] = {CellClass::Weed, CellClass::Crop, CellClass::Soil};

char class_code(CellClass c) noexcept;
std::optional<CellClass> class_from_code(char code) noexcept;
std::string_view class_name(CellClass c) noexcept;
// Accepts the one-letter code or the lower-case name.
std::optional<CellClass> class_from_string(std::string_view text) noexcept;

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Continuous world coordinates. x runs along the direction of travel
// (grid columns), y across it (grid rows).
struct WorldPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, [-pi, pi)
};

double normalize_heading(double radians) noexcept;
WorldPose make_pose(double x, double y, double heading = 0.0) noexcept;

struct Cell {
  CellIndex index;
  CellClass truth = CellClass::Soil;
  dose::ExposureLedger ledger;
  bool treated = false;
};

// Dense row-major grid of treatment cells. Ledgers are stored as separate
// arrays per field so the dose kernels can stream over them.
class FieldGrid {
 public:
  FieldGrid(std::size_t rows, std::size_t cols, double pitch = kDefaultPitch);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double pitch() const noexcept { return pitch_; }
  std::size_t size() const noexcept { return truth_.size(); }

  bool contains(CellIndex idx) const noexcept { return idx.row < rows_ && idx.col < cols_; }
  std::size_t flat(CellIndex idx) const noexcept { return idx.row * cols_ + idx.col; }
  CellIndex unflat(std::size_t i) const noexcept { return {i / cols_, i % cols_}; }

  CellClass truth(CellIndex idx) const { return truth_.at(flat(idx)); }
  CellClass truth(std::size_t i) const { return truth_.at(i); }
  void set_truth(CellIndex idx, CellClass c) { truth_.at(flat(idx)) = c; }
  std::span<const CellClass> truths() const noexcept { return truth_; }
  std::size_t count(CellClass c) const noexcept;

  Cell cell(CellIndex idx) const;
  dose::ExposureLedger ledger(std::size_t i) const;
  bool treated(std::size_t i) const { return treated_.at(i) != 0; }

  std::span<const double> dose_near_ir() const noexcept { return dose_near_ir_; }
  std::span<const double> dose_uva() const noexcept { return dose_uva_; }
  std::span<const double> time_near_ir() const noexcept { return time_near_ir_; }
  std::span<const double> time_uva() const noexcept { return time_uva_; }

  // Adds dt seconds of `recipe` exposure to every cell, scaled by weight[i]
  // (the number of sources over that cell; 0 for unexposed cells).
  void expose(std::span<const double> weight, const dose::DoseRecipe& recipe, double dt);

  std::vector<double> lethality_map(const dose::DoseRecipe& recipe) const;

  // Recomputes every treated flag as lethality >= target (less the
  // comparison slack). Returns the number of treated cells.
  std::size_t mark_treated(const dose::DoseRecipe& recipe, double target);

  void reset_ledgers();

  // Equality of dimensions, pitch and ground truth; ledgers are ignored.
  bool same_layout(const FieldGrid& other) const noexcept;

 private:
  std::size_t rows_;
  std::size_t cols_;
  double pitch_;
  std::vector<CellClass> truth_;
  std::vector<double> dose_near_ir_;
  std::vector<double> dose_uva_;
  std::vector<double> time_near_ir_;
  std::vector<double> time_uva_;
  std::vector<std::uint8_t> treated_;
};

// Random field: each cell is Weed with probability weed_fraction, otherwise
// Crop with probability crop_share and Soil with the remainder.
FieldGrid build_field(std::size_t rows, std::size_t cols, double pitch, double weed_fraction, std::uint64_t seed,
                      double crop_share = 0.5);

// Field-map text: "rows cols pitch_m" then one line of W|C|S codes per row.
// '#' starts a comment. Throws ParseError or ValidationError.
FieldGrid load_field(std::string_view document);
std::string save_field(const FieldGrid& grid);

// Cell whose half-open footprint [c*p, (c+1)*p) x [r*p, (r+1)*p) contains
// the pose position.
std::optional<CellIndex> cell_at(const FieldGrid& grid, const WorldPose& pose) noexcept;

}  // namespace deweed::field
