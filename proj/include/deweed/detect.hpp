#pragma once

// Confusion-matrix stand-in for the weed classifier, plus the binary
// accuracy metrics used to score it.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deweed/field.hpp"

namespace deweed::detect {

using field::CellClass;

// Row-stochastic matrix: matrix[i][j] = P(report classes[j] | truth classes[i]).
struct ConfusionSpec {
  std::vector<CellClass> classes;
  std::vector<std::vector<double>> matrix;

  // Throws ValidationError unless square, entries in [0, 1], rows summing to
  // 1 within 1e-12 and classes distinct.
  void validate() const;
  // Position of `c` in `classes`, or classes.size() when absent.
  std::size_t class_position(CellClass c) const noexcept;
};

// Diagonal `accuracy`, the remaining mass split evenly over the other classes.
ConfusionSpec uniform_error_spec(double accuracy);

// "perfect", "paper-98" or "paper-95". Throws ValidationError otherwise.
ConfusionSpec preset(std::string_view name);
std::vector<std::string> preset_names();

// Weed is the positive class; Crop and Soil are negative.
struct ClassificationTally {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  void record(CellClass truth, CellClass reported) noexcept;
  friend bool operator==(const ClassificationTally&, const ClassificationTally&) = default;
};

struct DetectionReport {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CellClass> reported;  // row-major, one per cell
  ClassificationTally tally;
  // confusion[truth][reported], indexed by CellClass value.
  std::uint64_t confusion[3][3] = {};
  std::uint64_t seed = 0;

  CellClass at(field::CellIndex idx) const { return reported.at(idx.row * cols + idx.col); }
  bool reports_weed(std::size_t flat) const { return reported.at(flat) == CellClass::Weed; }
};

// Samples the reported class from the row of `truth`. Throws
// ValidationError if `truth` is not one of the spec's classes.
CellClass classify_cell(CellClass truth, const ConfusionSpec& spec, std::mt19937_64& rng);

// (TP + TN) / (TP + TN + FP + FN). Throws UndefinedMetric on an empty tally.
double accuracy(const ClassificationTally& t);

// Arithmetic mean over repeated runs. Throws UndefinedMetric when empty.
double mean_accuracy(std::span<const double> runs);

// Classifies every cell independently with a generator seeded from `seed`.
DetectionReport survey_field(const field::FieldGrid& grid, const ConfusionSpec& spec, std::uint64_t seed);

// Perfect-knowledge report, convenient for constructing planner inputs.
DetectionReport truth_report(const field::FieldGrid& grid);

// "row,col,truth,reported" with a header line.
std::string report_csv(const field::FieldGrid& grid, const DetectionReport& report);

}  // namespace deweed::detect
