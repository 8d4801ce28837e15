#include "deweed/detect.hpp"

#include <cmath>
#include <numeric>

#include "deweed/error.hpp"

namespace deweed::detect {

void ConfusionSpec::validate() const {
  const std::size_t n = classes.size();
  if (n == 0) throw ValidationError("detector.classes must not be empty");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (classes[i] == classes[j]) throw ValidationError("detector.classes lists a class twice");
    }
  }
  if (matrix.size() != n) throw ValidationError("detector.matrix must have one row per class");
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i].size() != n) throw ValidationError("detector.matrix must be square");
    double sum = 0.0;
    for (double p : matrix[i]) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("detector.matrix entries must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ValidationError("detector.matrix row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                            ", expected 1");
    }
  }
}

std::size_t ConfusionSpec::class_position(CellClass c) const noexcept {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == c) return i;
  }
  return classes.size();
}

ConfusionSpec uniform_error_spec(double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ValidationError("detector accuracy must lie in [0, 1]");
  ConfusionSpec spec;
  spec.classes.assign(std::begin(field::kAllClasses), std::end(field::kAllClasses));
  const std::size_t n = spec.classes.size();
  const double off = (1.0 - accuracy) / static_cast<double>(n - 1);
  spec.matrix.assign(n, std::vector<double>(n, off));
  for (std::size_t i = 0; i < n; ++i) spec.matrix[i][i] = accuracy;
  return spec;
}

ConfusionSpec preset(std::string_view name) {
  if (name == "perfect") return uniform_error_spec(1.0);
  if (name == "paper-98") return uniform_error_spec(0.98);
  if (name == "paper-95") return uniform_error_spec(0.95);
  std::string known;
  for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
  throw ValidationError("detector.preset: unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<std::string> preset_names() { return {"perfect", "paper-98", "paper-95"}; }

void ClassificationTally::record(CellClass truth, CellClass reported) noexcept {
  const bool actual = truth == CellClass::Weed;
  const bool predicted = reported == CellClass::Weed;
  if (actual && predicted) ++tp;
  else if (!actual && !predicted) ++tn;
  else if (predicted) ++fp;
  else ++fn;
}

CellClass classify_cell(CellClass truth, const ConfusionSpec& spec, std::mt19937_64& rng) {
  const std::size_t row = spec.class_position(truth);
  if (row == spec.classes.size()) {
    throw ValidationError("truth class '" + std::string(field::class_name(truth)) + "' is absent from the detector spec");
  }
  const auto& probs = spec.matrix[row];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  std::size_t last_positive = row;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    cumulative += probs[j];
    last_positive = j;
    if (u < cumulative) return spec.classes[j];
  }
  // Rounding left u above the accumulated mass.
  return spec.classes[last_positive];
}

double accuracy(const ClassificationTally& t) {
  if (t.total() == 0) throw UndefinedMetric("accuracy is undefined for an empty tally");
  return static_cast<double>(t.tp + t.tn) / static_cast<double>(t.total());
}

double mean_accuracy(std::span<const double> runs) {
  if (runs.empty()) throw UndefinedMetric("mean accuracy is undefined for zero runs");
  return std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
}

DetectionReport survey_field(const field::FieldGrid& grid, const ConfusionSpec& spec, std::uint64_t seed) {
  spec.validate();
  DetectionReport report;
  report.rows = grid.rows();
  report.cols = grid.cols();
  report.seed = seed;
  report.reported.reserve(grid.size());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CellClass truth = grid.truth(i);
    const CellClass seen = classify_cell(truth, spec, rng);
    report.reported.push_back(seen);
    report.tally.record(truth, seen);
    ++report.confusion[static_cast<int>(truth)][static_cast<int>(seen)];
  }
  return report;
}

DetectionReport truth_report(const field::FieldGrid& grid) {
  DetectionReport report;
  report.rows = grid.rows();
  report.cols = grid.cols();
  report.reported.assign(grid.truths().begin(), grid.truths().end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    report.tally.record(grid.truth(i), grid.truth(i));
    ++report.confusion[static_cast<int>(grid.truth(i))][static_cast<int>(grid.truth(i))];
  }
  return report;
}

std::string report_csv(const field::FieldGrid& grid, const DetectionReport& report) {
  std::string out = "row,col,truth,reported\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflat(i);
    out += std::to_string(idx.row) + "," + std::to_string(idx.col) + "," +
           std::string(field::class_name(grid.truth(i))) + "," + std::string(field::class_name(report.reported.at(i))) +
           "\n";
  }
  return out;
}

}  // namespace deweed::detect
