#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deweed/scenario.hpp"

namespace deweed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

// Overrides the scenario's output.dir when set.
inline constexpr const char* kOutputDirEnv = "DEWEED_OUTPUT_DIR";

struct RunOptions {
  std::filesystem::path scenario;
  bool plot = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

struct SweepOptions {
  std::filesystem::path scenario;
  std::string axis;
  std::string values;  // comma-separated
  std::vector<std::string> overrides;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline constexpr std::size_t kMinSweepSeeds = 30;

// Sweepable axis names and the scenario key each one sets.
std::vector<std::pair<std::string, std::string>> sweep_axes();

std::filesystem::path output_dir(const scenario::Scenario& sc);

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& scenario, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err);

// Parses argv and dispatches to a subcommand.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace deweed::cli
