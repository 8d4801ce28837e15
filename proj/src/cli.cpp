#include "deweed/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "deweed/error.hpp"
#include "deweed/kernels.hpp"
#include "deweed/report.hpp"
#include "deweed/text.hpp"

namespace deweed::cli {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnreachableTarget& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> sweep_axes() {
  return {{"speed", "mission.speed_m_s"},
          {"wiggle_sigma", "robot.wiggle_sigma"},
          {"detector", "detector"},
          {"target", "mission.target"},
          {"cap", "layout.max_simultaneous"}};
}

fs::path output_dir(const scenario::Scenario& sc) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(sc.output_dir);
}

int cmd_validate(const fs::path& path, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = scenario::load(path, overrides);
    out << scenario::effective_config(sc).dump(2) << "\n";
    return kExitOk;
  });
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = scenario::load(options.scenario, options.overrides);
    const std::uint64_t seed = options.seed.value_or(sc.seed);
    const auto result = scenario::replay_full(seed, sc);
    const auto dir = output_dir(sc);
    const auto mode = sc.mission.mode;

    const std::vector<sim::MissionMetrics> missions{result.metrics};
    write_file(dir / "metrics.csv", report::metrics_csv(missions, mode));
    write_file(dir / "summary.json", report::metrics_json(result.metrics, mode).dump(2) + "\n");
    write_file(dir / "plan.csv", sched::plan_csv(result.planned, sc.layout));
    write_file(dir / "activation_log.csv", sched::plan_csv(result.executed, sc.layout));
    write_file(dir / "detection.csv", detect::report_csv(result.treated, result.report));
    if (options.plot) {
      const auto lethal = result.treated.lethality_map(sc.layout.recipe);
      write_file(dir / "heatmap.ppm", report::heatmap_ppm(result.treated, lethal));
    }

    const auto& m = result.metrics;
    out << "mode=" << sim::mode_name(mode) << " seed=" << seed << " feasible=" << (m.feasible ? "true" : "false")
        << " kill_fraction=" << text::format_double(m.weed_kill_fraction) << " weeds=" << m.true_weeds
        << " missed=" << m.missed_weeds << " collateral=" << m.crop_collateral
        << " time_s=" << text::format_double(m.total_time) << " energy_j=" << text::format_double(m.total_energy)
        << "\n";
    if (!m.feasible) out << "verdict: infeasible: " << m.verdict << "\n";
    out << "wrote " << dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto axes = sweep_axes();
    const auto axis = std::find_if(axes.begin(), axes.end(), [&](const auto& a) { return a.first == options.axis; });
    if (axis == axes.end()) {
      std::string known;
      for (const auto& a : axes) known += (known.empty() ? "" : ", ") + a.first;
      throw ValidationError("unknown sweep axis '" + options.axis + "' (sweepable: " + known + ")");
    }
    std::vector<std::string> values;
    for (auto v : text::split(options.values, ',')) {
      v = text::trim(v);
      if (!v.empty()) values.emplace_back(v);
    }
    if (values.empty()) throw ValidationError("--values must list at least one value");

    auto document = scenario::read_document(options.scenario);
    for (const auto& o : options.overrides) scenario::apply_override(document, o);

    // Validate every point before running any mission.
    std::vector<scenario::Scenario> points;
    for (const auto& v : values) {
      auto doc = document;
      if (axis->first == "detector") {
        doc["detector"] = nlohmann::json{{"preset", v}};
      } else {
        scenario::apply_override(doc, axis->second + "=" + v);
      }
      points.push_back(scenario::parse(doc, options.scenario.parent_path()));
    }

    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<report::SweepRow> rows;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto& sc = points[p];
      const std::size_t n = std::max(sc.seeds, kMinSweepSeeds);
      std::vector<sim::MissionMetrics> missions(n);
      std::vector<std::exception_ptr> failures(n);
      {
        std::vector<std::jthread> pool;
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            for (std::size_t k = w; k < n; k += workers) {
              try {
                missions[k] = scenario::replay(sc.seed + k, sc);
              } catch (...) {
                failures[k] = std::current_exception();
              }
            }
          });
        }
      }
      for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
      }
      rows.push_back(report::summarize(values[p], missions));
      out << options.axis << "=" << values[p] << " seeds=" << n
          << " mean_kill_fraction=" << text::format_double(rows.back().kill_fraction.mean)
          << " feasible_fraction=" << text::format_double(rows.back().feasible_fraction) << "\n";
    }
    const auto dir = output_dir(points.front());
    write_file(dir / "sweep.csv", report::sweep_csv(options.axis, rows));
    out << "wrote " << (dir / "sweep.csv").string() << "\n";
    return kExitOk;
  });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directed-energy weeding simulator and activation scheduler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "deweed 0.1.0 (kernels: " + std::string(kernels::isa_name(kernels::active_isa())) + ")");

  RunOptions run;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a mission and write metrics, plan and activation log");
  run_cmd->add_option("scenario", run.scenario, "Scenario JSON file")->required();
  run_cmd->add_flag("--plot", run.plot, "Also write a per-cell lethality heat map (PPM)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Mission seed (overrides mission.seed)");
  run_cmd->add_option("--set", run.overrides, "Override a scenario key: dotted.key=value")->take_all();

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run >= 30 seeds per axis value and aggregate the metrics");
  sweep_cmd->add_option("scenario", sweep.scenario, "Scenario JSON file")->required();
  sweep_cmd->add_option("--axis", sweep.axis, "speed | wiggle_sigma | detector | target | cap")->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->required();
  sweep_cmd->add_option("--set", sweep.overrides, "Override a scenario key: dotted.key=value")->take_all();
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (default: all cores)");

  fs::path validate_path;
  std::vector<std::string> validate_overrides;
  auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario and print the resolved configuration");
  validate_cmd->add_option("scenario", validate_path, "Scenario JSON file")->required();
  validate_cmd->add_option("--set", validate_overrides, "Override a scenario key: dotted.key=value")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    return cmd_run(run, out, err);
  }
  if (*sweep_cmd) return cmd_sweep(sweep, out, err);
  return cmd_validate(validate_path, validate_overrides, out, err);
}

}  // namespace deweed::cli
