#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "deweed/cli.hpp"
#include "deweed/error.hpp"
#include "deweed/report.hpp"
#include "deweed/scenario.hpp"

using namespace deweed;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = DEWEED_SCENARIO_DIR;

// Scratch directory that is removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("deweed-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct OutputDirEnv {
  explicit OutputDirEnv(const fs::path& p) { ::setenv(cli::kOutputDirEnv, p.c_str(), 1); }
  ~OutputDirEnv() { ::unsetenv(cli::kOutputDirEnv); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_argv(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "deweed");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t count_dwell_rows(const std::string& plan_csv) {
  std::size_t n = 0;
  std::istringstream in(plan_csv);
  std::string line;
  while (std::getline(in, line)) n += line.find(",dwell,") != std::string::npos;
  return n;
}

}  // namespace

TEST_CASE("scenario: defaults and derived quantities") {
  const auto sc = scenario::load(kScenarios / "phase1_dwell.json");
  CHECK(sc.layout.effective_cap() == 15);
  CHECK(sc.detector_name == "perfect");
  const auto cfg = scenario::effective_config(sc);
  CHECK(cfg["derived"]["required_dwell_s"].get<double>() == doctest::Approx(28.86).epsilon(1e-4));
  CHECK(cfg["derived"]["effective_cap"].get<std::size_t>() == 15);
  CHECK(cfg["derived"]["exposure_window_s"].get<double>() == doctest::Approx(5.508).epsilon(1e-9));
}

TEST_CASE("scenario: unknown keys and bad values name the key") {
  auto doc = nlohmann::json::parse(R"({"layout": {"rowz": 7}})");
  try {
    scenario::parse(doc);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("layout.rowz") != std::string::npos);
  }
  doc = nlohmann::json::parse(R"({"recipes": {"phase1": {"e_uva_w_m2": -5}}})");
  try {
    scenario::parse(doc);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("e_uva") != std::string::npos);
  }
  CHECK_THROWS_AS(scenario::parse(nlohmann::json::parse(R"({"layout": {"recipe": "phase3"}})")), ValidationError);
  CHECK_THROWS_AS(scenario::parse(nlohmann::json::parse(R"({"detector": {"preset": "paper-99"}})")), ValidationError);
  CHECK_THROWS_AS(scenario::parse(nlohmann::json::parse(R"({"mission": {"mode": "hover"}})")), ValidationError);
  CHECK_THROWS_AS(scenario::parse(nlohmann::json::parse(R"({"extra": {}})")), ValidationError);
}

TEST_CASE("scenario: overrides") {
  auto doc = scenario::read_document(kScenarios / "phase1_dwell.json");
  scenario::apply_override(doc, "layout.honor_paper_16=true");
  scenario::apply_override(doc, "detector.preset=paper-95");
  scenario::apply_override(doc, "mission.target=0.5");
  const auto sc = scenario::parse(doc, kScenarios);
  CHECK(sc.layout.effective_cap() == 16);
  CHECK(sc.detector_name == "paper-95");
  CHECK(sc.mission.target == 0.5);
  CHECK_THROWS_AS(scenario::apply_override(doc, "no-equals-sign"), ValidationError);
  CHECK_THROWS_AS(scenario::apply_override(doc, "a..b=1"), ValidationError);
}

TEST_CASE("scenario: cap 16 needs the explicit flag") {
  CHECK_THROWS_AS(scenario::load(kScenarios / "phase1_dwell.json", {"layout.max_simultaneous=16"}), ValidationError);
  CHECK_NOTHROW(scenario::load(kScenarios / "phase1_dwell.json",
                               {"layout.max_simultaneous=16", "layout.honor_paper_16=true"}));
}

TEST_CASE("scenario: map file relative to the scenario") {
  TempDir tmp;
  write(tmp.path / "map.txt", "1 5 0.102\nW C S W W\n");
  write(tmp.path / "s.json", R"({"field": {"map": "map.txt"}, "layout": {"rows": 1, "cols": 5}})");
  const auto sc = scenario::load(tmp.path / "s.json");
  const auto grid = scenario::make_field(sc, 1);
  CHECK(grid.cols() == 5);
  CHECK(grid.count(field::CellClass::Weed) == 3);

  write(tmp.path / "bad.json", R"({"field": {"map": "missing.txt"}})");
  CHECK_THROWS_AS(scenario::load(tmp.path / "bad.json"), IoError);
}

TEST_CASE("scenario: malformed JSON and missing file") {
  TempDir tmp;
  write(tmp.path / "broken.json", "{\"field\": ");
  CHECK_THROWS_AS(scenario::load(tmp.path / "broken.json"), ParseError);
  CHECK_THROWS_AS(scenario::load(tmp.path / "absent.json"), IoError);
}

TEST_CASE("replay is deterministic") {
  const auto sc = scenario::load(kScenarios / "wiggle_field.json");
  const auto a = scenario::replay(5, sc);
  const auto b = scenario::replay(5, sc);
  CHECK(a == b);
  std::vector<sim::MissionMetrics> one{a};
  std::vector<sim::MissionMetrics> two{b};
  CHECK(report::metrics_csv(one, sc.mission.mode) == report::metrics_csv(two, sc.mission.mode));
}

TEST_CASE("validate command") {
  std::string out;
  std::string err;
  CHECK(run_argv({"validate", (kScenarios / "phase1_dwell.json").string()}, &out) == cli::kExitOk);
  CHECK(out.find("\"required_dwell_s\": 28.86") != std::string::npos);

  CHECK(run_argv({"validate", (kScenarios / "phase1_dwell.json").string(), "--set", "layout.max_simultaneous=16"},
                 nullptr, &err) == cli::kExitValidation);
  CHECK(err.find("6400") != std::string::npos);
  CHECK(err.find("6560") != std::string::npos);

  CHECK(run_argv({"validate", (kScenarios / "phase1_dwell.json").string(), "--set", "recipes.phase1.e_uva_w_m2=-1"},
                 nullptr, &err) == cli::kExitValidation);
  CHECK(err.find("recipes.phase1") != std::string::npos);

  CHECK(run_argv({"validate", "/nonexistent/scenario.json"}, nullptr, &err) == cli::kExitIo);
  CHECK(run_argv({"bogus"}) == cli::kExitValidation);
}

TEST_CASE("run command writes artifacts that parse back") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  std::string out;
  const auto scen = (kScenarios / "phase1_dwell.json").string();
  REQUIRE(run_argv({"run", scen, "--plot", "--seed", "3"}, &out) == cli::kExitOk);
  for (const char* f : {"metrics.csv", "summary.json", "plan.csv", "activation_log.csv", "detection.csv", "heatmap.ppm"}) {
    CHECK(fs::exists(tmp.path / f));
  }
  const auto metrics = report::parse_metrics_csv(slurp(tmp.path / "metrics.csv"));
  REQUIRE(metrics.size() == 1);
  CHECK(metrics[0].weed_kill_fraction == 1.0);
  CHECK(metrics[0].seed == 3);
  const std::vector<sim::MissionMetrics> again{metrics[0]};
  CHECK(report::metrics_csv(again, sim::MissionMode::Dwell) == slurp(tmp.path / "metrics.csv"));

  const auto plan_text = slurp(tmp.path / "plan.csv");
  const auto plan = sched::parse_plan_csv(plan_text, sched::ArrayLayout{});
  CHECK(sched::plan_csv(plan, sched::ArrayLayout{}) == plan_text);

  const auto summary = nlohmann::json::parse(slurp(tmp.path / "summary.json"));
  CHECK(summary["weed_kill_fraction"].get<double>() == 1.0);
}

TEST_CASE("run: 33 weeds batch as 3 under cap 15 and under cap 16") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  std::string map = "7 15 0.102\n";
  std::mt19937_64 rng(33);
  std::vector<char> cells(105, 'S');
  for (std::size_t i = 0; i < 33; ++i) cells[i] = 'W';
  std::shuffle(cells.begin(), cells.end(), rng);
  for (std::size_t r = 0; r < 7; ++r) {
    for (std::size_t c = 0; c < 15; ++c) map += std::string(c ? " " : "") + cells[r * 15 + c];
    map += "\n";
  }
  write(tmp.path / "map.txt", map);
  write(tmp.path / "s.json", R"({"field": {"map": "map.txt"}})");

  REQUIRE(run_argv({"run", (tmp.path / "s.json").string()}) == cli::kExitOk);
  const auto plan15 = slurp(tmp.path / "plan.csv");
  CHECK(count_dwell_rows(plan15) == 3);

  REQUIRE(run_argv({"run", (tmp.path / "s.json").string(), "--set", "layout.honor_paper_16=true"}) == cli::kExitOk);
  const auto plan16 = sched::parse_plan_csv(slurp(tmp.path / "plan.csv"), sched::ArrayLayout{});
  REQUIRE(plan16.activation_steps() == 3);
  CHECK(plan16.steps[0].active_set.size() == 16);
  CHECK(plan16.steps[2].active_set.size() == 1);
}

TEST_CASE("run: infeasible continuous mission exits 0 with the verdict recorded") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  std::string out;
  REQUIRE(run_argv({"run", (kScenarios / "phase2_continuous.json").string(), "--set", "layout.recipe=phase1"}, &out) ==
          cli::kExitOk);
  CHECK(out.find("infeasible") != std::string::npos);
  const auto metrics = report::parse_metrics_csv(slurp(tmp.path / "metrics.csv"));
  REQUIRE(metrics.size() == 1);
  CHECK_FALSE(metrics[0].feasible);
}

TEST_CASE("run: --seed determines every output") {
  TempDir a;
  TempDir b;
  const auto scen = (kScenarios / "wiggle_field.json").string();
  {
    OutputDirEnv env(a.path);
    REQUIRE(run_argv({"run", scen, "--seed", "17", "--set", "detector.preset=paper-95"}) == cli::kExitOk);
  }
  {
    OutputDirEnv env(b.path);
    REQUIRE(run_argv({"run", scen, "--seed", "17", "--set", "detector.preset=paper-95"}) == cli::kExitOk);
  }
  for (const char* f : {"metrics.csv", "summary.json", "plan.csv", "activation_log.csv", "detection.csv"}) {
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  }
}

TEST_CASE("sweep: speed axis flips feasibility at the window threshold") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  std::string out;
  REQUIRE(run_argv({"sweep", (kScenarios / "phase2_continuous.json").string(), "--axis", "speed", "--values",
                    "0.1,0.2778,0.5,1.0", "--set", "field.weed_fraction=0.005"},
                   &out) == cli::kExitOk);
  std::string axis;
  const auto rows = report::parse_sweep_csv(slurp(tmp.path / "sweep.csv"), &axis);
  CHECK(axis == "speed");
  REQUIRE(rows.size() == 4);
  // Window 15 * 0.102 / v against a 1.7992 s dwell: critical speed about 0.850 m/s.
  CHECK(rows[0].feasible_fraction == 1.0);
  CHECK(rows[1].feasible_fraction == 1.0);
  CHECK(rows[2].feasible_fraction == 1.0);
  CHECK(rows[3].feasible_fraction == 0.0);
  for (const auto& r : rows) CHECK(r.seeds >= 30);
  CHECK(report::sweep_csv(axis, rows) == slurp(tmp.path / "sweep.csv"));
}

TEST_CASE("sweep: detector axis raises missed weeds monotonically") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  REQUIRE(run_argv({"sweep", (kScenarios / "phase1_dwell.json").string(), "--axis", "detector", "--values",
                    "perfect,paper-98,paper-95", "--set", "field.rows=21", "--set", "field.cols=45"}) == cli::kExitOk);
  const auto rows = report::parse_sweep_csv(slurp(tmp.path / "sweep.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].missed_weeds.mean == 0.0);
  CHECK(rows[0].missed_weeds.mean < rows[1].missed_weeds.mean);
  CHECK(rows[1].missed_weeds.mean < rows[2].missed_weeds.mean);
}

TEST_CASE("sweep: validation failures") {
  TempDir tmp;
  OutputDirEnv env(tmp.path);
  std::string err;
  const auto scen = (kScenarios / "phase1_dwell.json").string();
  CHECK(run_argv({"sweep", scen, "--axis", "speed", "--values", ""}, nullptr, &err) == cli::kExitValidation);
  CHECK(run_argv({"sweep", scen, "--axis", "speed", "--values", " , "}, nullptr, &err) == cli::kExitValidation);
  CHECK(run_argv({"sweep", scen, "--axis", "altitude", "--values", "1"}, nullptr, &err) == cli::kExitValidation);
  for (const auto& [name, key] : cli::sweep_axes()) CHECK(err.find(name) != std::string::npos);
  CHECK(run_argv({"sweep", scen, "--axis", "cap", "--values", "15,16"}, nullptr, &err) == cli::kExitValidation);
  CHECK_FALSE(fs::exists(tmp.path / "sweep.csv"));
}

TEST_CASE("output dir falls back to the scenario value") {
  const auto sc = scenario::load(kScenarios / "phase1_dwell.json");
  ::unsetenv(cli::kOutputDirEnv);
  CHECK(cli::output_dir(sc) == fs::path("out/phase1_dwell"));
  OutputDirEnv env("/tmp/elsewhere");
  CHECK(cli::output_dir(sc) == fs::path("/tmp/elsewhere"));
}
