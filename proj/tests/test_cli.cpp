#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "minexp/cli.hpp"

using namespace minexp;
namespace fs = std::filesystem;

namespace {

const char* kGoodScenario = R"({
  "start": [-8.0, -8.0],
  "goal": [8.0, 8.0],
  "seed": 3,
  "field": {
    "mode": "static",
    "bases": [
      {"peak": 0.8, "center": [1.0, -1.0], "shape": [0.07, 0.01, 0.05]}
    ]
  },
  "train": {"max_epochs": 150, "collocation": 32}
})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("minexp_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (err_text != nullptr) *err_text = err.str();
  return rc;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario parsing: defaults, overrides, and strictness") {
  const ScenarioFile f = parse_scenario_json(kGoodScenario);
  CHECK(f.scenario.speed == 10.0);
  CHECK(f.scenario.workspace_half_width == 15.0);
  CHECK(f.seed == 3);
  CHECK(f.train.max_epochs.value() == 150);
  TrainConfig cfg = TrainConfig::desk_profile(TemporalMode::kStatic);
  f.apply(cfg);
  CHECK(cfg.max_epochs == 150);
  CHECK(cfg.collocation == 32);

  CHECK_THROWS_WITH_AS(parse_scenario_json("{]"),
                       doctest::Contains("invalid JSON"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_scenario_json(R"({"start": [0,0], "goal": [1,1], "bogus": 1,
        "field": {"bases": [{"peak": 1, "center": [0,0], "shape": [1,0,1]}]}})"),
      doctest::Contains("$.bogus"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_scenario_json(R"({"start": [0,0], "goal": [1,1],
        "field": {"mode": "wavy",
                  "bases": [{"peak": 1, "center": [0,0], "shape": [1,0,1]}]}})"),
      doctest::Contains("$.field.mode"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_scenario_json(R"({"goal": [1,1],
        "field": {"bases": [{"peak": 1, "center": [0,0], "shape": [1,0,1]}]}})"),
      doctest::Contains("$.start"), std::runtime_error);
  // Shape not positive definite surfaces as a scenario error.
  CHECK_THROWS(parse_scenario_json(R"({"start": [0,0], "goal": [1,1],
        "field": {"bases": [{"peak": 1, "center": [0,0], "shape": [-1,0,1]}]}})"));
}

TEST_CASE("validate: good file exits 0, bad file exits 2") {
  TempDir dir;
  const std::string good = dir.file("ok.json", kGoodScenario);
  std::string out;
  CHECK(run({"validate", "--scenario", good}, &out) == 0);
  CHECK(out.find("ok:") != std::string::npos);

  const std::string bad = dir.file("bad.json", "{\"nope\": 1}");
  std::string err;
  CHECK(run({"validate", "--scenario", bad}, nullptr, &err) == 2);
  CHECK(err.find("error:") != std::string::npos);
  CHECK(run({"validate", "--scenario", dir.sub("missing.json")}) == 2);
}

TEST_CASE("unknown flags and missing arguments exit 2") {
  CHECK(run({"validate"}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({}) == 2);
}

TEST_CASE("shoot on a time-varying field exits 4") {
  TempDir dir;
  const std::string scn = dir.file("tv.json", R"({
    "start": [-8.0, -8.0], "goal": [8.0, 8.0],
    "field": {"mode": "cosine",
      "bases": [{"peak": 0.8, "center": [1.0, -1.0], "shape": [0.07, 0.01, 0.05]}]}
  })");
  std::string err;
  CHECK(run({"shoot", "--scenario", scn, "--out-dir", dir.sub("out")},
            nullptr, &err) == 4);
  CHECK(err.find("static") != std::string::npos);
}

TEST_CASE("shoot writes artifacts and a readable trajectory") {
  TempDir dir;
  const std::string scn = dir.file("s.json", kGoodScenario);
  const std::string out_dir = dir.sub("shot");
  CHECK(run({"shoot", "--scenario", scn, "--out-dir", out_dir}) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "shot.json"));
  std::ifstream traj(fs::path(out_dir) / "trajectory.csv");
  const Trajectory t = read_trajectory_csv(traj);
  CHECK(t.size() > 100);
  CHECK(t.front().x1 == doctest::Approx(-8.0).epsilon(1e-12));
  CHECK(t.back().x1 == doctest::Approx(8.0).epsilon(1e-2));
  // H ~ 0 along the extremal.
  for (std::size_t i = 0; i < t.size(); i += 200) {
    CHECK(std::abs(t[i].H) < 1e-6);
  }
}

TEST_CASE("train runs, writes artifacts, and is bit-for-bit deterministic") {
  TempDir dir;
  const std::string scn = dir.file("s.json", kGoodScenario);
  const std::string d1 = dir.sub("run1");
  const std::string d2 = dir.sub("run2");
  CHECK(run({"train", "--scenario", scn, "--profile", "desk", "--out-dir", d1}) == 0);
  CHECK(run({"train", "--scenario", scn, "--profile", "desk", "--out-dir", d2}) == 0);
  for (const char* name :
       {"model.ckpt", "trajectory.csv", "loss_report.json", "training_log.csv",
        "scenario.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(fs::path(d1) / name));
    CHECK(slurp((fs::path(d1) / name).string()) ==
          slurp((fs::path(d2) / name).string()));
  }

  // A different seed must change the artifacts.
  const std::string d3 = dir.sub("run3");
  CHECK(run({"train", "--scenario", scn, "--profile", "desk", "--out-dir", d3,
             "--seed", "99"}) == 0);
  CHECK(slurp((fs::path(d1) / "model.ckpt").string()) !=
        slurp((fs::path(d3) / "model.ckpt").string()));
}

TEST_CASE("train rejects a bad profile and a bad scenario") {
  TempDir dir;
  const std::string scn = dir.file("s.json", kGoodScenario);
  CHECK(run({"train", "--scenario", scn, "--profile", "warp9",
             "--out-dir", dir.sub("x")}) == 2);
  const std::string bad = dir.file("bad.json", "{");
  CHECK(run({"train", "--scenario", bad, "--out-dir", dir.sub("y")}) == 2);
}

TEST_CASE("plotdata recomputes overlays from a finished run") {
  TempDir dir;
  const std::string scn = dir.file("s.json", kGoodScenario);
  const std::string rd = dir.sub("run");
  REQUIRE(run({"train", "--scenario", scn, "--profile", "desk",
               "--out-dir", rd}) == 0);
  CHECK(run({"plotdata", "--run-dir", rd}) == 0);
  for (const char* name : {"hamiltonian.tsv", "kinematics.tsv", "costates.tsv",
                           "stationarity.tsv", "trajectory_xy.tsv",
                           "field_grid.tsv"}) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path(rd) / name));
  }
  // The grid file covers the workspace corners.
  const std::string grid = slurp((fs::path(rd) / "field_grid.tsv").string());
  CHECK(grid.find("-15\t-15\t") != std::string::npos);
  CHECK(run({"plotdata", "--run-dir", dir.sub("nonexistent")}) == 2);
}
