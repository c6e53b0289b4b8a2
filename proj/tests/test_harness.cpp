#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/harness.hpp"

using namespace wsnloc;
using namespace wsnloc::harness;

namespace {

std::string scenario_dir() { return WSNLOC_SCENARIO_DIR; }

std::string minimal_scenario(const std::string& algorithm) {
  return R"({
    "schema_version": 1,
    "name": "t",
    "algorithm": ")" + algorithm + R"(",
    "seeds": [1],
    "world": {"width": 10, "height": 10, "comm_range": 2,
              "n_anchors": 3, "n_unknown": 10}
  })";
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("wsnloc_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("the shipped baseline scenario loads with its stated geometry") {
  Scenario s = load_scenario(scenario_dir() + "/fig2a.scn");
  CHECK(s.name == "fig2a");
  CHECK(s.algorithm == "dvhop");
  CHECK(s.world.width == 10.0);
  CHECK(s.world.height == 10.0);
  CHECK(s.world.comm_range == 2.0);
  CHECK(s.world.n_anchors == 3);
  CHECK(s.world.n_unknown == 50);
  CHECK(s.seeds.size() == 20);
  CHECK(s.warnings.empty());
  CHECK(s.content_hash != 0);
}

TEST_CASE("every shipped scenario loads and validates") {
  for (const auto& entry : std::filesystem::directory_iterator(scenario_dir())) {
    if (entry.path().extension() != ".scn") continue;
    INFO("file: ", entry.path().string());
    Scenario s = load_scenario(entry.path().string());
    CHECK_NOTHROW(s.validate());
  }
}

TEST_CASE("a scenario without a world block is rejected") {
  std::string text = R"({
    "schema_version": 1, "algorithm": "dvhop", "seeds": [1]
  })";
  CHECK_THROWS_AS(scenario_from_json_string(text), ParseError);
}

TEST_CASE("structural problems are rejected with the offending detail") {
  CHECK_THROWS_AS(scenario_from_json_string("not json"), ParseError);
  CHECK_THROWS_AS(scenario_from_json_string("{}"), ParseError);  // no schema_version
  CHECK_THROWS_AS(scenario_from_json_string(
                      R"({"schema_version": 99, "algorithm": "dvhop", "seeds": [1],
                          "world": {}})"),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json_string(
                      R"({"schema_version": 1, "algorithm": "dvhop", "seeds": [],
                          "world": {}})"),
                  ParseError);
  CHECK_THROWS_AS(scenario_from_json_string(
                      R"({"schema_version": 1, "algorithm": "dvhop", "seeds": [-3],
                          "world": {}})"),
                  ParseError);
  // Unknown keys anywhere are spelled out.
  CHECK_THROWS_WITH_AS(scenario_from_json_string(
                           R"({"schema_version": 1, "algorithm": "dvhop", "seeds": [1],
                               "world": {}, "wrold": {}})"),
                       doctest::Contains("wrold"), ParseError);
  CHECK_THROWS_WITH_AS(scenario_from_json_string(
                           R"({"schema_version": 1, "algorithm": "dvhop", "seeds": [1],
                               "world": {"widht": 10}})"),
                       doctest::Contains("widht"), ParseError);
  CHECK_THROWS_AS(load_scenario("/no/such/scenario.scn"), IoError);
}

TEST_CASE("an unknown algorithm is named together with the valid choices") {
  // Loading validates, so the rejection happens at parse time.
  bool threw = false;
  try {
    scenario_from_json_string(minimal_scenario("warp_drive"));
  } catch (const ConfigError& e) {
    threw = true;
    const std::string what = e.what();
    CHECK(what.find("warp_drive") != std::string::npos);
    for (const std::string& algo : known_algorithms())
      CHECK(what.find(algo) != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("duplicate seeds are dropped with a warning") {
  std::string text = R"({
    "schema_version": 1, "name": "dup", "algorithm": "dvhop",
    "seeds": [5, 7, 5, 9, 7],
    "world": {"width": 10, "height": 10, "comm_range": 2,
              "n_anchors": 3, "n_unknown": 10}
  })";
  Scenario s = scenario_from_json_string(text);
  CHECK(s.seeds == std::vector<std::uint64_t>{5, 7, 9});
  REQUIRE(s.warnings.size() == 2);
  CHECK(s.warnings[0].find("duplicate seed") != std::string::npos);
}

TEST_CASE("every skeleton parses, validates and runs") {
  for (const std::string& algo : known_algorithms()) {
    INFO("algorithm: ", algo);
    std::string text = scenario_skeleton(algo);
    Scenario s = scenario_from_json_string(text, algo + ".skeleton");
    CHECK_NOTHROW(s.validate());
    s.seeds = {1};
    RunResult r = run_single(s, 1);
    CHECK(!r.records.empty());
    CHECK(r.summary.count(algo) + r.summary.count("pf") + r.summary.count("kf") > 0);
  }
  CHECK_THROWS_AS(scenario_skeleton("warp_drive"), ConfigError);
}

TEST_CASE("validation bounds the numeric configuration") {
  Scenario s = scenario_from_json_string(minimal_scenario("pf"));
  s.pf.n_particles = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario_from_json_string(minimal_scenario("pf"));
  s.pf.resample_threshold = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario_from_json_string(minimal_scenario("pf"));
  s.n_steps = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario_from_json_string(minimal_scenario("rocrssi"));
  s.grid_cell = -0.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario_from_json_string(minimal_scenario("hmm"));
  s.fingerprint.serving_tower = 99;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario_from_json_string(minimal_scenario("kf"));
  s.tracking.measurement = MeasurementMode::Gaussian;
  s.tracking.meas_sigma = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("grid cell defaults to a tenth of the communication range") {
  Scenario s = scenario_from_json_string(minimal_scenario("rocrssi"));
  CHECK(!s.grid_cell.has_value());
  CHECK(s.grid_cell_or_default() == doctest::Approx(0.2).epsilon(1e-12));
  s.grid_cell = 0.5;
  CHECK(s.grid_cell_or_default() == 0.5);
}

TEST_CASE("per-record errors equal the truth-to-estimate distance") {
  Scenario s = scenario_from_json_string(minimal_scenario("dvhop"));
  s.world.comm_range = 5.0;  // dense enough that all ten unknowns resolve
  RunResult r = run_single(s, 4);
  REQUIRE(!r.records.empty());
  for (const Record& rec : r.records) {
    CHECK(rec.error_m == doctest::Approx(distance(rec.truth, rec.est)).epsilon(1e-12));
    CHECK(rec.algorithm == "dvhop");
  }
}

TEST_CASE("failures are recorded per node instead of aborting the run") {
  Scenario s = scenario_from_json_string(minimal_scenario("dvhop"));
  s.world.comm_range = 0.6;  // drastically under-connected field
  RunResult r = run_single(s, 1);
  CHECK(!r.failures.empty());
  for (const Failure& f : r.failures) {
    CHECK(f.algorithm == "dvhop");
    CHECK(!f.reason.empty());
  }
  CHECK(r.summary.at("dvhop").n_failed == static_cast<int>(r.failures.size()));
}

TEST_CASE("summaries aggregate mean and rms over the records") {
  Scenario s = scenario_from_json_string(minimal_scenario("cellid"));
  s.world.comm_range = 6.0;
  RunResult r = run_single(s, 2);
  REQUIRE(!r.records.empty());
  double sum = 0, sq = 0;
  for (const Record& rec : r.records) {
    sum += rec.error_m;
    sq += rec.error_m * rec.error_m;
  }
  const auto& agg = r.summary.at("cellid");
  CHECK(agg.n_records == static_cast<int>(r.records.size()));
  CHECK(agg.mean_error == doctest::Approx(sum / r.records.size()).epsilon(1e-12));
  CHECK(agg.rms_error == doctest::Approx(std::sqrt(sq / r.records.size())).epsilon(1e-12));
}

TEST_CASE("rms error of paired positions") {
  std::vector<Position> est = {{0, 0, 0}, {2, 0, 0}};
  std::vector<Position> truth = {{0, 0, 0}, {0, 0, 0}};
  CHECK(rms_error(est, truth) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  std::vector<Position> same = {{1, 2, 0}, {3, 4, 0}};
  CHECK(rms_error(same, same) == 0.0);
  std::vector<Position> shifted = {{2, 2, 0}, {4, 4, 0}};  // constant 1 m in x
  CHECK(rms_error(shifted, same) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<Position> shorter = {{0, 0, 0}};
  CHECK_THROWS_AS(rms_error(shorter, same), ContractError);
  CHECK_THROWS_AS(rms_error({}, {}), ContractError);
}

TEST_CASE("identical runs render byte-identical results") {
  Scenario s = scenario_from_json_string(minimal_scenario("dvhop"));
  s.world.comm_range = 3.0;
  s.seeds = {1, 2, 3};
  auto r1 = run_scenario(s);
  auto r2 = run_scenario(s);
  CHECK(results_csv(r1) == results_csv(r2));
  CHECK(plotdata_csv(r1) == plotdata_csv(r2));
}

TEST_CASE("results csv has a header plus one row per record") {
  RunResult r;
  r.scenario_name = "hand";
  r.seed = 9;
  r.records.push_back({"algo", 0, {0, 0, 0}, {1, 0, 0}, 1.0});
  r.records.push_back({"algo", 1, {1, 1, 0}, {1, 1, 0}, 0.0});
  std::vector<RunResult> rs = {r};
  std::string csv = results_csv(rs);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 3);
  CHECK(csv.rfind("seed,algorithm,node_or_step,true_x,true_y,true_z,est_x,est_y,est_z,error_m\n",
                  0) == 0);
  CHECK(csv.find("9,algo,0,0,0,0,1,0,0,1\n") != std::string::npos);
  CHECK_THROWS_AS(results_csv({}), ContractError);
}

TEST_CASE("tracking runs emit both filter series") {
  Scenario s = scenario_from_json_string(minimal_scenario("pf_kf"));
  s.world = {10, 10, 2, 16, 0, Placement::Grid};
  s.n_steps = 10;
  s.pf.n_particles = 40;
  s.seeds = {1, 2};
  auto results = run_scenario(s);
  REQUIRE(results.size() == 2);
  for (const RunResult& r : results) {
    CHECK(r.summary.count("pf") == 1);
    CHECK(r.summary.count("kf") == 1);
    CHECK(r.summary.at("pf").n_records == 10);
  }
  std::string plot = plotdata_csv(results);
  CHECK(plot.rfind("series,x,y\n", 0) == 0);
  CHECK(plot.find("\npf,") != std::string::npos);
  CHECK(plot.find("\nkf,") != std::string::npos);
  // Records arrive grouped by algorithm, steps 1..n ascending within each
  // group (step 1 is the first post-motion instant).
  const auto& recs = results[0].records;
  REQUIRE(recs.size() == 20);
  for (int i = 0; i < 10; ++i) {
    CHECK(recs[static_cast<std::size_t>(i)].algorithm == "kf");
    CHECK(recs[static_cast<std::size_t>(i)].node_or_step == i + 1);
    CHECK(recs[static_cast<std::size_t>(10 + i)].algorithm == "pf");
  }
}

TEST_CASE("gaussian-mode tracking runs cleanly") {
  Scenario s = scenario_from_json_string(minimal_scenario("pf_kf"));
  s.world = {10, 10, 2, 1, 0, Placement::Grid};
  s.tracking.measurement = MeasurementMode::Gaussian;
  s.tracking.meas_sigma = 0.5;
  s.n_steps = 15;
  s.pf.n_particles = 200;
  RunResult r = run_single(s, 3);
  CHECK(r.summary.at("pf").n_records == 15);
  CHECK(r.summary.at("kf").n_records == 15);
  CHECK(r.summary.at("pf").mean_error < 3.0);
  CHECK(r.summary.at("kf").mean_error < 3.0);
}

TEST_CASE("gps runs report overhead and recover noiseless geometry") {
  Scenario s = scenario_from_json_string(minimal_scenario("gps_sphere"));
  s.world = {10, 10, 30, 0, 0, Placement::Uniform};  // range covers the field
  s.gps.n_mobile = 4;
  s.gps.n_static = 5;
  s.gps.radius_noise_sigma = 0.0;
  s.n_steps = 12;
  RunResult r = run_single(s, 6);
  const auto& agg = r.summary.at("gps_sphere");
  REQUIRE(agg.beacon_overhead.has_value());
  // Every mobile node transmits once per step: overhead == n_steps.
  CHECK(*agg.beacon_overhead == doctest::Approx(12.0).epsilon(1e-12));
  REQUIRE(agg.n_records > 0);
  for (const Record& rec : r.records) CHECK(rec.error_m < 1e-6);
}

TEST_CASE("export writes the declared files and is idempotent") {
  Scenario s = scenario_from_json_string(minimal_scenario("dvhop"));
  s.world.comm_range = 3.0;
  s.seeds = {1, 2};
  auto results = run_scenario(s);
  TempDir dir;
  auto paths1 = export_results(results, dir.file("out"), ExportFormat::Csv);
  REQUIRE(paths1.size() == 2);
  CHECK(std::filesystem::exists(paths1[0]));
  CHECK(std::filesystem::exists(paths1[1]));
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  std::string first = slurp(paths1[0]);
  auto paths2 = export_results(results, dir.file("out"), ExportFormat::Csv);
  CHECK(slurp(paths2[0]) == first);
  auto plots = export_results(results, dir.file("plots"), ExportFormat::Plotdata);
  REQUIRE(plots.size() == 1);
  CHECK(std::filesystem::exists(plots[0]));
  // A directory path blocked by an existing file reports an io failure.
  std::ofstream(dir.file("wall")).close();
  CHECK_THROWS_AS(export_results(results, dir.file("wall") + "/sub", ExportFormat::Csv),
                  IoError);
}

TEST_CASE("summary json is valid json with stable aggregate fields") {
  Scenario s = scenario_from_json_string(minimal_scenario("cellid"));
  s.world.comm_range = 6.0;
  s.seeds = {1, 2, 3};
  auto results = run_scenario(s);
  nlohmann::json j = nlohmann::json::parse(summary_json(results));
  CHECK(j.at("schema") == "wsnloc.summary.v1");
  CHECK(j.at("scenario") == "t");
  CHECK(j.at("seeds").size() == 3);
  CHECK(j.at("algorithms").contains("cellid"));
  CHECK(j.at("algorithms").at("cellid").at("n_records").get<int>() > 0);
  CHECK(j.at("per_seed").size() == 3);
}

TEST_CASE("comparison tables aggregate exported summaries") {
  TempDir dir;
  std::vector<std::string> files;
  for (const char* algo : {"cellid", "dvhop"}) {
    Scenario s = scenario_from_json_string(minimal_scenario(algo));
    s.world.comm_range = 5.0;
    s.name = std::string("case_") + algo;
    s.seeds = {1, 2};
    auto results = run_scenario(s);
    auto paths = export_results(results, dir.file(algo), ExportFormat::Csv);
    files.push_back(paths[1]);  // summary.json
  }
  ComparisonTable table = compare_summaries(files);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].scenario == "case_cellid");
  CHECK(table.rows[0].algorithm == "cellid");
  CHECK(table.rows[0].n_seeds == 2);
  CHECK(table.rows[1].algorithm == "dvhop");
  std::string csv = comparison_csv(table);
  CHECK(csv.rfind("scenario,algorithm,n_seeds,mean_error_m,rms_error_m,runtime_ms\n", 0) == 0);
  CHECK_THROWS_AS(compare_summaries(std::vector<std::string>{dir.file("nope.json")}), IoError);
}

TEST_CASE("state-sequence decoding beats plain cell centroids on the same field") {
  // Both locate GSM-style receivers against the same six-tower field; the
  // sequence decoder exploits motion continuity and should not lose.
  double hmm_sum = 0, cellid_sum = 0;
  int n_seeds = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Scenario hmm = scenario_from_json_string(minimal_scenario("hmm"));
    hmm.world = {20, 20, 15, 6, 0, Placement::Uniform};
    hmm.radio.shadow_sigma_db = 2.0;
    hmm.grid_cell = 5.0;
    hmm.n_steps = 30;
    hmm.fingerprint.bin_width = 2.0;
    hmm.fingerprint.n_traces = 60;
    hmm.fingerprint.trace_len = 50;
    RunResult hr = run_single(hmm, seed);

    Scenario cid = scenario_from_json_string(minimal_scenario("cellid"));
    cid.world = {20, 20, 15, 6, 20, Placement::Uniform};
    RunResult cr = run_single(cid, seed);

    if (hr.records.empty() || cr.records.empty()) continue;
    hmm_sum += hr.summary.at("hmm").mean_error;
    cellid_sum += cr.summary.at("cellid").mean_error;
    ++n_seeds;
  }
  REQUIRE(n_seeds >= 18);
  CHECK(hmm_sum / n_seeds < cellid_sum / n_seeds);
}

TEST_SUITE_END();
