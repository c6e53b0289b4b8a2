#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/filters.hpp"
#include "wsnloc/propagation.hpp"
#include "wsnloc/rangefree.hpp"
#include "wsnloc/world.hpp"

namespace wsnloc::harness {

inline constexpr int kScenarioSchemaVersion = 1;

// The algorithms a scenario may select.
const std::vector<std::string>& known_algorithms();

struct WorldConfig {
  double width = 10.0;
  double height = 10.0;
  double comm_range = 2.0;
  int n_anchors = 3;
  int n_unknown = 50;
  Placement placement = Placement::Uniform;
};

struct TargetConfig {
  std::optional<double> start_x;  // world center when unset
  std::optional<double> start_y;
  double vel_x = 0.0;
  double vel_y = 0.0;
  double p_init = 1.0;
  double p_out = 0.0;
  double motion_step_sigma = 0.1;
  bool start_present = true;
};

struct PfConfig {
  int n_particles = 50;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
  double init_spread_sigma = 1.0;   // <= 0 scatters uniformly over the world
};

struct KfConfig {
  double q = 0.01;
  double r = 1.0;
  double x0_var = 1.0;
};

enum class MeasurementMode { Binary, Gaussian };

struct TrackingConfig {
  MeasurementMode measurement = MeasurementMode::Binary;
  double meas_sigma = 0.5;  // Gaussian-mode position measurement noise
};

struct FingerprintConfig {
  double survey_pitch = 1.0;
  double bin_width = 5.0;
  int k = 4;
  int samples_per_point = 3;   // survey samples per tower per reference point
  int samples_per_stream = 5;  // query samples per tower
  int serving_tower = 0;       // tower whose RSSI drives the state model
  int n_traces = 20;
  int trace_len = 30;
};

struct RocrssiConfig {
  rangefree::RingRadii radii = rangefree::RingRadii::TrueDistance;
};

struct GpsConfig {
  int n_mobile = 4;
  int n_static = 5;
  double radius_noise_sigma = 0.0;
  bool first_last_only = true;  // keep first + latest beacon per sender
  double z_min = 0.0;
  double z_max = 5.0;
  double step_sigma = 0.5;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::string algorithm;
  std::vector<std::uint64_t> seeds;
  WorldConfig world;
  PathLossParams radio;
  SensorParams sensor;
  int n_steps = 50;
  std::optional<double> grid_cell;
  TargetConfig target;
  PfConfig pf;
  KfConfig kf;
  TrackingConfig tracking;
  FingerprintConfig fingerprint;
  RocrssiConfig rocrssi;
  GpsConfig gps;

  std::vector<std::string> warnings;  // collected while loading
  std::uint64_t content_hash = 0;     // of the canonicalized source text

  double grid_cell_or_default() const;  // comm_range / 10 when unset
  void validate() const;
};

// Strictly validated load: unknown keys are rejected, duplicate seeds are
// dropped with a warning.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_string(const std::string& text,
                                   const std::string& source_name = "<string>");

// A ready-to-edit scenario file body for the given algorithm.
std::string scenario_skeleton(const std::string& algorithm);

struct Record {
  std::string algorithm;
  int node_or_step = 0;
  Position truth;
  Position est;
  double error_m = 0.0;
};

struct Failure {
  std::string algorithm;
  int node_or_step = 0;
  std::string reason;
};

struct AlgorithmSummary {
  int n_records = 0;
  int n_failed = 0;
  double mean_error = 0.0;
  double rms_error = 0.0;
  std::optional<double> beacon_overhead;
};

struct RunResult {
  std::string scenario_name;
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  std::vector<Record> records;    // grouped by algorithm, ascending node/step
  std::vector<Failure> failures;  // per-node/step problems, non-fatal
  std::map<std::string, AlgorithmSummary> summary;
  double runtime_ms = 0.0;  // informational; never part of determinism claims
};

// One result per seed, in seed order; fully deterministic per (scenario, seed)
// apart from runtime_ms.
std::vector<RunResult> run_scenario(const Scenario& s);
RunResult run_single(const Scenario& s, std::uint64_t seed);

// sqrt(mean squared Euclidean error) over paired positions.
double rms_error(std::span<const Position> estimates, std::span<const Position> truth);

enum class ExportFormat { Csv, Plotdata };

// Deterministic text renderings.
std::string results_csv(std::span<const RunResult> results);
std::string summary_json(std::span<const RunResult> results);
std::string plotdata_csv(std::span<const RunResult> results);

// Writes results.csv + summary.json (Csv) or plotdata.csv (Plotdata) under
// dir, creating it if needed. Returns the paths written.
std::vector<std::string> export_results(std::span<const RunResult> results,
                                        const std::string& dir, ExportFormat format);

struct ComparisonRow {
  std::string scenario;
  std::string algorithm;
  int n_seeds = 0;
  double mean_error = 0.0;
  double rms_error = 0.0;
  double runtime_ms = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // one per (scenario, algorithm)
};

// Aggregates previously exported summary.json files.
ComparisonTable compare_summaries(std::span<const std::string> paths);
std::string comparison_csv(const ComparisonTable& table);

}  // namespace wsnloc::harness
