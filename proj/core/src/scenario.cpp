#include "wsnloc/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace wsnloc::harness {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : text) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(where, "unknown key `" + key + "`");
  }
}

double num_or(const json& j, const char* key, double def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) fail(where, std::string("`") + key + "` must be a number");
  return v.get<double>();
}

int int_or(const json& j, const char* key, int def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(where, std::string("`") + key + "` must be an integer");
  return v.get<int>();
}

bool bool_or(const json& j, const char* key, bool def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(where, std::string("`") + key + "` must be a boolean");
  return v.get<bool>();
}

std::string str_or(const json& j, const char* key, const std::string& def,
                   const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_string()) fail(where, std::string("`") + key + "` must be a string");
  return v.get<std::string>();
}

WorldConfig parse_world(const json& j, const std::string& where) {
  check_keys(j, {"width", "height", "comm_range", "n_anchors", "n_unknown", "placement"},
             where);
  WorldConfig w;
  w.width = num_or(j, "width", w.width, where);
  w.height = num_or(j, "height", w.height, where);
  w.comm_range = num_or(j, "comm_range", w.comm_range, where);
  w.n_anchors = int_or(j, "n_anchors", w.n_anchors, where);
  w.n_unknown = int_or(j, "n_unknown", w.n_unknown, where);
  const std::string placement = str_or(j, "placement", "uniform", where);
  if (placement == "uniform") {
    w.placement = Placement::Uniform;
  } else if (placement == "grid") {
    w.placement = Placement::Grid;
  } else {
    fail(where, "`placement` must be \"uniform\" or \"grid\", got \"" + placement + "\"");
  }
  return w;
}

PathLossParams parse_radio(const json& j, const std::string& where) {
  check_keys(j, {"ref_power_dbm", "exponent", "shadow_sigma_db"}, where);
  PathLossParams p;
  p.ref_power_dbm = num_or(j, "ref_power_dbm", p.ref_power_dbm, where);
  p.exponent = num_or(j, "exponent", p.exponent, where);
  p.shadow_sigma_db = num_or(j, "shadow_sigma_db", p.shadow_sigma_db, where);
  return p;
}

SensorParams parse_sensor(const json& j, const std::string& where) {
  check_keys(j, {"e_t0_sq", "sigma_n_sq", "m_samples", "threshold"}, where);
  SensorParams p;
  p.e_t0_sq = num_or(j, "e_t0_sq", p.e_t0_sq, where);
  p.sigma_n_sq = num_or(j, "sigma_n_sq", p.sigma_n_sq, where);
  p.m_samples = int_or(j, "m_samples", p.m_samples, where);
  p.threshold = num_or(j, "threshold", p.threshold, where);
  return p;
}

TargetConfig parse_target(const json& j, const std::string& where) {
  check_keys(j,
             {"start", "velocity", "p_init", "p_out", "motion_step_sigma", "start_present"},
             where);
  TargetConfig t;
  if (j.contains("start")) {
    const json& s = j.at("start");
    if (!s.is_array() || s.size() != 2 || !s.at(0).is_number() || !s.at(1).is_number()) {
      fail(where, "`start` must be a [x, y] pair");
    }
    t.start_x = s.at(0).get<double>();
    t.start_y = s.at(1).get<double>();
  }
  if (j.contains("velocity")) {
    const json& v = j.at("velocity");
    if (!v.is_array() || v.size() != 2 || !v.at(0).is_number() || !v.at(1).is_number()) {
      fail(where, "`velocity` must be a [vx, vy] pair");
    }
    t.vel_x = v.at(0).get<double>();
    t.vel_y = v.at(1).get<double>();
  }
  t.p_init = num_or(j, "p_init", t.p_init, where);
  t.p_out = num_or(j, "p_out", t.p_out, where);
  t.motion_step_sigma = num_or(j, "motion_step_sigma", t.motion_step_sigma, where);
  t.start_present = bool_or(j, "start_present", t.start_present, where);
  return t;
}

PfConfig parse_pf(const json& j, const std::string& where) {
  check_keys(j, {"n_particles", "resample_threshold", "init_spread_sigma"}, where);
  PfConfig p;
  p.n_particles = int_or(j, "n_particles", p.n_particles, where);
  p.resample_threshold = num_or(j, "resample_threshold", p.resample_threshold, where);
  p.init_spread_sigma = num_or(j, "init_spread_sigma", p.init_spread_sigma, where);
  return p;
}

KfConfig parse_kf(const json& j, const std::string& where) {
  check_keys(j, {"q", "r", "x0_var"}, where);
  KfConfig k;
  k.q = num_or(j, "q", k.q, where);
  k.r = num_or(j, "r", k.r, where);
  k.x0_var = num_or(j, "x0_var", k.x0_var, where);
  return k;
}

TrackingConfig parse_tracking(const json& j, const std::string& where) {
  check_keys(j, {"measurement", "meas_sigma"}, where);
  TrackingConfig t;
  const std::string mode = str_or(j, "measurement", "binary", where);
  if (mode == "binary") {
    t.measurement = MeasurementMode::Binary;
  } else if (mode == "gaussian") {
    t.measurement = MeasurementMode::Gaussian;
  } else {
    fail(where, "`measurement` must be \"binary\" or \"gaussian\", got \"" + mode + "\"");
  }
  t.meas_sigma = num_or(j, "meas_sigma", t.meas_sigma, where);
  return t;
}

FingerprintConfig parse_fingerprint(const json& j, const std::string& where) {
  check_keys(j,
             {"survey_pitch", "bin_width", "k", "samples_per_point", "samples_per_stream",
              "serving_tower", "n_traces", "trace_len"},
             where);
  FingerprintConfig f;
  f.survey_pitch = num_or(j, "survey_pitch", f.survey_pitch, where);
  f.bin_width = num_or(j, "bin_width", f.bin_width, where);
  f.k = int_or(j, "k", f.k, where);
  f.samples_per_point = int_or(j, "samples_per_point", f.samples_per_point, where);
  f.samples_per_stream = int_or(j, "samples_per_stream", f.samples_per_stream, where);
  f.serving_tower = int_or(j, "serving_tower", f.serving_tower, where);
  f.n_traces = int_or(j, "n_traces", f.n_traces, where);
  f.trace_len = int_or(j, "trace_len", f.trace_len, where);
  return f;
}

RocrssiConfig parse_rocrssi(const json& j, const std::string& where) {
  check_keys(j, {"radii"}, where);
  RocrssiConfig r;
  const std::string radii = str_or(j, "radii", "true", where);
  if (radii == "true") {
    r.radii = rangefree::RingRadii::TrueDistance;
  } else if (radii == "rssi") {
    r.radii = rangefree::RingRadii::FromRssi;
  } else {
    fail(where, "`radii` must be \"true\" or \"rssi\", got \"" + radii + "\"");
  }
  return r;
}

GpsConfig parse_gps(const json& j, const std::string& where) {
  check_keys(j,
             {"n_mobile", "n_static", "radius_noise_sigma", "first_last_only", "z_min",
              "z_max", "step_sigma"},
             where);
  GpsConfig g;
  g.n_mobile = int_or(j, "n_mobile", g.n_mobile, where);
  g.n_static = int_or(j, "n_static", g.n_static, where);
  g.radius_noise_sigma = num_or(j, "radius_noise_sigma", g.radius_noise_sigma, where);
  g.first_last_only = bool_or(j, "first_last_only", g.first_last_only, where);
  g.z_min = num_or(j, "z_min", g.z_min, where);
  g.z_max = num_or(j, "z_max", g.z_max, where);
  g.step_sigma = num_or(j, "step_sigma", g.step_sigma, where);
  return g;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {
      "dvhop", "rocrssi", "cellid", "knn",   "cellsense",
      "hmm",   "pf",      "kf",     "pf_kf", "gps_sphere"};
  return names;
}

double Scenario::grid_cell_or_default() const {
  return grid_cell.value_or(world.comm_range / 10.0);
}

void Scenario::validate() const {
  const auto& names = known_algorithms();
  if (std::find(names.begin(), names.end(), algorithm) == names.end()) {
    std::string list;
    for (const std::string& n : names) {
      if (!list.empty()) list += ", ";
      list += n;
    }
    throw ConfigError("unknown algorithm \"" + algorithm + "\" (known: " + list + ")");
  }
  if (seeds.empty()) throw ConfigError("scenario needs at least one seed");
  if (!(world.width > 0.0) || !(world.height > 0.0)) {
    throw ConfigError("world dimensions must be positive");
  }
  if (!(world.comm_range > 0.0)) throw ConfigError("comm_range must be positive");
  if (world.n_anchors < 0 || world.n_unknown < 0) {
    throw ConfigError("node counts must be non-negative");
  }
  radio.validate();
  sensor.validate();
  if (grid_cell && !(*grid_cell > 0.0)) throw ConfigError("grid_cell must be positive");

  filters::TargetModelParams tm{target.p_init, target.p_out, target.motion_step_sigma};
  tm.validate();

  const bool tracking_algo =
      algorithm == "pf" || algorithm == "kf" || algorithm == "pf_kf" ||
      algorithm == "hmm" || algorithm == "gps_sphere";
  if (tracking_algo && n_steps < 1) throw ConfigError("n_steps must be at least 1");

  if (pf.n_particles < 1) throw ConfigError("pf.n_particles must be at least 1");
  if (!(pf.resample_threshold >= 0.0 && pf.resample_threshold <= 1.0)) {
    throw ConfigError("pf.resample_threshold must lie in [0,1]");
  }
  if (kf.q < 0.0 || kf.r < 0.0 || kf.x0_var < 0.0) {
    throw ConfigError("kf noise variances must be non-negative");
  }
  if (tracking.measurement == MeasurementMode::Gaussian && !(tracking.meas_sigma > 0.0)) {
    throw ConfigError("tracking.meas_sigma must be positive");
  }
  if (!(fingerprint.survey_pitch > 0.0)) throw ConfigError("survey_pitch must be positive");
  if (!(fingerprint.bin_width > 0.0)) throw ConfigError("bin_width must be positive");
  if (fingerprint.k < 1) throw ConfigError("fingerprint.k must be at least 1");
  if (fingerprint.samples_per_point < 1 || fingerprint.samples_per_stream < 1) {
    throw ConfigError("fingerprint sample counts must be at least 1");
  }
  if (fingerprint.n_traces < 1 || fingerprint.trace_len < 2) {
    throw ConfigError("fingerprint traces need n_traces >= 1 and trace_len >= 2");
  }
  if (algorithm == "hmm" &&
      (fingerprint.serving_tower < 0 || fingerprint.serving_tower >= world.n_anchors)) {
    throw ConfigError("fingerprint.serving_tower must name an anchor (0.." +
                      std::to_string(world.n_anchors - 1) + ")");
  }
  if (algorithm == "gps_sphere") {
    if (gps.n_mobile < 1) throw ConfigError("gps.n_mobile must be at least 1");
    if (gps.n_static < 1) throw ConfigError("gps.n_static must be at least 1");
    if (gps.radius_noise_sigma < 0.0) {
      throw ConfigError("gps.radius_noise_sigma must be non-negative");
    }
    if (!(gps.z_max >= gps.z_min)) throw ConfigError("gps.z_max must be >= gps.z_min");
    if (gps.step_sigma < 0.0) throw ConfigError("gps.step_sigma must be non-negative");
  }
}

Scenario scenario_from_json_string(const std::string& text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(source_name + ": " + e.what());
  }
  const std::string where = source_name;
  check_keys(j,
             {"schema_version", "name", "algorithm", "seeds", "world", "radio", "sensor",
              "n_steps", "grid_cell", "target", "pf", "kf", "tracking", "fingerprint",
              "rocrssi", "gps"},
             where);

  Scenario s;
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    fail(where, "`schema_version` (integer) is required");
  }
  s.schema_version = j.at("schema_version").get<int>();
  if (s.schema_version != kScenarioSchemaVersion) {
    fail(where, "unsupported schema_version " + std::to_string(s.schema_version) +
                    " (this build reads version " +
                    std::to_string(kScenarioSchemaVersion) + ")");
  }
  s.name = str_or(j, "name", "", where);
  if (!j.contains("algorithm")) fail(where, "`algorithm` is required");
  s.algorithm = str_or(j, "algorithm", "", where);

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    fail(where, "`seeds` must be a non-empty array");
  }
  std::set<std::uint64_t> seen;
  for (const json& v : j.at("seeds")) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(where, "`seeds` entries must be non-negative integers");
    }
    const auto seed = v.get<std::uint64_t>();
    if (!seen.insert(seed).second) {
      s.warnings.push_back("duplicate seed " + std::to_string(seed) + " dropped");
      continue;
    }
    s.seeds.push_back(seed);
  }

  if (!j.contains("world")) fail(where, "`world` block is required");
  s.world = parse_world(j.at("world"), where + ": world");
  if (j.contains("radio")) s.radio = parse_radio(j.at("radio"), where + ": radio");
  if (j.contains("sensor")) s.sensor = parse_sensor(j.at("sensor"), where + ": sensor");
  s.n_steps = int_or(j, "n_steps", s.n_steps, where);
  if (j.contains("grid_cell")) {
    if (!j.at("grid_cell").is_number()) fail(where, "`grid_cell` must be a number");
    s.grid_cell = j.at("grid_cell").get<double>();
  }
  if (j.contains("target")) s.target = parse_target(j.at("target"), where + ": target");
  if (j.contains("pf")) s.pf = parse_pf(j.at("pf"), where + ": pf");
  if (j.contains("kf")) s.kf = parse_kf(j.at("kf"), where + ": kf");
  if (j.contains("tracking")) {
    s.tracking = parse_tracking(j.at("tracking"), where + ": tracking");
  }
  if (j.contains("fingerprint")) {
    s.fingerprint = parse_fingerprint(j.at("fingerprint"), where + ": fingerprint");
  }
  if (j.contains("rocrssi")) s.rocrssi = parse_rocrssi(j.at("rocrssi"), where + ": rocrssi");
  if (j.contains("gps")) s.gps = parse_gps(j.at("gps"), where + ": gps");

  s.content_hash = fnv1a64(j.dump());
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Scenario s = scenario_from_json_string(ss.str(), path);
  if (s.name.empty()) s.name = stem_of(path);
  return s;
}

std::string scenario_skeleton(const std::string& algorithm) {
  const auto& names = known_algorithms();
  if (std::find(names.begin(), names.end(), algorithm) == names.end()) {
    std::string list;
    for (const std::string& n : names) {
      if (!list.empty()) list += ", ";
      list += n;
    }
    throw ConfigError("unknown algorithm \"" + algorithm + "\" (known: " + list + ")");
  }

  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = algorithm + "_example";
  j["algorithm"] = algorithm;
  j["seeds"] = {1, 2, 3};
  j["world"] = {{"width", 10.0},     {"height", 10.0},  {"comm_range", 2.0},
                {"n_anchors", 3},    {"n_unknown", 50}, {"placement", "uniform"}};
  j["radio"] = {{"ref_power_dbm", -40.0}, {"exponent", 2.0}, {"shadow_sigma_db", 0.0}};

  const bool tracking_algo =
      algorithm == "pf" || algorithm == "kf" || algorithm == "pf_kf";
  if (tracking_algo) {
    j["sensor"] = {{"e_t0_sq", 4.0}, {"sigma_n_sq", 1.0}, {"m_samples", 1}, {"threshold", 2.0}};
    j["n_steps"] = 50;
    j["target"] = {{"start", {5.0, 5.0}},
                   {"velocity", {0.05, 0.02}},
                   {"p_init", 1.0},
                   {"p_out", 0.0},
                   {"motion_step_sigma", 0.1}};
    j["pf"] = {{"n_particles", 50}, {"resample_threshold", 0.5}, {"init_spread_sigma", 1.0}};
    j["kf"] = {{"q", 0.01}, {"r", 1.0}, {"x0_var", 1.0}};
    j["tracking"] = {{"measurement", "binary"}, {"meas_sigma", 0.5}};
    j["world"] = {{"width", 10.0},  {"height", 10.0},   {"comm_range", 2.0},
                  {"n_anchors", 36}, {"n_unknown", 0},  {"placement", "grid"}};
  }
  if (algorithm == "rocrssi") {
    j["grid_cell"] = 0.2;
    j["rocrssi"] = {{"radii", "true"}};
  }
  if (algorithm == "knn" || algorithm == "cellsense" || algorithm == "hmm" ||
      algorithm == "cellid") {
    j["world"] = {{"width", 20.0},   {"height", 20.0}, {"comm_range", 15.0},
                  {"n_anchors", 6},  {"n_unknown", 20}, {"placement", "uniform"}};
    j["radio"] = {{"ref_power_dbm", -40.0}, {"exponent", 2.5}, {"shadow_sigma_db", 4.0}};
    j["fingerprint"] = {{"survey_pitch", 2.0}, {"bin_width", 5.0},
                        {"k", 4},              {"samples_per_point", 3},
                        {"samples_per_stream", 5}, {"serving_tower", 0},
                        {"n_traces", 20},      {"trace_len", 30}};
    if (algorithm == "hmm") {
      j["grid_cell"] = 4.0;
      j["n_steps"] = 30;
    }
    if (algorithm == "cellsense") j["grid_cell"] = 4.0;
  }
  if (algorithm == "gps_sphere") {
    // The runner places its own mobile and static nodes; the range must span
    // the box (incl. altitude) or statics never collect enough spheres.
    j["world"] = {{"width", 10.0},  {"height", 10.0},  {"comm_range", 20.0},
                  {"n_anchors", 0}, {"n_unknown", 0},  {"placement", "uniform"}};
    j["n_steps"] = 20;
    j["gps"] = {{"n_mobile", 4},          {"n_static", 5},
                {"radius_noise_sigma", 0.0}, {"first_last_only", true},
                {"z_min", 0.0},           {"z_max", 5.0},
                {"step_sigma", 0.5}};
  }
  return j.dump(2) + "\n";
}

}  // namespace wsnloc::harness
