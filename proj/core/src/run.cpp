#include "wsnloc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "wsnloc/fingerprint.hpp"
#include "wsnloc/geo.hpp"
#include "wsnloc/grid.hpp"

namespace wsnloc::harness {

namespace {

// Independent RNG substreams per seed.
constexpr std::uint64_t kStreamWorld = 0;
constexpr std::uint64_t kStreamTruth = 1;
constexpr std::uint64_t kStreamMeasure = 2;
constexpr std::uint64_t kStreamFilter = 3;
constexpr std::uint64_t kStreamSurvey = 4;

constexpr double kMinSensingDistance = 1e-6;

World make_world(const Scenario& s, std::uint64_t seed) {
  return build_world(s.world.width, s.world.height, s.world.comm_range, s.world.n_anchors,
                     s.world.n_unknown, derive_seed(seed, kStreamWorld),
                     s.world.placement);
}

void add_record(RunResult& out, std::string algorithm, int node_or_step,
                const Position& truth, const Position& est) {
  Record r;
  r.algorithm = std::move(algorithm);
  r.node_or_step = node_or_step;
  r.truth = truth;
  r.est = est;
  r.error_m = distance(truth, est);
  out.records.push_back(std::move(r));
}

void add_failure(RunResult& out, std::string algorithm, int node_or_step,
                 std::string reason) {
  out.failures.push_back({std::move(algorithm), node_or_step, std::move(reason)});
}

void compute_summaries(RunResult& out) {
  for (const Record& r : out.records) {
    AlgorithmSummary& s = out.summary[r.algorithm];
    ++s.n_records;
    s.mean_error += r.error_m;
    s.rms_error += r.error_m * r.error_m;
  }
  for (const Failure& f : out.failures) ++out.summary[f.algorithm].n_failed;
  for (auto& [name, s] : out.summary) {
    if (s.n_records > 0) {
      s.mean_error /= s.n_records;
      s.rms_error = std::sqrt(s.rms_error / s.n_records);
    }
  }
}

void run_dvhop(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  const rangefree::HopTable table = rangefree::flood_hops(world);
  const auto& anchors = world.anchors();
  std::vector<rangefree::AnchorCalibration> calibrations;
  for (const Node& a : anchors) {
    try {
      calibrations.push_back(rangefree::avg_hop_size(a.id, table, anchors));
    } catch (const EstimateError&) {
      // anchor unreachable from every peer; it cannot calibrate anyone
    }
  }
  for (const Node& n : world.unknowns()) {
    try {
      const Position est = rangefree::dvhop_estimate(n.id, table, calibrations, anchors);
      add_record(out, "dvhop", n.id, n.pos, est);
    } catch (const Error& e) {
      add_failure(out, "dvhop", n.id, e.what());
    }
  }
}

void run_rocrssi(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  Rng measure_rng(derive_seed(seed, kStreamMeasure));
  std::vector<NodeId> ids;
  for (const Node& n : world.nodes()) ids.push_back(n.id);
  const RssiTable table = measure_pairwise_rssi(world, ids, s.radio, measure_rng);
  const auto& anchors = world.anchors();
  const double cell = s.grid_cell_or_default();
  for (const Node& n : world.unknowns()) {
    try {
      const auto rings =
          rangefree::rocrssi_rings(n.id, anchors, table, s.rocrssi.radii, s.radio);
      rangefree::GridAccumulator acc(world.bounds(), cell);
      const Position est = rangefree::rocrssi_locate(rings, acc);
      add_record(out, "rocrssi", n.id, n.pos, est);
    } catch (const Error& e) {
      add_failure(out, "rocrssi", n.id, e.what());
    }
  }
}

void run_cellid(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  for (const Node& n : world.unknowns()) {
    std::vector<Position> heard;
    for (const Node& a : world.anchors()) {
      if (distance(n.pos, a.pos) <= world.comm_range()) heard.push_back(a.pos);
    }
    try {
      add_record(out, "cellid", n.id, n.pos, geo::cellid_locate(heard));
    } catch (const Error& e) {
      add_failure(out, "cellid", n.id, e.what());
    }
  }
}

// Reference lattice survey: every tower measured repeatedly at every lattice
// point. Sample times number the lattice points.
std::vector<fingerprint::SurveySample> make_survey(const Scenario& s, const World& world,
                                                   Rng& rng) {
  const GridSpec lattice(world.bounds(), s.fingerprint.survey_pitch);
  std::vector<fingerprint::SurveySample> survey;
  for (int i = 0; i < lattice.n_cells(); ++i) {
    const Position p = lattice.cell_center(i);
    for (const Node& tower : world.anchors()) {
      const double d = std::max(distance(p, tower.pos), kMinSensingDistance);
      for (int rep = 0; rep < s.fingerprint.samples_per_point; ++rep) {
        survey.push_back({static_cast<double>(i), p.x, p.y, tower.id,
                          rssi_at(d, s.radio, rng)});
      }
    }
  }
  return survey;
}

void run_knn(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  Rng survey_rng(derive_seed(seed, kStreamSurvey));
  const auto survey = make_survey(s, world, survey_rng);
  const auto db = fingerprint::build_fingerprint_db(survey);
  Rng measure_rng(derive_seed(seed, kStreamMeasure));
  for (const Node& n : world.unknowns()) {
    std::map<fingerprint::TowerId, double> reading;
    for (const Node& tower : world.anchors()) {
      const double d = std::max(distance(n.pos, tower.pos), kMinSensingDistance);
      reading[tower.id] = rssi_at(d, s.radio, measure_rng);
    }
    try {
      add_record(out, "knn", n.id, n.pos, fingerprint::knn_locate(db, reading, s.fingerprint.k));
    } catch (const Error& e) {
      add_failure(out, "knn", n.id, e.what());
    }
  }
}

void run_cellsense(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  Rng survey_rng(derive_seed(seed, kStreamSurvey));
  const auto survey = make_survey(s, world, survey_rng);
  const auto db = fingerprint::build_cellsense(survey, world.bounds(),
                                               s.grid_cell_or_default(),
                                               s.fingerprint.bin_width);
  Rng measure_rng(derive_seed(seed, kStreamMeasure));
  for (const Node& n : world.unknowns()) {
    std::map<fingerprint::TowerId, std::vector<double>> streams;
    for (const Node& tower : world.anchors()) {
      const double d = std::max(distance(n.pos, tower.pos), kMinSensingDistance);
      auto& stream = streams[tower.id];
      stream.reserve(static_cast<std::size_t>(s.fingerprint.samples_per_stream));
      for (int rep = 0; rep < s.fingerprint.samples_per_stream; ++rep) {
        stream.push_back(rssi_at(d, s.radio, measure_rng));
      }
    }
    try {
      add_record(out, "cellsense", n.id, n.pos, fingerprint::cellsense_locate(db, streams));
    } catch (const Error& e) {
      add_failure(out, "cellsense", n.id, e.what());
    }
  }
}

// Uniform walk over a cell and its edge neighbors.
int walk_step(const GridSpec& grid, int cell, Rng& rng) {
  std::vector<int> allowed = grid.adjacent4(cell);
  allowed.push_back(cell);
  std::sort(allowed.begin(), allowed.end());
  return allowed[static_cast<std::size_t>(rng.bounded(allowed.size()))];
}

void run_hmm(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const World world = make_world(s, seed);
  const GridSpec grid(world.bounds(), s.grid_cell_or_default());
  const Position tower = world.node(s.fingerprint.serving_tower).pos;

  auto rssi_in_cell = [&](int cell, Rng& rng) {
    const double d =
        std::max(distance(grid.cell_center(cell), tower), kMinSensingDistance);
    return rssi_at(d, s.radio, rng);
  };

  // Offline: random walks with raw RSSI, symbolized once the range is known.
  Rng survey_rng(derive_seed(seed, kStreamSurvey));
  std::vector<std::vector<int>> trace_cells(static_cast<std::size_t>(s.fingerprint.n_traces));
  std::vector<std::vector<double>> trace_rssi(static_cast<std::size_t>(s.fingerprint.n_traces));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int tr = 0; tr < s.fingerprint.n_traces; ++tr) {
    int cell = static_cast<int>(survey_rng.bounded(static_cast<std::uint64_t>(grid.n_cells())));
    for (int t = 0; t < s.fingerprint.trace_len; ++t) {
      if (t > 0) cell = walk_step(grid, cell, survey_rng);
      const double rssi = rssi_in_cell(cell, survey_rng);
      trace_cells[static_cast<std::size_t>(tr)].push_back(cell);
      trace_rssi[static_cast<std::size_t>(tr)].push_back(rssi);
      lo = std::min(lo, rssi);
      hi = std::max(hi, rssi);
    }
  }
  const auto binning = fingerprint::RssiBinning::fit(lo, hi, s.fingerprint.bin_width);
  std::vector<fingerprint::Trace> traces(trace_cells.size());
  for (std::size_t tr = 0; tr < traces.size(); ++tr) {
    traces[tr].cells = trace_cells[tr];
    for (double rssi : trace_rssi[tr]) traces[tr].obs.push_back(binning.bin_of(rssi));
  }
  const auto model = fingerprint::hmm_build(traces, grid, binning);

  // Online: a fresh walk tracked from its RSSI symbols alone.
  Rng truth_rng(derive_seed(seed, kStreamTruth));
  Rng measure_rng(derive_seed(seed, kStreamMeasure));
  fingerprint::ViterbiTracker tracker(model);
  int cell = static_cast<int>(truth_rng.bounded(static_cast<std::uint64_t>(grid.n_cells())));
  for (int t = 1; t <= s.n_steps; ++t) {
    if (t > 1) cell = walk_step(grid, cell, truth_rng);
    const int obs = binning.bin_of(rssi_in_cell(cell, measure_rng));
    try {
      tracker.advance(obs);
      add_record(out, "hmm", t, grid.cell_center(cell), tracker.current_position());
    } catch (const Error& e) {
      add_failure(out, "hmm", t, e.what());
    }
  }
}

void run_tracking(const Scenario& s, std::uint64_t seed, RunResult& out) {
  const bool want_pf = s.algorithm == "pf" || s.algorithm == "pf_kf";
  const bool want_kf = s.algorithm == "kf" || s.algorithm == "pf_kf";

  const World world = make_world(s, seed);
  filters::SensorPositions sensors;
  for (const Node& n : world.nodes()) sensors[n.id] = n.pos;

  const filters::TargetModelParams tm{s.target.p_init, s.target.p_out,
                                      s.target.motion_step_sigma};
  filters::TargetState truth;
  truth.present = s.target.start_present;
  truth.pos = {s.target.start_x.value_or(world.width() / 2.0),
               s.target.start_y.value_or(world.height() / 2.0), 0.0};
  truth.vel_x = s.target.vel_x;
  truth.vel_y = s.target.vel_y;

  Rng truth_rng(derive_seed(seed, kStreamTruth));
  Rng measure_rng(derive_seed(seed, kStreamMeasure));
  Rng filter_rng(derive_seed(seed, kStreamFilter));

  filters::ParticleSet ps;
  if (want_pf) {
    ps = s.pf.init_spread_sigma > 0.0
             ? filters::pf_init(s.pf.n_particles, truth.pos, s.pf.init_spread_sigma,
                                filter_rng)
             : filters::pf_init(s.pf.n_particles, world.bounds(), filter_rng);
  }
  filters::LinearGaussianModel kf_model;
  filters::GaussianBelief belief;
  if (want_kf) {
    kf_model = filters::make_position_random_walk(
        s.kf.q, s.kf.r, Eigen::Vector2d(truth.pos.x, truth.pos.y), s.kf.x0_var);
    belief = filters::kf_init(kf_model);
  }

  std::vector<Record> pf_records;
  std::vector<Record> kf_records;
  auto push = [](std::vector<Record>& dst, const char* alg, int t, const Position& truth_pos,
                 const Position& est) {
    dst.push_back({alg, t, truth_pos, est, distance(truth_pos, est)});
  };

  for (int t = 1; t <= s.n_steps; ++t) {
    truth = filters::target_step(truth, tm, truth_rng);

    filters::ObservationVector z;
    z.step = t;
    std::optional<Eigen::Vector2d> gauss_meas;
    if (s.tracking.measurement == MeasurementMode::Binary) {
      for (const auto& [id, pos] : sensors) {
        std::optional<double> d;
        if (truth.present) d = std::max(distance(truth.pos, pos), kMinSensingDistance);
        const auto samples = draw_received_samples(d, s.sensor, measure_rng);
        z.decisions[id] = sensor_decide(samples, s.sensor) ? 1 : 0;
      }
    } else if (truth.present) {
      gauss_meas = Eigen::Vector2d(
          truth.pos.x + measure_rng.normal(0.0, s.tracking.meas_sigma),
          truth.pos.y + measure_rng.normal(0.0, s.tracking.meas_sigma));
    }

    if (want_pf) {
      ps = filters::pf_predict(ps, tm, filter_rng);
      try {
        if (s.tracking.measurement == MeasurementMode::Binary) {
          ps = filters::pf_update(ps, z, sensors, s.sensor);
        } else if (gauss_meas) {
          ps = filters::pf_update_gaussian(ps, *gauss_meas, s.tracking.meas_sigma);
        }
      } catch (const EstimateError& e) {
        // Observation killed every particle; restart from an even cloud.
        for (auto& p : ps.particles) p.weight = 1.0 / ps.particles.size();
        add_failure(out, "pf", t, e.what());
      }
      if (filters::effective_sample_size(ps) <
          s.pf.resample_threshold * ps.particles.size()) {
        ps = filters::pf_resample(ps, filter_rng);
      }
      push(pf_records, "pf", t, truth.pos, filters::pf_estimate(ps).pos);
    }

    if (want_kf) {
      belief = filters::kf_predict(belief, kf_model);
      std::optional<Eigen::Vector2d> meas = gauss_meas;
      if (s.tracking.measurement == MeasurementMode::Binary) {
        meas = filters::firing_centroid(z, sensors);
      }
      if (meas) belief = filters::kf_update(belief, kf_model, *meas);
      push(kf_records, "kf", t, truth.pos, {belief.mean(0), belief.mean(1), 0.0});
    }
  }

  for (auto& r : kf_records) out.records.push_back(std::move(r));
  for (auto& r : pf_records) out.records.push_back(std::move(r));
}

void run_gps(const Scenario& s, std::uint64_t seed, RunResult& out) {
  Rng truth_rng(derive_seed(seed, kStreamTruth));
  Rng measure_rng(derive_seed(seed, kStreamMeasure));

  auto uniform_in_box = [&](Rng& rng) {
    return Position{rng.uniform(0.0, s.world.width), rng.uniform(0.0, s.world.height),
                    rng.uniform(s.gps.z_min, s.gps.z_max)};
  };

  std::vector<Position> statics;
  for (int i = 0; i < s.gps.n_static; ++i) statics.push_back(uniform_in_box(truth_rng));
  std::vector<Position> mobiles;
  for (int i = 0; i < s.gps.n_mobile; ++i) mobiles.push_back(uniform_in_box(truth_rng));

  std::vector<geo::BeaconRegistry> registries(
      static_cast<std::size_t>(s.gps.n_static), geo::BeaconRegistry(s.gps.first_last_only));

  long total_beacons = 0;
  for (int t = 1; t <= s.n_steps; ++t) {
    for (int m = 0; m < s.gps.n_mobile; ++m) {
      Position& pos = mobiles[static_cast<std::size_t>(m)];
      pos.x = std::clamp(pos.x + truth_rng.normal(0.0, s.gps.step_sigma), 0.0, s.world.width);
      pos.y = std::clamp(pos.y + truth_rng.normal(0.0, s.gps.step_sigma), 0.0,
                         s.world.height);
      pos.z = std::clamp(pos.z + truth_rng.normal(0.0, s.gps.step_sigma), s.gps.z_min,
                         s.gps.z_max);
      const geo::BeaconMessage beacon{m, pos, t};
      ++total_beacons;
      for (int st = 0; st < s.gps.n_static; ++st) {
        if (distance(statics[static_cast<std::size_t>(st)], pos) <= s.world.comm_range) {
          registries[static_cast<std::size_t>(st)].receive(beacon);
        }
      }
    }
  }

  for (int st = 0; st < s.gps.n_static; ++st) {
    const Position& truth = statics[static_cast<std::size_t>(st)];
    std::vector<geo::SphereObservation> obs;
    for (const auto& [sender, kept] : registries[static_cast<std::size_t>(st)].heard()) {
      for (const geo::BeaconMessage& m : kept) {
        obs.push_back({m.pos, distance(truth, m.pos) +
                                  measure_rng.normal(0.0, s.gps.radius_noise_sigma)});
      }
    }
    try {
      add_record(out, "gps_sphere", st, truth, geo::sphere_locate(obs));
    } catch (const Error& e) {
      add_failure(out, "gps_sphere", st, e.what());
    }
  }
  out.summary["gps_sphere"].beacon_overhead =
      geo::beacon_overhead(total_beacons, s.gps.n_mobile);
}

}  // namespace

RunResult run_single(const Scenario& s, std::uint64_t seed) {
  s.validate();
  RunResult out;
  out.scenario_name = s.name;
  out.scenario_hash = s.content_hash;
  out.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  if (s.algorithm == "dvhop") {
    run_dvhop(s, seed, out);
  } else if (s.algorithm == "rocrssi") {
    run_rocrssi(s, seed, out);
  } else if (s.algorithm == "cellid") {
    run_cellid(s, seed, out);
  } else if (s.algorithm == "knn") {
    run_knn(s, seed, out);
  } else if (s.algorithm == "cellsense") {
    run_cellsense(s, seed, out);
  } else if (s.algorithm == "hmm") {
    run_hmm(s, seed, out);
  } else if (s.algorithm == "pf" || s.algorithm == "kf" || s.algorithm == "pf_kf") {
    run_tracking(s, seed, out);
  } else if (s.algorithm == "gps_sphere") {
    run_gps(s, seed, out);
  } else {
    throw ConfigError("unknown algorithm \"" + s.algorithm + "\"");
  }
  const auto stop = std::chrono::steady_clock::now();

  // Preserve any overhead figures attached by the runner.
  std::map<std::string, std::optional<double>> overheads;
  for (const auto& [name, summary] : out.summary) overheads[name] = summary.beacon_overhead;
  out.summary.clear();
  compute_summaries(out);
  for (auto& [name, overhead] : overheads) {
    if (overhead) out.summary[name].beacon_overhead = overhead;
  }

  out.runtime_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
          .count();
  return out;
}

std::vector<RunResult> run_scenario(const Scenario& s) {
  std::vector<RunResult> results;
  results.reserve(s.seeds.size());
  for (std::uint64_t seed : s.seeds) results.push_back(run_single(s, seed));
  return results;
}

double rms_error(std::span<const Position> estimates, std::span<const Position> truth) {
  if (estimates.size() != truth.size() || estimates.empty()) {
    throw ContractError("rms_error needs equally many estimates and truths (>= 1)");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = distance(estimates[i], truth[i]);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(estimates.size()));
}

}  // namespace wsnloc::harness
