// Microbenchmarks for the hot paths: hop flooding, multilateration, particle
// and Kalman steps, ring accumulation, fingerprint matching and decoding.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <map>
#include <random>
#include <vector>

#include "wsnloc/filters.hpp"
#include "wsnloc/fingerprint.hpp"
#include "wsnloc/geo.hpp"
#include "wsnloc/propagation.hpp"
#include "wsnloc/rangefree.hpp"
#include "wsnloc/rng.hpp"
#include "wsnloc/world.hpp"

using namespace wsnloc;

namespace {

World medium_world(int n_anchors, int n_unknown) {
  return build_world(20.0, 20.0, 4.0, n_anchors, n_unknown, 7);
}

void bm_flood_hops(benchmark::State& state) {
  const World w = medium_world(static_cast<int>(state.range(0)), 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rangefree::flood_hops(w));
  }
}
BENCHMARK(bm_flood_hops)->Arg(5)->Arg(25);

void bm_dvhop_locate(benchmark::State& state) {
  const World w = medium_world(static_cast<int>(state.range(0)), 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rangefree::dvhop_locate(w));
  }
}
BENCHMARK(bm_dvhop_locate)->Arg(5)->Arg(25);

void bm_rocrssi_locate(benchmark::State& state) {
  Rng rng(11);
  std::vector<rangefree::Ring> rings;
  for (int i = 0; i < 12; ++i) {
    const double inner = 1.0 + rng.uniform() * 3.0;
    rings.push_back({{rng.uniform() * 20.0, rng.uniform() * 20.0, 0.0},
                     inner, inner + 1.0 + rng.uniform() * 2.0});
  }
  for (auto _ : state) {
    rangefree::GridAccumulator acc(Rect{0, 0, 20, 20}, 0.2);
    benchmark::DoNotOptimize(rangefree::rocrssi_locate(rings, acc));
  }
}
BENCHMARK(bm_rocrssi_locate);

void bm_detection_probability(benchmark::State& state) {
  SensorParams sp;
  sp.m_samples = static_cast<int>(state.range(0));
  double d = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detection_probability(d, sp));
    d = d < 8.0 ? d + 0.001 : 0.5;
  }
}
BENCHMARK(bm_detection_probability)->Arg(1)->Arg(4);

void bm_pf_step_binary(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SensorParams sp;
  filters::SensorPositions sensors;
  for (int i = 0; i < 16; ++i) {
    sensors[i] = {1.0 + 4.0 * (i % 4), 1.0 + 4.0 * (i / 4), 0.0};
  }
  filters::TargetModelParams dyn;
  dyn.p_init = 1.0;
  dyn.p_out = 0.0;
  dyn.motion_step_sigma = 0.1;
  filters::ObservationVector z;
  for (int i = 0; i < 16; ++i) z.decisions[i] = (i % 3 == 0) ? 1 : 0;
  Rng rng(13);
  filters::ParticleSet ps = filters::pf_init(n, Rect{0, 0, 20, 20}, rng);
  for (auto _ : state) {
    ps = filters::pf_predict(ps, dyn, rng);
    ps = filters::pf_update(ps, z, sensors, sp);
    if (filters::effective_sample_size(ps) < 0.5 * n) ps = filters::pf_resample(ps, rng);
    benchmark::DoNotOptimize(filters::pf_estimate(ps));
  }
}
BENCHMARK(bm_pf_step_binary)->Arg(50)->Arg(500);

void bm_kf_update(benchmark::State& state) {
  const filters::LinearGaussianModel m =
      filters::make_position_random_walk(0.05, 1.0, {10.0, 10.0}, 1.0);
  filters::GaussianBelief b = filters::kf_init(m);
  Rng rng(17);
  for (auto _ : state) {
    b = filters::kf_predict(b, m);
    Eigen::VectorXd z(2);
    z << rng.normal(10.0, 1.0), rng.normal(10.0, 1.0);
    b = filters::kf_update(b, m, z);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(bm_kf_update);

void bm_knn_locate(benchmark::State& state) {
  std::vector<fingerprint::SurveySample> survey;
  Rng rng(19);
  for (int p = 0; p < 200; ++p) {
    const double x = (p % 20) * 1.0, y = (p / 20) * 1.0;
    for (int tower = 0; tower < 6; ++tower) {
      survey.push_back({0.0, x, y, tower, -50.0 - rng.uniform() * 40.0});
    }
  }
  const fingerprint::FingerprintDb db = fingerprint::build_fingerprint_db(survey);
  const std::vector<double> reading = {-60, -70, -80, -65, -75, -85};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fingerprint::knn_locate(db, reading, 4));
  }
}
BENCHMARK(bm_knn_locate);

void bm_viterbi_advance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  fingerprint::HmmModel m;
  m.grid = GridSpec(Rect{0, 0, static_cast<double>(n), 1.0}, 1.0);
  m.binning = fingerprint::RssiBinning{-110.0, 5.0, 8};
  m.A = Eigen::MatrixXd(n, n);
  m.B = Eigen::MatrixXd(n, 8);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += (m.A(i, j) = u(gen));
    m.A.row(i) /= s;
    s = 0.0;
    for (int j = 0; j < 8; ++j) s += (m.B(i, j) = u(gen));
    m.B.row(i) /= s;
  }
  m.pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  fingerprint::ViterbiTracker tracker(m);
  int obs = 0;
  for (auto _ : state) {
    tracker.advance(obs);
    obs = (obs + 3) % 8;
    benchmark::DoNotOptimize(tracker.current_state());
  }
}
BENCHMARK(bm_viterbi_advance)->Arg(25)->Arg(100);

void bm_sphere_locate(benchmark::State& state) {
  Rng rng(29);
  const Position truth{5.0, 6.0, 2.0};
  std::vector<geo::SphereObservation> obs;
  for (int i = 0; i < 6; ++i) {
    const Position c{rng.uniform() * 10.0, rng.uniform() * 10.0, rng.uniform() * 5.0};
    obs.push_back({c, distance(c, truth)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(geo::sphere_locate(obs));
  }
}
BENCHMARK(bm_sphere_locate);

}  // namespace

BENCHMARK_MAIN();
