#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/propagation.hpp"

using namespace wsnloc;

TEST_SUITE_BEGIN("propagation");

TEST_CASE("signal energy follows the inverse-square law") {
  SensorParams p;  // e_t0_sq = 4
  CHECK(energy_per_sample(1.0, p) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(energy_per_sample(2.0, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(energy_per_sample(1e6, p) < 1e-11);
  CHECK_THROWS_AS(energy_per_sample(0.0, p), DomainError);
  CHECK_THROWS_AS(energy_per_sample(-1.0, p), DomainError);
}

TEST_CASE("energy times squared distance is constant") {
  SensorParams p;
  p.e_t0_sq = 7.5;
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    double d = 0.05 + rng.uniform() * 50.0;
    CHECK(energy_per_sample(d, p) * d * d == doctest::Approx(7.5).epsilon(1e-12));
  }
}

TEST_CASE("mean rssi matches the log-distance law") {
  PathLossParams p;  // ref -40 dBm at 1 m, exponent 2
  Rng rng(1);
  CHECK(rssi_at(1.0, p, rng) == doctest::Approx(-40.0).epsilon(1e-12));
  CHECK(rssi_at(10.0, p, rng) == doctest::Approx(-60.0).epsilon(1e-12));
  // The clamp keeps coincident nodes finite.
  CHECK(mean_rssi_at(0.0001, p) == mean_rssi_at(kMinPathLossDistance, p));
  CHECK(std::isfinite(mean_rssi_at(1e-300, p)));
}

TEST_CASE("zero shadowing consumes no randomness") {
  PathLossParams p;
  Rng used(77), control(77);
  (void)rssi_at(3.0, p, used);
  CHECK(used.next_u64() == control.next_u64());
}

TEST_CASE("shadowed rssi is centred on the deterministic mean") {
  PathLossParams p;
  p.shadow_sigma_db = 4.0;
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rssi_at(10.0, p, rng);
  CHECK(sum / n == doctest::Approx(-60.0).epsilon(0.002));  // within 0.1 dBm
}

TEST_CASE("distance_for_mean_rssi inverts mean_rssi_at") {
  PathLossParams p;
  p.exponent = 2.7;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    double d = 0.01 + rng.uniform() * 100.0;
    CHECK(distance_for_mean_rssi(mean_rssi_at(d, p), p) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("without shadowing rssi orders nodes by distance") {
  PathLossParams p;
  Rng rng(3), none(0);
  for (int i = 0; i < 200; ++i) {
    double d1 = 0.01 + rng.uniform() * 30.0;
    double d2 = 0.01 + rng.uniform() * 30.0;
    if (d1 == d2) continue;
    if (d1 > d2) std::swap(d1, d2);  // d1 < d2
    CHECK(rssi_at(d1, p, none) > rssi_at(d2, p, none));
  }
}

TEST_CASE("false alarm probability is the noise tail") {
  SensorParams p;  // sigma_n_sq = 1, threshold = 2, m = 1
  // With one sample the firing event is y^2 > t; the oracle integrates the
  // noise density tail by quadrature.
  double oracle =
      2.0 * testutil::simpson([&](double y) { return noise_sample_pdf(y, p); },
                              std::sqrt(p.threshold), 40.0, 200000);
  CHECK(false_alarm_probability(p) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("detection probability matches tail quadrature for one sample") {
  SensorParams p;  // sigma_n_sq = 1, e_t0_sq = 4, threshold = 2, m = 1
  const double d = 1.0;
  double oracle =
      2.0 * testutil::simpson([&](double y) { return target_sample_pdf(y, d, p); },
                              std::sqrt(p.threshold), 60.0, 400000);
  CHECK(detection_probability(d, p) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("non-positive threshold always fires") {
  SensorParams p;
  p.threshold = 0.0;
  for (double d : {0.1, 1.0, 100.0}) CHECK(detection_probability(d, p) == 1.0);
  CHECK(false_alarm_probability(p) == 1.0);
  p.threshold = -3.0;
  CHECK(detection_probability(5.0, p) == 1.0);
}

TEST_CASE("detection probability decays to the false alarm floor") {
  SensorParams p;
  CHECK(detection_probability(1e9, p) ==
        doctest::Approx(false_alarm_probability(p)).epsilon(1e-12));
}

TEST_CASE("detection probability is non-increasing and within [P_FA, 1]") {
  for (int m : {1, 4}) {
    SensorParams p;
    p.m_samples = m;
    const double floor = false_alarm_probability(p);
    double prev = 1.0;
    for (double d = 0.05; d < 25.0; d += 0.05) {
      double pd = detection_probability(d, p);
      CHECK(pd <= prev + 1e-12);
      CHECK(pd >= floor - 1e-12);
      CHECK(pd <= 1.0);
      prev = pd;
    }
  }
}

TEST_CASE("averaged-statistic approximation converges on the exact chi-square tail") {
  // With m samples the exact firing probability is the chi-square(m) tail
  // P[X > m * t / var] where X = sum(y_i^2) / var; for even m that tail has
  // the closed form e^(-x/2) * sum_{k<m/2} (x/2)^k / k!. The Gaussian
  // treatment of the averaged statistic carries an O(1/sqrt(m)) error, so the
  // worst-case gap over a distance sweep must roughly halve per 4x in m.
  auto exact_tail = [](double x, int m) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < m / 2; ++k) {
      term *= (x / 2.0) / k;
      sum += term;
    }
    return std::exp(-x / 2.0) * sum;
  };
  auto worst_gap = [&](int m) {
    SensorParams p;
    p.m_samples = m;
    double worst = 0.0;
    for (double d = 0.05; d < 25.0; d += 0.05) {
      const double var = p.sigma_n_sq + energy_per_sample(d, p);
      const double x = m * p.threshold / var;
      worst = std::max(worst, std::abs(detection_probability(d, p) - exact_tail(x, m)));
    }
    return worst;
  };
  const double g4 = worst_gap(4), g16 = worst_gap(16), g64 = worst_gap(64);
  CHECK(g4 < 0.10);
  CHECK(g16 < 0.05);
  CHECK(g64 < 0.025);
  CHECK(g16 < g4);
  CHECK(g64 < g16);
}

TEST_CASE("sensor_decide thresholds the mean energy") {
  SensorParams p;
  p.m_samples = 3;
  p.threshold = 1.0;
  std::vector<double> silent = {0.0, 0.0, 0.0};
  CHECK(!sensor_decide(silent, p));
  std::vector<double> loud = {3.0, -2.0, 1.0};  // mean energy 14/3
  CHECK(sensor_decide(loud, p));
  std::vector<double> wrong_count = {1.0, 1.0};
  CHECK_THROWS_AS(sensor_decide(wrong_count, p), ContractError);
}

TEST_CASE("empirical firing rate agrees with detection_probability") {
  SensorParams p;  // m = 1: the analytic value is exact
  Rng rng(555);
  const int trials = 100000;
  int fired = 0;
  for (int i = 0; i < trials; ++i) {
    auto samples = draw_received_samples(1.0, p, rng);
    if (sensor_decide(samples, p)) ++fired;
  }
  double rate = static_cast<double>(fired) / trials;
  CHECK(std::abs(rate - detection_probability(1.0, p)) < 0.01);
}

TEST_CASE("empirical false alarm rate agrees with false_alarm_probability") {
  SensorParams p;
  Rng rng(556);
  const int trials = 100000;
  int fired = 0;
  for (int i = 0; i < trials; ++i) {
    auto samples = draw_received_samples(std::nullopt, p, rng);
    if (sensor_decide(samples, p)) ++fired;
  }
  CHECK(std::abs(static_cast<double>(fired) / trials - false_alarm_probability(p)) < 0.01);
}

TEST_CASE("sample densities integrate to one") {
  SensorParams p;
  double noise_mass = testutil::simpson(
      [&](double y) { return noise_sample_pdf(y, p); }, -20.0, 20.0, 100000);
  CHECK(noise_mass == doctest::Approx(1.0).epsilon(1e-6));
  double target_mass = testutil::simpson(
      [&](double y) { return target_sample_pdf(y, 1.0, p); }, -60.0, 60.0, 200000);
  CHECK(target_mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("received samples have the modelled variance") {
  SensorParams p;  // at d = 1: variance 1 + 4 = 5
  p.m_samples = 1;
  Rng rng(9001);
  const int n = 100000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = draw_received_samples(1.0, p, rng);
    REQUIRE(s.size() == 1);
    sq += s[0] * s[0];
  }
  CHECK(sq / n == doctest::Approx(5.0).epsilon(0.03));
}

TEST_CASE("draw_received_samples yields exactly m_samples values") {
  SensorParams p;
  p.m_samples = 7;
  Rng rng(1);
  CHECK(draw_received_samples(2.0, p, rng).size() == 7);
  CHECK(draw_received_samples(std::nullopt, p, rng).size() == 7);
}

TEST_CASE("parameter validation rejects nonsense") {
  PathLossParams pl;
  pl.exponent = 0.0;
  CHECK_THROWS_AS(pl.validate(), ConfigError);
  pl = {};
  pl.shadow_sigma_db = -1.0;
  CHECK_THROWS_AS(pl.validate(), ConfigError);
  SensorParams sp;
  sp.e_t0_sq = 0.0;
  CHECK_THROWS_AS(sp.validate(), ConfigError);
  sp = {};
  sp.sigma_n_sq = -2.0;
  CHECK_THROWS_AS(sp.validate(), ConfigError);
  sp = {};
  sp.m_samples = 0;
  CHECK_THROWS_AS(sp.validate(), ConfigError);
}

TEST_CASE("rssi table is symmetric in its key") {
  RssiTable t;
  t.set(3, 1, -55.0);
  CHECK(t.get(1, 3).value() == -55.0);
  CHECK(t.get(3, 1).value() == -55.0);
  CHECK(!t.get(1, 2).has_value());
  CHECK(t.at(1, 3) == -55.0);
  CHECK_THROWS_AS(t.at(1, 2), NotFoundError);
  t.set(1, 3, -60.0);  // overwrite through the mirrored key
  CHECK(t.at(3, 1) == -60.0);
  CHECK(t.size() == 1);
}

TEST_CASE("pairwise measurement covers every pair and matches the model") {
  World w = build_world(10, 10, 3, 4, 0, 21);
  std::vector<NodeId> ids = {0, 1, 2, 3};
  PathLossParams p;  // no shadowing: values must equal the deterministic mean
  Rng rng(5);
  RssiTable t = measure_pairwise_rssi(w, ids, p, rng);
  CHECK(t.size() == 6);
  for (NodeId a : ids)
    for (NodeId b : ids) {
      if (a >= b) continue;
      double d = distance(w.node(a).pos, w.node(b).pos);
      CHECK(t.at(a, b) == doctest::Approx(mean_rssi_at(d, p)).epsilon(1e-12));
    }
}

TEST_SUITE_END();
