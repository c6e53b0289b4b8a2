#include "wsnloc/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsnloc {

void PathLossParams::validate() const {
  if (!(exponent > 0.0)) throw ConfigError("path-loss exponent must be positive");
  if (shadow_sigma_db < 0.0) throw ConfigError("shadow_sigma_db must be non-negative");
}

void SensorParams::validate() const {
  if (!(e_t0_sq > 0.0)) throw ConfigError("e_t0_sq must be positive");
  if (!(sigma_n_sq > 0.0)) throw ConfigError("sigma_n_sq must be positive");
  if (m_samples < 1) throw ConfigError("m_samples must be at least 1");
}

double energy_per_sample(double d, const SensorParams& params) {
  if (!(d > 0.0)) {
    throw DomainError("energy_per_sample: distance must be positive");
  }
  return params.e_t0_sq / (d * d);
}

double mean_rssi_at(double d, const PathLossParams& params) {
  const double dc = std::max(d, kMinPathLossDistance);
  return params.ref_power_dbm - 10.0 * params.exponent * std::log10(dc);
}

double rssi_at(double d, const PathLossParams& params, Rng& rng) {
  double v = mean_rssi_at(d, params);
  if (params.shadow_sigma_db > 0.0) {
    v += rng.normal(0.0, params.shadow_sigma_db);
  }
  return v;
}

double distance_for_mean_rssi(double rssi_dbm, const PathLossParams& params) {
  return std::pow(10.0, (params.ref_power_dbm - rssi_dbm) / (10.0 * params.exponent));
}

namespace {

// P[mean energy of m samples > threshold] with the given per-sample
// variance. m == 1 uses the exact Gaussian-square tail; larger m treats the
// averaged statistic as Gaussian with matching mean and variance.
double firing_probability(double per_sample_variance, const SensorParams& params) {
  if (params.threshold <= 0.0) return 1.0;  // the statistic is non-negative
  const double var = per_sample_variance;
  if (params.m_samples == 1) {
    // P[g^2 > t] = 2 Phi-bar(sqrt(t)/sigma) = erfc(sqrt(t / (2 var)))
    return std::erfc(std::sqrt(params.threshold / (2.0 * var)));
  }
  // Mean energy has mean var and variance 2 var^2 / m.
  const double z = (params.threshold - var) / (var * std::sqrt(2.0 / params.m_samples));
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

double false_alarm_probability(const SensorParams& params) {
  return firing_probability(params.sigma_n_sq, params);
}

double detection_probability(double d, const SensorParams& params) {
  const double var = params.sigma_n_sq + energy_per_sample(d, params);  // throws d <= 0
  return firing_probability(var, params);
}

namespace {

double gaussian_pdf(double y, double variance) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::exp(-(y * y) / (2.0 * variance)) / std::sqrt(kTwoPi * variance);
}

}  // namespace

double noise_sample_pdf(double y, const SensorParams& params) {
  return gaussian_pdf(y, params.sigma_n_sq);
}

double target_sample_pdf(double y, double d, const SensorParams& params) {
  return gaussian_pdf(y, params.sigma_n_sq + energy_per_sample(d, params));
}

std::vector<double> draw_received_samples(std::optional<double> target_distance,
                                          const SensorParams& params, Rng& rng) {
  double var = params.sigma_n_sq;
  if (target_distance) {
    var += energy_per_sample(*target_distance, params);
  }
  const double sigma = std::sqrt(var);
  std::vector<double> samples(static_cast<std::size_t>(params.m_samples));
  for (double& s : samples) s = rng.normal(0.0, sigma);
  return samples;
}

bool sensor_decide(std::span<const double> samples, const SensorParams& params) {
  if (static_cast<int>(samples.size()) != params.m_samples) {
    throw ContractError("sensor_decide: expected " + std::to_string(params.m_samples) +
                        " samples, got " + std::to_string(samples.size()));
  }
  double energy = 0.0;
  for (double s : samples) energy += s * s;
  energy /= static_cast<double>(samples.size());
  return energy > params.threshold;
}

std::pair<NodeId, NodeId> RssiTable::key(NodeId a, NodeId b) {
  return {std::min(a, b), std::max(a, b)};
}

void RssiTable::set(NodeId a, NodeId b, double dbm) { values_[key(a, b)] = dbm; }

std::optional<double> RssiTable::get(NodeId a, NodeId b) const {
  auto it = values_.find(key(a, b));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double RssiTable::at(NodeId a, NodeId b) const {
  auto v = get(a, b);
  if (!v) {
    throw NotFoundError("no RSSI measurement between nodes " + std::to_string(a) +
                        " and " + std::to_string(b));
  }
  return *v;
}

RssiTable measure_pairwise_rssi(const World& world, std::span<const NodeId> ids,
                                const PathLossParams& params, Rng& rng) {
  RssiTable table;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double d = distance(world.node(ids[i]).pos, world.node(ids[j]).pos);
      table.set(ids[i], ids[j], rssi_at(d, params, rng));
    }
  }
  return table;
}

}  // namespace wsnloc
