#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsnloc/rng.hpp"
#include "wsnloc/world.hpp"

namespace wsnloc {

/// Log-distance path loss with optional Gaussian shadowing, in dBm.
struct PathLossParams {
  double ref_power_dbm = -40.0;  // received power at 1 m
  double exponent = 2.0;         // path-loss exponent, > 0
  double shadow_sigma_db = 0.0;  // shadowing std dev, >= 0

  void validate() const;
};

/// Binary energy-detector parameters shared by every sensing node.
struct SensorParams {
  double e_t0_sq = 4.0;     // target signal energy per sample at 1 m
  double sigma_n_sq = 1.0;  // noise energy per sample
  int m_samples = 1;        // samples averaged per decision
  double threshold = 2.0;   // detector fires when mean energy exceeds this

  void validate() const;
};

struct RssiReading {
  NodeId source_id = 0;
  double value_dbm = 0.0;
};

/// Distances below this are clamped before evaluating path loss, keeping the
/// log finite for coincident nodes.
inline constexpr double kMinPathLossDistance = 0.01;

/// Target signal energy per sample at distance d: e_t0_sq / d^2. Strictly
/// decreasing; throws DomainError for d <= 0 (the model diverges there).
double energy_per_sample(double d, const SensorParams& params);

/// Mean received power at distance d: ref_power - 10 * exponent * log10(d),
/// with d clamped to kMinPathLossDistance.
double mean_rssi_at(double d, const PathLossParams& params);

/// Mean received power plus one shadowing draw. With shadow_sigma_db == 0 no
/// randomness is consumed and the map is strictly decreasing in d.
double rssi_at(double d, const PathLossParams& params, Rng& rng);

/// Inverse of mean_rssi_at: the distance whose mean received power equals
/// rssi_dbm.
double distance_for_mean_rssi(double rssi_dbm, const PathLossParams& params);

/// Probability that the energy detector fires when only noise is present
/// (per-sample variance sigma_n_sq).
double false_alarm_probability(const SensorParams& params);

/// Probability that the energy detector fires with a target at distance d
/// (per-sample variance sigma_n_sq + energy_per_sample(d)). Non-increasing
/// in d, bounded below by false_alarm_probability. For m_samples == 1 the
/// tail is exact; for larger m the averaged statistic is treated as
/// Gaussian. Throws DomainError for d <= 0.
double detection_probability(double d, const SensorParams& params);

/// Density of a single received sample under the noise-only hypothesis:
/// zero-mean Gaussian with variance sigma_n_sq.
double noise_sample_pdf(double y, const SensorParams& params);

/// Density of a single received sample with a target at distance d:
/// zero-mean Gaussian with variance sigma_n_sq + energy_per_sample(d).
double target_sample_pdf(double y, double d, const SensorParams& params);

/// Draws the m_samples received values a sensor sees in one decision
/// interval. target_distance empty means no target (noise only).
std::vector<double> draw_received_samples(std::optional<double> target_distance,
                                          const SensorParams& params, Rng& rng);

/// Threshold test on the mean energy of exactly m_samples received values:
/// returns true (target present) iff mean of squares exceeds the threshold.
bool sensor_decide(std::span<const double> samples, const SensorParams& params);

/// Symmetric store of pairwise RSSI measurements keyed by node id pairs.
class RssiTable {
 public:
  void set(NodeId a, NodeId b, double dbm);
  std::optional<double> get(NodeId a, NodeId b) const;
  double at(NodeId a, NodeId b) const;  // NotFoundError when absent
  std::size_t size() const { return values_.size(); }

 private:
  static std::pair<NodeId, NodeId> key(NodeId a, NodeId b);
  std::map<std::pair<NodeId, NodeId>, double> values_;
};

/// Measures RSSI between every unordered pair of the given nodes, in the
/// order the ids are listed (i before j draws first). One shadowing draw per
/// pair.
RssiTable measure_pairwise_rssi(const World& world, std::span<const NodeId> ids,
                                const PathLossParams& params, Rng& rng);

}  // namespace wsnloc
