#include "wsnloc/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsnloc::filters {

void TargetModelParams::validate() const {
  if (p_init < 0.0 || p_init > 1.0) throw ConfigError("p_init must lie in [0,1]");
  if (p_out < 0.0 || p_out > 1.0) throw ConfigError("p_out must lie in [0,1]");
  if (motion_step_sigma < 0.0) throw ConfigError("motion_step_sigma must be non-negative");
}

TargetState target_step(const TargetState& state, const TargetModelParams& params, Rng& rng) {
  TargetState next = state;
  const double u = rng.uniform();
  if (!state.present) {
    next.present = u < params.p_init;
  } else {
    next.present = !(u < params.p_out);
  }
  if (next.present) {
    next.pos.x += state.vel_x + rng.normal(0.0, params.motion_step_sigma);
    next.pos.y += state.vel_y + rng.normal(0.0, params.motion_step_sigma);
  }
  return next;
}

namespace {

double decision_factor(int z, double p_fire, const char* what) {
  if (z == 1) return p_fire;
  if (z == 0) return 1.0 - p_fire;
  throw ContractError(std::string(what) + ": decisions must be 0 or 1");
}

}  // namespace

double obs_likelihood(const ObservationVector& z, const TargetState& hypo,
                      const SensorPositions& sensors, const SensorParams& params) {
  if (!hypo.present) {
    throw ContractError("obs_likelihood evaluates the target-present hypothesis");
  }
  double lik = 1.0;
  for (const auto& [id, decision] : z.decisions) {
    auto it = sensors.find(id);
    if (it == sensors.end()) {
      throw NotFoundError("no position for sensor " + std::to_string(id));
    }
    const double d = std::max(distance(hypo.pos, it->second), 1e-6);
    lik *= decision_factor(decision, detection_probability(d, params), "obs_likelihood");
  }
  return lik;
}

double noise_likelihood(const ObservationVector& z, const SensorParams& params) {
  const double p_fa = false_alarm_probability(params);
  double lik = 1.0;
  for (const auto& [id, decision] : z.decisions) {
    lik *= decision_factor(decision, p_fa, "noise_likelihood");
  }
  return lik;
}

ParticleSet pf_init(int n, const Rect& bounds, Rng& rng) {
  if (n < 1) throw ConfigError("particle count must be at least 1");
  ParticleSet ps;
  ps.particles.reserve(static_cast<std::size_t>(n));
  const double w = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    Particle p;
    p.state.present = true;
    p.state.pos.x = rng.uniform(bounds.x0, bounds.x0 + bounds.width);
    p.state.pos.y = rng.uniform(bounds.y0, bounds.y0 + bounds.height);
    p.weight = w;
    ps.particles.push_back(p);
  }
  return ps;
}

ParticleSet pf_init(int n, const Position& center, double spread_sigma, Rng& rng) {
  if (n < 1) throw ConfigError("particle count must be at least 1");
  if (spread_sigma < 0.0) throw ConfigError("spread_sigma must be non-negative");
  ParticleSet ps;
  ps.particles.reserve(static_cast<std::size_t>(n));
  const double w = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    Particle p;
    p.state.present = true;
    p.state.pos.x = center.x + rng.normal(0.0, spread_sigma);
    p.state.pos.y = center.y + rng.normal(0.0, spread_sigma);
    p.weight = w;
    ps.particles.push_back(p);
  }
  return ps;
}

ParticleSet pf_predict(const ParticleSet& ps, const TargetModelParams& params, Rng& rng) {
  if (ps.particles.empty()) throw ContractError("pf_predict: empty particle set");
  ParticleSet out;
  out.step = ps.step + 1;
  out.particles.reserve(ps.particles.size());
  for (const Particle& p : ps.particles) {
    out.particles.push_back({target_step(p.state, params, rng), p.weight});
  }
  return out;
}

namespace {

ParticleSet reweighted(const ParticleSet& ps, const std::vector<double>& likelihood,
                       const char* what) {
  double total = 0.0;
  ParticleSet out = ps;
  for (std::size_t i = 0; i < out.particles.size(); ++i) {
    out.particles[i].weight *= likelihood[i];
    total += out.particles[i].weight;
  }
  if (!(total > 0.0)) {
    throw EstimateError(std::string(what) +
                        ": every particle has zero posterior weight; "
                        "the cloud no longer explains the observation");
  }
  for (Particle& p : out.particles) p.weight /= total;
  return out;
}

}  // namespace

ParticleSet pf_update(const ParticleSet& ps, const ObservationVector& z,
                      const SensorPositions& sensors, const SensorParams& params) {
  if (ps.particles.empty()) throw ContractError("pf_update: empty particle set");
  std::vector<double> lik(ps.particles.size());
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    const TargetState& s = ps.particles[i].state;
    lik[i] = s.present ? obs_likelihood(z, s, sensors, params) : noise_likelihood(z, params);
  }
  return reweighted(ps, lik, "pf_update");
}

ParticleSet pf_update_gaussian(const ParticleSet& ps, const Eigen::Vector2d& z,
                               double meas_sigma) {
  if (ps.particles.empty()) throw ContractError("pf_update_gaussian: empty particle set");
  if (!(meas_sigma > 0.0)) throw ConfigError("meas_sigma must be positive");
  const double inv2var = 1.0 / (2.0 * meas_sigma * meas_sigma);
  std::vector<double> lik(ps.particles.size());
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    const Position& p = ps.particles[i].state.pos;
    const double dx = z(0) - p.x;
    const double dy = z(1) - p.y;
    // Common Gaussian normalization constant cancels in the renormalization.
    lik[i] = std::exp(-(dx * dx + dy * dy) * inv2var);
  }
  return reweighted(ps, lik, "pf_update_gaussian");
}

ParticleSet pf_resample(const ParticleSet& ps, Rng& rng) {
  if (ps.particles.empty()) throw ContractError("pf_resample: empty particle set");
  const std::size_t n = ps.particles.size();
  const double w = 1.0 / static_cast<double>(n);
  ParticleSet out;
  out.step = ps.step;
  out.particles.reserve(n);

  double cumulative = ps.particles[0].weight;
  std::size_t idx = 0;
  const double u0 = rng.uniform() * w;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = u0 + static_cast<double>(j) * w;
    while (u > cumulative && idx + 1 < n) {
      ++idx;
      cumulative += ps.particles[idx].weight;
    }
    out.particles.push_back({ps.particles[idx].state, w});
  }
  return out;
}

double effective_sample_size(const ParticleSet& ps) {
  double sum_sq = 0.0;
  for (const Particle& p : ps.particles) sum_sq += p.weight * p.weight;
  if (!(sum_sq > 0.0)) throw EstimateError("effective_sample_size: all weights zero");
  return 1.0 / sum_sq;
}

PfEstimate pf_estimate(const ParticleSet& ps) {
  if (ps.particles.empty()) throw ContractError("pf_estimate: empty particle set");
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (const Particle& p : ps.particles) {
    wx += p.weight * p.state.pos.x;
    wy += p.weight * p.state.pos.y;
    wsum += p.weight;
  }
  if (!(wsum > 0.0)) throw EstimateError("pf_estimate: all weights zero");
  PfEstimate est;
  est.pos = {wx / wsum, wy / wsum, 0.0};
  double var = 0.0;
  for (const Particle& p : ps.particles) {
    const double dx = p.state.pos.x - est.pos.x;
    const double dy = p.state.pos.y - est.pos.y;
    var += p.weight * (dx * dx + dy * dy);
  }
  est.spread = std::sqrt(var / wsum);
  return est;
}

std::optional<Eigen::Vector2d> firing_centroid(const ObservationVector& z,
                                               const SensorPositions& sensors) {
  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (const auto& [id, decision] : z.decisions) {
    if (decision != 1) continue;
    auto it = sensors.find(id);
    if (it == sensors.end()) {
      throw NotFoundError("no position for sensor " + std::to_string(id));
    }
    sx += it->second.x;
    sy += it->second.y;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return Eigen::Vector2d(sx / n, sy / n);
}

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-9)) {
    throw ConfigError(std::string(name) + " must be symmetric");
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

void LinearGaussianModel::validate() const {
  const auto n = F.rows();
  if (F.cols() != n || n == 0) throw ConfigError("F must be square and non-empty");
  if (Q.rows() != n || Q.cols() != n) throw ConfigError("Q must match the state dimension");
  if (H.cols() != n || H.rows() == 0) throw ConfigError("H must map the state dimension");
  const auto m = H.rows();
  if (R.rows() != m || R.cols() != m) throw ConfigError("R must match the measurement dimension");
  if (x0_mean.size() != n) throw ConfigError("x0_mean must match the state dimension");
  if (x0_cov.rows() != n || x0_cov.cols() != n) {
    throw ConfigError("x0_cov must match the state dimension");
  }
  require_symmetric(Q, "Q");
  require_symmetric(R, "R");
  require_symmetric(x0_cov, "x0_cov");
}

LinearGaussianModel make_position_random_walk(double q, double r,
                                              const Eigen::Vector2d& x0,
                                              double x0_var) {
  if (q < 0.0 || r < 0.0 || x0_var < 0.0) {
    throw ConfigError("noise variances must be non-negative");
  }
  LinearGaussianModel m;
  m.F = Eigen::Matrix2d::Identity();
  m.H = Eigen::Matrix2d::Identity();
  m.Q = q * Eigen::Matrix2d::Identity();
  m.R = r * Eigen::Matrix2d::Identity();
  m.x0_mean = x0;
  m.x0_cov = x0_var * Eigen::Matrix2d::Identity();
  return m;
}

GaussianBelief kf_init(const LinearGaussianModel& m) {
  m.validate();
  return {m.x0_mean, m.x0_cov};
}

GaussianBelief kf_predict(const GaussianBelief& b, const LinearGaussianModel& m) {
  if (b.mean.size() != m.F.cols() || b.cov.rows() != m.F.cols()) {
    throw ContractError("kf_predict: belief dimension does not match the model");
  }
  GaussianBelief out;
  out.mean = m.F * b.mean;
  out.cov = symmetrized(m.F * b.cov * m.F.transpose() + m.Q);
  return out;
}

GaussianBelief kf_update(const GaussianBelief& b, const LinearGaussianModel& m,
                         const Eigen::VectorXd& z) {
  if (b.mean.size() != m.H.cols()) {
    throw ContractError("kf_update: belief dimension does not match the model");
  }
  if (z.size() != m.H.rows()) {
    throw ContractError("kf_update: measurement dimension does not match H");
  }
  const Eigen::MatrixXd innovation_cov = m.H * b.cov * m.H.transpose() + m.R;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(innovation_cov);
  if (!lu.isInvertible()) {
    throw NumericalError("kf_update: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = b.cov * m.H.transpose() * lu.inverse();
  GaussianBelief out;
  out.mean = b.mean + gain * (z - m.H * b.mean);
  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(b.cov.rows(), b.cov.cols());
  out.cov = symmetrized((identity - gain * m.H) * b.cov);
  return out;
}

}  // namespace wsnloc::filters
