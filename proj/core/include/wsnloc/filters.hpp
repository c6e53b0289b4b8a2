#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

#include "wsnloc/propagation.hpp"
#include "wsnloc/rng.hpp"
#include "wsnloc/world.hpp"

namespace wsnloc::filters {

using SensorPositions = std::map<NodeId, Position>;

// Binary-Markov target: appears with probability p_init, disappears with
// probability p_out, and while present does a random walk with per-axis step
// noise motion_step_sigma on top of a constant drift velocity.
struct TargetModelParams {
  double p_init = 0.2;
  double p_out = 0.05;
  double motion_step_sigma = 0.0;
  void validate() const;
};

struct TargetState {
  bool present = false;
  Position pos;
  double vel_x = 0.0;  // drift per step, meters
  double vel_y = 0.0;
};

// Binary decisions of the active sensors at one time step.
struct ObservationVector {
  int step = 0;
  std::map<NodeId, int> decisions;  // sensor id -> 0/1
};

struct Particle {
  TargetState state;
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  int step = 0;
};

struct PfEstimate {
  Position pos;
  double spread = 0.0;  // weighted RMS radius about the mean
};

// One step of the binary-Markov target model. Consumes exactly one uniform
// draw for the presence transition, plus two normal draws for the (x, y)
// step noise whenever the target is present afterwards.
TargetState target_step(const TargetState& state, const TargetModelParams& params, Rng& rng);

// Likelihood of the binary decision vector under a present target at
// hypo.pos: product over sensors of P_D^z (1 - P_D)^(1-z).
double obs_likelihood(const ObservationVector& z, const TargetState& hypo,
                      const SensorPositions& sensors, const SensorParams& params);

// Likelihood of the same vector when no target is present: every firing is a
// false alarm.
double noise_likelihood(const ObservationVector& z, const SensorParams& params);

// Equal-weight cloud, uniform over the rectangle, all present.
ParticleSet pf_init(int n, const Rect& bounds, Rng& rng);
// Equal-weight Gaussian cloud around a start position, all present.
ParticleSet pf_init(int n, const Position& center, double spread_sigma, Rng& rng);

// Advance every particle through target_step; weights untouched, step + 1.
ParticleSet pf_predict(const ParticleSet& ps, const TargetModelParams& params, Rng& rng);

// Bayes reweighting by the binary-sensor likelihood. Particles hypothesizing
// an absent target score the vector against the false-alarm rate instead.
ParticleSet pf_update(const ParticleSet& ps, const ObservationVector& z,
                      const SensorPositions& sensors, const SensorParams& params);

// Bayes reweighting by a direct position measurement with isotropic Gaussian
// noise (for tracking against a linear-Gaussian reference).
ParticleSet pf_update_gaussian(const ParticleSet& ps, const Eigen::Vector2d& z,
                               double meas_sigma);

// Systematic resampling: one uniform draw, output weights all exactly 1/N.
ParticleSet pf_resample(const ParticleSet& ps, Rng& rng);

// 1 / sum of squared weights.
double effective_sample_size(const ParticleSet& ps);

PfEstimate pf_estimate(const ParticleSet& ps);

// Unweighted centroid of the sensors that fired; nullopt when none did.
// This is the linearized measurement a Kalman filter can consume in place of
// the raw binary vector.
std::optional<Eigen::Vector2d> firing_centroid(const ObservationVector& z,
                                               const SensorPositions& sensors);

struct LinearGaussianModel {
  Eigen::MatrixXd F;        // state transition
  Eigen::MatrixXd H;        // observation
  Eigen::MatrixXd Q;        // process noise covariance
  Eigen::MatrixXd R;        // measurement noise covariance
  Eigen::VectorXd x0_mean;  // initial state
  Eigen::MatrixXd x0_cov;   // initial covariance
  void validate() const;
};

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Planar random walk observed directly: F = H = I2, Q = q I, R = r I.
LinearGaussianModel make_position_random_walk(double q, double r,
                                              const Eigen::Vector2d& x0,
                                              double x0_var);

GaussianBelief kf_init(const LinearGaussianModel& m);

// mean <- F mean; cov <- F cov F^T + Q (symmetrized).
GaussianBelief kf_predict(const GaussianBelief& b, const LinearGaussianModel& m);

// K = cov H^T (H cov H^T + R)^-1; mean += K (z - H mean);
// cov <- (I - K H) cov, symmetrized.
GaussianBelief kf_update(const GaussianBelief& b, const LinearGaussianModel& m,
                         const Eigen::VectorXd& z);

}  // namespace wsnloc::filters
