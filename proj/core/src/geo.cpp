#include "wsnloc/geo.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace wsnloc::geo {

Position cellid_locate(std::span<const Position> heard) {
  if (heard.empty()) throw EstimateError("no anchor positions heard");
  Position mean;
  for (const Position& p : heard) {
    mean.x += p.x;
    mean.y += p.y;
    mean.z += p.z;
  }
  const double n = static_cast<double>(heard.size());
  mean.x /= n;
  mean.y /= n;
  mean.z /= n;
  return mean;
}

Position sphere_locate(std::span<const SphereObservation> obs) {
  if (obs.size() < 4) {
    throw EstimateError("need at least 4 sphere observations, got " +
                        std::to_string(obs.size()));
  }
  for (const SphereObservation& o : obs) {
    if (o.radius < 0.0) throw ContractError("sphere radius must be non-negative");
  }
  const Position& c0 = obs[0].center;
  const double r0 = obs[0].radius;
  const double n0 = c0.x * c0.x + c0.y * c0.y + c0.z * c0.z;
  const int rows = static_cast<int>(obs.size()) - 1;
  Eigen::MatrixXd A(rows, 3);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    const SphereObservation& o = obs[static_cast<std::size_t>(i) + 1];
    A(i, 0) = 2.0 * (o.center.x - c0.x);
    A(i, 1) = 2.0 * (o.center.y - c0.y);
    A(i, 2) = 2.0 * (o.center.z - c0.z);
    const double ni = o.center.x * o.center.x + o.center.y * o.center.y +
                      o.center.z * o.center.z;
    b(i) = ni - n0 - o.radius * o.radius + r0 * r0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-9);
  if (qr.rank() < 3) {
    throw EstimateError("sphere centers are coplanar; position is not determined");
  }
  const Eigen::Vector3d sol = qr.solve(b);
  return {sol(0), sol(1), sol(2)};
}

double beacon_overhead(long total_beacons, long total_mobile_nodes) {
  if (total_mobile_nodes < 1) {
    throw DomainError("beacon overhead needs at least one mobile node");
  }
  if (total_beacons < 0) throw DomainError("beacon count cannot be negative");
  return static_cast<double>(total_beacons) / static_cast<double>(total_mobile_nodes);
}

void BeaconRegistry::receive(const BeaconMessage& m) {
  if (!std::isfinite(m.pos.x) || !std::isfinite(m.pos.y) || !std::isfinite(m.pos.z)) {
    throw ContractError("beacon position must be finite");
  }
  auto& kept = heard_[m.sender];
  if (!first_and_last_only_ || kept.size() < 2) {
    kept.push_back(m);
    return;
  }
  kept.back() = m;  // keep the first, replace the latest
}

std::size_t BeaconRegistry::kept_count() const {
  std::size_t n = 0;
  for (const auto& [sender, kept] : heard_) n += kept.size();
  return n;
}

}  // namespace wsnloc::geo
