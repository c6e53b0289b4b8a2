#pragma once

#include <map>
#include <span>
#include <vector>

#include "wsnloc/world.hpp"

namespace wsnloc::geo {

// A position broadcast from a mobile GPS-equipped node.
struct BeaconMessage {
  NodeId sender = -1;
  Position pos;
  int step = 0;
};

// One range constraint: the target lies on a sphere around center.
struct SphereObservation {
  Position center;
  double radius = 0.0;
};

// Unweighted centroid of the heard anchor positions.
Position cellid_locate(std::span<const Position> heard);

// Intersects >= 4 spheres by subtracting the first equation from the rest
// and least-squares solving the linear system. Noiseless consistent input
// recovers the point exactly (up to rounding).
Position sphere_locate(std::span<const SphereObservation> obs);

// Average beacon messages transmitted per mobile node.
double beacon_overhead(long total_beacons, long total_mobile_nodes);

// What a static node keeps of the beacons it hears. The default policy
// stores only the first and the most recent beacon per sender; everything
// in between is discarded on arrival.
class BeaconRegistry {
 public:
  explicit BeaconRegistry(bool first_and_last_only = true)
      : first_and_last_only_(first_and_last_only) {}
  void receive(const BeaconMessage& m);
  const std::map<NodeId, std::vector<BeaconMessage>>& heard() const { return heard_; }
  std::size_t kept_count() const;

 private:
  bool first_and_last_only_;
  std::map<NodeId, std::vector<BeaconMessage>> heard_;
};

}  // namespace wsnloc::geo
