#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsnloc/grid.hpp"
#include "wsnloc/propagation.hpp"
#include "wsnloc/world.hpp"

namespace wsnloc::rangefree {

// Minimum hop counts (node, anchor) -> hops. An absent entry means the node
// cannot reach that anchor; hops(a, a) == 0 for every flooded anchor a.
class HopTable {
 public:
  void set(NodeId node, NodeId anchor, int hops);
  std::optional<int> get(NodeId node, NodeId anchor) const;
  int at(NodeId node, NodeId anchor) const;  // NotFoundError when absent
  const std::map<std::pair<NodeId, NodeId>, int>& entries() const { return hops_; }

 private:
  std::map<std::pair<NodeId, NodeId>, int> hops_;
};

struct AnchorCalibration {
  NodeId anchor_id = -1;
  double hop_size = 0.0;  // meters per hop, always > 0
};

// Annulus around an anchor known to contain the target.
struct Ring {
  Position center;
  double inner_r = 0.0;
  double outer_r = 0.0;
};

// Counts, per grid cell, how many rings cover the cell's center.
class GridAccumulator {
 public:
  GridAccumulator(Rect bounds, double cell_size);
  const GridSpec& spec() const { return spec_; }
  void add_ring(const Ring& ring);
  int count_at(int cell_index) const;
  int max_count() const;
  std::vector<int> argmax_cells() const;  // ascending cell indices

 private:
  GridSpec spec_;
  std::vector<int> counts_;
};

// Breadth-first flood from every anchor over the connectivity graph.
HopTable flood_hops(const World& world);

// Meters-per-hop estimate for one anchor: total straight-line distance to the
// other reachable anchors divided by total hops to them.
AnchorCalibration avg_hop_size(NodeId anchor_id, const HopTable& table,
                               std::span<const Node> anchors);

// Position of one node from hop counts: distances are hops times the hop size
// of the calibrating anchor nearest in hop count (ties broken by anchor id),
// then solved by linearized least-squares multilateration.
Position dvhop_estimate(NodeId node_id, const HopTable& table,
                        std::span<const AnchorCalibration> calibrations,
                        std::span<const Node> anchors);

// Full pipeline for every unknown node. Nodes that cannot be located
// (unreachable or degenerate anchor geometry) are omitted from the result.
std::map<NodeId, Position> dvhop_locate(const World& world);

// Where ring radii come from: inter-anchor straight-line distances (anchors
// broadcast their positions) or distances inverted from measured RSSI.
enum class RingRadii { TrueDistance, FromRssi };

// For each anchor A and each peer pair (B, C) with
// RSSI(A,B) > RSSI(A,target) > RSSI(A,C), emit a ring centered at A that
// brackets the target between d(A,B) and d(A,C). Pairs whose radii come out
// inverted (possible under shadowing) are skipped.
std::vector<Ring> rocrssi_rings(NodeId target_id, std::span<const Node> anchors,
                                const RssiTable& rssi,
                                RingRadii radii = RingRadii::TrueDistance,
                                const PathLossParams& params = {});

// Accumulates every ring into the grid and returns the unweighted centroid of
// the cells holding the maximum count.
Position rocrssi_locate(std::span<const Ring> rings, GridAccumulator& grid);

}  // namespace wsnloc::rangefree
