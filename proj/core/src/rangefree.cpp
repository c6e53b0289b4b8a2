#include "wsnloc/rangefree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace wsnloc::rangefree {

void HopTable::set(NodeId node, NodeId anchor, int hops) {
  hops_[{node, anchor}] = hops;
}

std::optional<int> HopTable::get(NodeId node, NodeId anchor) const {
  auto it = hops_.find({node, anchor});
  if (it == hops_.end()) return std::nullopt;
  return it->second;
}

int HopTable::at(NodeId node, NodeId anchor) const {
  auto v = get(node, anchor);
  if (!v) {
    throw NotFoundError("node " + std::to_string(node) + " has no hop count to anchor " +
                        std::to_string(anchor));
  }
  return *v;
}

HopTable flood_hops(const World& world) {
  HopTable table;
  for (const Node& anchor : world.anchors()) {
    std::map<NodeId, int> dist;
    dist[anchor.id] = 0;
    std::deque<NodeId> queue{anchor.id};
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      const int next_hops = dist.at(cur) + 1;
      for (NodeId nb : world.neighbors(cur)) {
        if (dist.emplace(nb, next_hops).second) queue.push_back(nb);
      }
    }
    for (const auto& [node, hops] : dist) table.set(node, anchor.id, hops);
  }
  return table;
}

AnchorCalibration avg_hop_size(NodeId anchor_id, const HopTable& table,
                               std::span<const Node> anchors) {
  const Node* self = nullptr;
  for (const Node& a : anchors) {
    if (a.id == anchor_id) {
      self = &a;
      break;
    }
  }
  if (!self) throw NotFoundError("anchor " + std::to_string(anchor_id) + " not in anchor list");

  double dist_sum = 0.0;
  long hop_sum = 0;
  for (const Node& peer : anchors) {
    if (peer.id == anchor_id) continue;
    const auto hops = table.get(peer.id, anchor_id);
    if (!hops) continue;
    dist_sum += distance(self->pos, peer.pos);
    hop_sum += *hops;
  }
  if (hop_sum == 0) {
    throw EstimateError("anchor " + std::to_string(anchor_id) +
                        " has no reachable peer anchors to calibrate against");
  }
  return {anchor_id, dist_sum / static_cast<double>(hop_sum)};
}

Position dvhop_estimate(NodeId node_id, const HopTable& table,
                        std::span<const AnchorCalibration> calibrations,
                        std::span<const Node> anchors) {
  struct Reach {
    const Node* anchor;
    int hops;
  };
  std::vector<Reach> reachable;
  for (const Node& a : anchors) {
    if (const auto hops = table.get(node_id, a.id)) {
      if (*hops == 0) return a.pos;  // coincident with the anchor
      reachable.push_back({&a, *hops});
    }
  }
  if (reachable.size() < 3) {
    throw EstimateError("node " + std::to_string(node_id) + " reaches only " +
                        std::to_string(reachable.size()) + " anchors (need 3)");
  }

  // Calibrating anchor: fewest hops away, ties by id.
  const Reach* nearest = &reachable.front();
  for (const Reach& r : reachable) {
    if (r.hops < nearest->hops ||
        (r.hops == nearest->hops && r.anchor->id < nearest->anchor->id)) {
      nearest = &r;
    }
  }
  const AnchorCalibration* cal = nullptr;
  for (const AnchorCalibration& c : calibrations) {
    if (c.anchor_id == nearest->anchor->id) {
      cal = &c;
      break;
    }
  }
  if (!cal) {
    throw NotFoundError("no calibration for anchor " + std::to_string(nearest->anchor->id));
  }

  // Subtract the first circle equation from the rest; least-squares in (x, y).
  const auto& ref = *reachable.front().anchor;
  const double d0 = cal->hop_size * reachable.front().hops;
  const int rows = static_cast<int>(reachable.size()) - 1;
  Eigen::MatrixXd A(rows, 2);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    const auto& ai = *reachable[static_cast<std::size_t>(i) + 1].anchor;
    const double di = cal->hop_size * reachable[static_cast<std::size_t>(i) + 1].hops;
    A(i, 0) = 2.0 * (ai.pos.x - ref.pos.x);
    A(i, 1) = 2.0 * (ai.pos.y - ref.pos.y);
    b(i) = ai.pos.x * ai.pos.x - ref.pos.x * ref.pos.x + ai.pos.y * ai.pos.y -
           ref.pos.y * ref.pos.y - di * di + d0 * d0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-9);
  if (qr.rank() < 2) {
    throw EstimateError("anchors reachable from node " + std::to_string(node_id) +
                        " are collinear");
  }
  const Eigen::Vector2d sol = qr.solve(b);
  return {sol(0), sol(1), 0.0};
}

std::map<NodeId, Position> dvhop_locate(const World& world) {
  const HopTable table = flood_hops(world);
  const auto& anchors = world.anchors();
  std::vector<AnchorCalibration> calibrations;
  calibrations.reserve(anchors.size());
  for (const Node& a : anchors) {
    try {
      calibrations.push_back(avg_hop_size(a.id, table, anchors));
    } catch (const EstimateError&) {
      // isolated anchor: unusable for calibration
    }
  }
  std::map<NodeId, Position> estimates;
  for (const Node& n : world.unknowns()) {
    try {
      estimates[n.id] = dvhop_estimate(n.id, table, calibrations, anchors);
    } catch (const Error&) {
      // node not locatable with this topology; leave it out
    }
  }
  return estimates;
}

GridAccumulator::GridAccumulator(Rect bounds, double cell_size)
    : spec_(bounds, cell_size), counts_(static_cast<std::size_t>(spec_.n_cells()), 0) {}

void GridAccumulator::add_ring(const Ring& ring) {
  for (int i = 0; i < spec_.n_cells(); ++i) {
    const Position c = spec_.cell_center(i);
    const double d = std::hypot(c.x - ring.center.x, c.y - ring.center.y);
    if (d >= ring.inner_r && d <= ring.outer_r) {
      ++counts_[static_cast<std::size_t>(i)];
    }
  }
}

int GridAccumulator::count_at(int cell_index) const {
  if (cell_index < 0 || cell_index >= spec_.n_cells()) {
    throw ContractError("cell index " + std::to_string(cell_index) + " out of range");
  }
  return counts_[static_cast<std::size_t>(cell_index)];
}

int GridAccumulator::max_count() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

std::vector<int> GridAccumulator::argmax_cells() const {
  const int m = max_count();
  std::vector<int> cells;
  for (int i = 0; i < spec_.n_cells(); ++i) {
    if (counts_[static_cast<std::size_t>(i)] == m) cells.push_back(i);
  }
  return cells;
}

std::vector<Ring> rocrssi_rings(NodeId target_id, std::span<const Node> anchors,
                                const RssiTable& rssi, RingRadii radii,
                                const PathLossParams& params) {
  auto radius = [&](const Node& a, const Node& b) {
    if (radii == RingRadii::TrueDistance) return distance(a.pos, b.pos);
    return distance_for_mean_rssi(rssi.at(a.id, b.id), params);
  };

  std::vector<Ring> rings;
  for (const Node& a : anchors) {
    const auto to_target = rssi.get(a.id, target_id);
    if (!to_target) continue;
    for (const Node& b : anchors) {
      if (b.id == a.id) continue;
      const auto rssi_ab = rssi.get(a.id, b.id);
      if (!rssi_ab || !(*rssi_ab > *to_target)) continue;
      for (const Node& c : anchors) {
        if (c.id == a.id || c.id == b.id) continue;
        const auto rssi_ac = rssi.get(a.id, c.id);
        if (!rssi_ac || !(*to_target > *rssi_ac)) continue;
        const double inner = radius(a, b);
        const double outer = radius(a, c);
        if (!(inner >= 0.0 && inner < outer)) continue;  // inverted under shadowing
        rings.push_back({a.pos, inner, outer});
      }
    }
  }
  return rings;
}

Position rocrssi_locate(std::span<const Ring> rings, GridAccumulator& grid) {
  if (rings.empty()) throw EstimateError("no rings to intersect");
  for (const Ring& r : rings) grid.add_ring(r);
  if (grid.max_count() == 0) {
    throw EstimateError("rings cover no grid cell center; grid too coarse");
  }
  const std::vector<int> cells = grid.argmax_cells();
  Position mean;
  for (int i : cells) {
    const Position c = grid.spec().cell_center(i);
    mean.x += c.x;
    mean.y += c.y;
  }
  mean.x /= static_cast<double>(cells.size());
  mean.y /= static_cast<double>(cells.size());
  return mean;
}

}  // namespace wsnloc::rangefree
