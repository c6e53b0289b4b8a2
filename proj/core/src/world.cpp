#include "wsnloc/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsnloc {

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

bool finite_pos(const Position& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

}  // namespace

World::World(double width, double height, double comm_range, std::vector<Node> nodes,
             std::uint64_t seed)
    : width_(width), height_(height), comm_range_(comm_range), seed_(seed),
      nodes_(std::move(nodes)) {
  if (!(width_ > 0.0) || !(height_ > 0.0)) {
    throw ConfigError("world dimensions must be positive");
  }
  if (!(comm_range_ > 0.0)) {
    throw ConfigError("comm_range must be positive");
  }
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!finite_pos(n.pos)) {
      throw ConfigError("node " + std::to_string(n.id) + " has a non-finite position");
    }
    if (n.pos.x < 0.0 || n.pos.x > width_ || n.pos.y < 0.0 || n.pos.y > height_) {
      throw ConfigError("node " + std::to_string(n.id) + " lies outside the field");
    }
    if (!index_.emplace(n.id, i).second) {
      throw ConfigError("duplicate node id " + std::to_string(n.id));
    }
  }
}

const Node& World::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw NotFoundError("node " + std::to_string(id) + " not in world");
  }
  return nodes_[it->second];
}

std::vector<Node> World::anchors() const {
  std::vector<Node> out;
  for (const Node& n : nodes_) {
    if (n.kind == NodeKind::Anchor) out.push_back(n);
  }
  return out;
}

std::vector<Node> World::unknowns() const {
  std::vector<Node> out;
  for (const Node& n : nodes_) {
    if (n.kind == NodeKind::Unknown) out.push_back(n);
  }
  return out;
}

std::vector<NodeId> World::neighbors(NodeId id) const {
  const Node& self = node(id);
  std::vector<NodeId> out;
  for (const Node& n : nodes_) {
    if (n.id == id) continue;
    if (distance(self.pos, n.pos) <= comm_range_) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Centered lattice with ceil(sqrt(n)) columns, filled row-major.
Position lattice_position(int i, int n, double width, double height) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  const int col = i % cols;
  const int row = i / cols;
  return {(col + 0.5) * width / cols, (row + 0.5) * height / rows, 0.0};
}

}  // namespace

World build_world(double width, double height, double comm_range, int n_anchors,
                  int n_unknown, std::uint64_t seed, Placement placement) {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ConfigError("world dimensions must be positive");
  }
  if (!(comm_range > 0.0)) {
    throw ConfigError("comm_range must be positive");
  }
  if (n_anchors < 0 || n_unknown < 0) {
    throw ConfigError("node counts must be non-negative");
  }

  Rng rng(seed);
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(n_anchors) + n_unknown);
  NodeId next_id = 0;
  auto place = [&](NodeKind kind, int i, int n) {
    Position pos;
    if (placement == Placement::Uniform) {
      pos = {rng.uniform(0.0, width), rng.uniform(0.0, height), 0.0};
    } else {
      pos = lattice_position(i, n, width, height);
    }
    nodes.push_back(Node{next_id++, kind, pos});
  };
  for (int i = 0; i < n_anchors; ++i) place(NodeKind::Anchor, i, n_anchors);
  for (int i = 0; i < n_unknown; ++i) place(NodeKind::Unknown, i, n_unknown);

  return World(width, height, comm_range, std::move(nodes), seed);
}

Trajectory::Trajectory(std::vector<TrajectoryStep> steps) : steps_(std::move(steps)) {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const int expected_min = i == 0 ? 0 : steps_[i - 1].t + 1;
    if (i == 0 && steps_[0].t != 0) {
      throw ContractError("trajectory must start at step 0");
    }
    if (steps_[i].t < expected_min) {
      throw ContractError("trajectory step indices must strictly increase");
    }
  }
}

}  // namespace wsnloc
