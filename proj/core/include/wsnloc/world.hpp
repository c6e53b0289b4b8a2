#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/rng.hpp"

namespace wsnloc {

using NodeId = int;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Euclidean distance in meters. Symmetric, non-negative, zero iff equal.
double distance(const Position& a, const Position& b);

enum class NodeKind { Anchor, Unknown, MobileBeacon };

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Unknown;
  Position pos;
};

/// Axis-aligned rectangle; the planar extent of a field or grid.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool contains(const Position& p) const {
    return p.x >= x0 && p.x <= x0 + width && p.y >= y0 && p.y <= y0 + height;
  }
};

enum class Placement { Uniform, Grid };

/// Immutable sensor field: a bounded planar area, a communication range and
/// a set of nodes. Safe to share read-only across parallel runs.
class World {
 public:
  World(double width, double height, double comm_range, std::vector<Node> nodes,
        std::uint64_t seed = 0);

  double width() const { return width_; }
  double height() const { return height_; }
  double comm_range() const { return comm_range_; }
  std::uint64_t seed() const { return seed_; }
  Rect bounds() const { return {0.0, 0.0, width_, height_}; }

  const std::vector<Node>& nodes() const { return nodes_; }
  bool has_node(NodeId id) const { return index_.count(id) != 0; }
  const Node& node(NodeId id) const;

  std::vector<Node> anchors() const;
  std::vector<Node> unknowns() const;

  /// Ids of all nodes within comm_range of `id`, excluding `id` itself,
  /// sorted ascending. The relation is symmetric.
  std::vector<NodeId> neighbors(NodeId id) const;

 private:
  double width_;
  double height_;
  double comm_range_;
  std::uint64_t seed_;
  std::vector<Node> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
};

/// Builds a field with `n_anchors` anchors (ids 0..n_anchors-1) followed by
/// `n_unknown` unknown nodes. Uniform placement draws x then y per node from
/// a fresh Rng(seed); grid placement lays each group on its own centered
/// lattice and consumes no randomness. Identical arguments give an identical
/// World.
World build_world(double width, double height, double comm_range, int n_anchors,
                  int n_unknown, std::uint64_t seed,
                  Placement placement = Placement::Uniform);

struct TrajectoryStep {
  int t = 0;
  Position pos;
};

/// Piecewise position record of a mobile node; step indices strictly
/// increase starting at 0.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectoryStep> steps);

  const std::vector<TrajectoryStep>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }

 private:
  std::vector<TrajectoryStep> steps_;
};

}  // namespace wsnloc
