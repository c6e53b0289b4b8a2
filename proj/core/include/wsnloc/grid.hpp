#pragma once

#include <vector>

#include "wsnloc/world.hpp"

namespace wsnloc {

/// Uniform cell decomposition of a rectangle. Cells are indexed row-major,
/// index = iy * nx + ix; the last row/column may extend past the bounds so
/// that the whole rectangle is covered.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(Rect bounds, double cell_size);

  const Rect& bounds() const { return bounds_; }
  double cell_size() const { return cell_size_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_cells() const { return nx_ * ny_; }

  /// Cell containing p, clamped into the grid for positions outside it.
  int cell_index(const Position& p) const;
  Position cell_center(int index) const;

  /// Orthogonally adjacent cells (up to 4), ascending, self excluded.
  std::vector<int> adjacent4(int index) const;

 private:
  Rect bounds_;
  double cell_size_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
};

}  // namespace wsnloc
