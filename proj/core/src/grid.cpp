#include "wsnloc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsnloc {

namespace {

int cells_along(double extent, double cell_size) {
  // Tolerance keeps exact multiples (10 / 0.2) from rounding up a cell.
  const int n = static_cast<int>(std::ceil(extent / cell_size - 1e-9));
  return std::max(n, 1);
}

}  // namespace

GridSpec::GridSpec(Rect bounds, double cell_size) : bounds_(bounds), cell_size_(cell_size) {
  if (!(bounds.width > 0.0) || !(bounds.height > 0.0)) {
    throw ConfigError("grid bounds must have positive extent");
  }
  if (!(cell_size > 0.0)) {
    throw ConfigError("grid cell_size must be positive");
  }
  nx_ = cells_along(bounds.width, cell_size);
  ny_ = cells_along(bounds.height, cell_size);
}

int GridSpec::cell_index(const Position& p) const {
  int ix = static_cast<int>(std::floor((p.x - bounds_.x0) / cell_size_));
  int iy = static_cast<int>(std::floor((p.y - bounds_.y0) / cell_size_));
  ix = std::clamp(ix, 0, nx_ - 1);
  iy = std::clamp(iy, 0, ny_ - 1);
  return iy * nx_ + ix;
}

Position GridSpec::cell_center(int index) const {
  if (index < 0 || index >= n_cells()) {
    throw ContractError("cell index " + std::to_string(index) + " out of range");
  }
  const int ix = index % nx_;
  const int iy = index / nx_;
  return {bounds_.x0 + (ix + 0.5) * cell_size_, bounds_.y0 + (iy + 0.5) * cell_size_, 0.0};
}

std::vector<int> GridSpec::adjacent4(int index) const {
  if (index < 0 || index >= n_cells()) {
    throw ContractError("cell index " + std::to_string(index) + " out of range");
  }
  const int ix = index % nx_;
  const int iy = index / nx_;
  std::vector<int> out;
  if (iy > 0) out.push_back(index - nx_);
  if (ix > 0) out.push_back(index - 1);
  if (ix + 1 < nx_) out.push_back(index + 1);
  if (iy + 1 < ny_) out.push_back(index + nx_);
  return out;
}

}  // namespace wsnloc
