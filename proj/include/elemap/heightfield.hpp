#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "elemap/core.hpp"

namespace elemap {

// 2.5-D ground-truth terrain. Cell (ix, iy) covers
// [ix*res, (ix+1)*res) x [iy*res, (iy+1)*res) in the terrain frame; the
// stored elevation is the top of the solid column. Void cells have no ground
// at all (gaps, sparse terrain air). An optional overlay layer stores one
// floating slab per cell (bottom/top), visible only to the raycaster.
struct Heightfield {
  int length_cells = 0;  // along x
  int width_cells = 0;   // along y
  double resolution = 0.04;
  Grid elevations;       // length_cells rows, width_cells cols
  MaskGrid void_mask;

  bool has_overlay = false;
  Grid overlay_bottom;
  Grid overlay_top;
  MaskGrid overlay_mask;

  Heightfield() = default;
  Heightfield(int length, int width, double res, double fill = 0.0)
      : length_cells(length),
        width_cells(width),
        resolution(res),
        elevations(length, width, fill),
        void_mask(length, width, 0) {}

  double size_x() const { return length_cells * resolution; }
  double size_y() const { return width_cells * resolution; }

  bool in_bounds(int ix, int iy) const { return elevations.in_bounds(ix, iy); }

  int cell_x(double x) const { return int(std::floor(x / resolution)); }
  int cell_y(double y) const { return int(std::floor(y / resolution)); }

  bool is_void(int ix, int iy) const { return void_mask.at(ix, iy) != 0; }

  void set_void(int ix, int iy) {
    void_mask.at(ix, iy) = 1;
    elevations.at(ix, iy) = std::numeric_limits<double>::quiet_NaN();
  }

  void ensure_overlay() {
    if (has_overlay) return;
    has_overlay = true;
    overlay_bottom = Grid(length_cells, width_cells, 0.0);
    overlay_top = Grid(length_cells, width_cells, 0.0);
    overlay_mask = MaskGrid(length_cells, width_cells, 0);
  }

  bool has_overlay_at(int ix, int iy) const {
    return has_overlay && overlay_mask.at(ix, iy) != 0;
  }

  // Topmost surface of the column: overlay slab top if present, else ground.
  // Empty for void columns without overlay.
  std::optional<double> top_surface(int ix, int iy) const {
    if (has_overlay_at(ix, iy)) {
      const double t = overlay_top.at(ix, iy);
      if (is_void(ix, iy)) return t;
      return std::max(t, elevations.at(ix, iy));
    }
    if (is_void(ix, iy)) return std::nullopt;
    return elevations.at(ix, iy);
  }

  std::optional<double> top_surface_at(double x, double y) const {
    const int ix = cell_x(x), iy = cell_y(y);
    if (!in_bounds(ix, iy)) return std::nullopt;
    return top_surface(ix, iy);
  }

  void validate() const {
    if (length_cells < 2 || width_cells < 2)
      throw Error("heightfield dimensions must be at least 2x2");
    if (!(resolution > 0.0)) throw Error("heightfield resolution must be > 0");
    for (int i = 0; i < length_cells; ++i)
      for (int j = 0; j < width_cells; ++j)
        if (!is_void(i, j) && !std::isfinite(elevations.at(i, j)))
          throw Error("non-void cell with non-finite elevation");
  }
};

}  // namespace elemap
