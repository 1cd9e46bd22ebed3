#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "elemap/core.hpp"
#include "elemap/heightfield.hpp"

namespace elemap {

enum class CloudFrame { World, Base };

struct PointCloud {
  std::vector<Vec3> points;
  CloudFrame frame = CloudFrame::World;
};

struct CameraModel {
  double horizontal_fov = deg_to_rad(87.0);
  double vertical_fov = deg_to_rad(58.0);
  int cols = 64;
  int rows = 48;
  double max_range = 6.0;
  Pose pose;  // world <- camera, optical frame: z forward, x right, y down
};

// Rotation placing a camera on a yaw-aligned base: optical axis along base +x,
// pitched down by `pitch_down` radians.
inline Mat3 camera_mount_rotation(double pitch_down) {
  const double c = std::cos(pitch_down), s = std::sin(pitch_down);
  Mat3 r;
  r.m[0] = 0;  r.m[1] = -s; r.m[2] = c;
  r.m[3] = -1; r.m[4] = 0;  r.m[5] = 0;
  r.m[6] = 0;  r.m[7] = -c; r.m[8] = -s;
  return r;
}

// Robot-frame 2.5-D scan. Cells with no observation hold the sentinel value
// and are marked invalid; the two stay in lockstep.
struct GridConfig {
  int rows = 51;   // along base x
  int cols = 31;   // along base y
  double resolution = 0.04;
  Vec2 center_offset{1.0, 0.0};
  double sentinel = -10.0;

  static GridConfig predictor_grid(bool biped) {
    if (biped) return {31, 31, 0.04, {0.6, 0.0}, -10.0};
    return {51, 31, 0.04, {1.0, 0.0}, -10.0};
  }
  static GridConfig controller_grid(bool biped) {
    if (biped) return {18, 13, 0.08, {0.32, 0.0}, -10.0};
    return {36, 14, 0.08, {0.6, 0.0}, -10.0};
  }

  double cell_x(int i) const {
    return center_offset.x + (i - (rows - 1) / 2.0) * resolution;
  }
  double cell_y(int j) const {
    return center_offset.y + (j - (cols - 1) / 2.0) * resolution;
  }
};

struct LocalGrid {
  int rows = 0;
  int cols = 0;
  double resolution = 0.04;
  Vec2 center_offset;
  double sentinel = -10.0;
  Grid elevations;
  MaskGrid valid;

  LocalGrid() = default;
  explicit LocalGrid(const GridConfig& cfg)
      : rows(cfg.rows),
        cols(cfg.cols),
        resolution(cfg.resolution),
        center_offset(cfg.center_offset),
        sentinel(cfg.sentinel),
        elevations(cfg.rows, cfg.cols, cfg.sentinel),
        valid(cfg.rows, cfg.cols, 0) {}

  GridConfig config() const {
    return {rows, cols, resolution, center_offset, sentinel};
  }

  bool is_valid(int r, int c) const { return valid.at(r, c) != 0; }

  void set(int r, int c, double elevation) {
    elevations.at(r, c) = elevation;
    valid.at(r, c) = 1;
  }
  void clear(int r, int c) {
    elevations.at(r, c) = sentinel;
    valid.at(r, c) = 0;
  }

  int valid_count() const {
    int n = 0;
    for (auto v : valid.data) n += v != 0;
    return n;
  }
};

namespace detail {

// Nearest ground / overlay-slab intersection within one cell column over the
// ray parameter interval [t_in, t_out].
inline bool column_hit(const Heightfield& f, int ix, int iy, const Vec3& o,
                       const Vec3& d, double t_in, double t_out, double& t_hit) {
  double best = std::numeric_limits<double>::infinity();
  const double z_in = o.z + d.z * t_in;

  if (!f.is_void(ix, iy)) {
    const double h = f.elevations.at(ix, iy);
    if (z_in <= h) {
      best = t_in;  // pierced the column side wall (or started inside)
    } else if (d.z < 0.0) {
      const double t = (h - o.z) / d.z;
      if (t > t_in && t <= t_out) best = std::min(best, t);
    }
  }

  if (f.has_overlay_at(ix, iy)) {
    const double bot = f.overlay_bottom.at(ix, iy);
    const double top = f.overlay_top.at(ix, iy);
    if (z_in >= bot && z_in <= top) {
      best = std::min(best, t_in);
    } else if (z_in > top && d.z < 0.0) {
      const double t = (top - o.z) / d.z;
      if (t > t_in && t <= t_out) best = std::min(best, t);
    } else if (z_in < bot && d.z > 0.0) {
      const double t = (bot - o.z) / d.z;
      if (t > t_in && t <= t_out) best = std::min(best, t);
    }
  }

  if (!std::isfinite(best)) return false;
  t_hit = best;
  return true;
}

}  // namespace detail

// Nearest intersection of a ray with the 2.5-D surface (ground columns plus
// overlay slabs), traversing cells with a 2-D DDA. Returns nothing on a miss
// or when the hit lies beyond max_range.
inline std::optional<Vec3> raycast(const Heightfield& field, const Vec3& origin,
                                   const Vec3& direction,
                                   double max_range = std::numeric_limits<double>::infinity()) {
  const double res = field.resolution;
  const double sx = field.size_x(), sy = field.size_y();
  const Vec3& o = origin;
  const Vec3& d = direction;

  const double eps = 1e-12;
  const bool vertical = std::abs(d.x) < eps && std::abs(d.y) < eps;

  // Clip to the horizontal footprint of the field.
  double t0 = 0.0, t1 = max_range;
  if (!vertical) {
    for (int axis = 0; axis < 2; ++axis) {
      const double da = axis == 0 ? d.x : d.y;
      const double oa = axis == 0 ? o.x : o.y;
      const double hi = axis == 0 ? sx : sy;
      if (std::abs(da) < eps) {
        if (oa < 0.0 || oa >= hi) return std::nullopt;
        continue;
      }
      double ta = (0.0 - oa) / da;
      double tb = (hi - oa) / da;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
    if (t0 > t1) return std::nullopt;
  } else {
    if (o.x < 0.0 || o.x >= sx || o.y < 0.0 || o.y >= sy) return std::nullopt;
  }

  if (vertical) {
    const int ix = field.cell_x(o.x), iy = field.cell_y(o.y);
    double t_hit;
    if (detail::column_hit(field, ix, iy, o, d, 0.0, max_range, t_hit) &&
        t_hit <= max_range)
      return o + d * t_hit;
    return std::nullopt;
  }

  // Amanatides-Woo traversal over (x, y).
  const double px = o.x + d.x * t0, py = o.y + d.y * t0;
  int ix = std::clamp(int(std::floor(px / res)), 0, field.length_cells - 1);
  int iy = std::clamp(int(std::floor(py / res)), 0, field.width_cells - 1);
  const int step_x = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
  const int step_y = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x != 0 ? res / std::abs(d.x) : inf;
  const double t_delta_y = step_y != 0 ? res / std::abs(d.y) : inf;

  auto boundary_t = [&](int cell, int step, double oa, double da) {
    if (step == 0) return inf;
    const double edge = (step > 0 ? (cell + 1) : cell) * res;
    return (edge - oa) / da;
  };
  double t_max_x = boundary_t(ix, step_x, o.x, d.x);
  double t_max_y = boundary_t(iy, step_y, o.y, d.y);

  double t_in = t0;
  while (true) {
    const double t_out = std::min({t_max_x, t_max_y, t1});
    double t_hit;
    if (detail::column_hit(field, ix, iy, o, d, t_in, t_out, t_hit)) {
      if (t_hit <= max_range) return o + d * t_hit;
      return std::nullopt;
    }
    if (t_out >= t1) return std::nullopt;
    if (t_max_x <= t_max_y) {
      ix += step_x;
      t_in = t_max_x;
      t_max_x += t_delta_x;
      if (ix < 0 || ix >= field.length_cells) return std::nullopt;
    } else {
      iy += step_y;
      t_in = t_max_y;
      t_max_y += t_delta_y;
      if (iy < 0 || iy >= field.width_cells) return std::nullopt;
    }
  }
}

// One ray per pixel through the pinhole frustum; misses are omitted.
inline PointCloud render_depth(const Heightfield& field, const CameraModel& cam) {
  PointCloud cloud;
  cloud.frame = CloudFrame::World;
  cloud.points.reserve(size_t(cam.rows) * cam.cols);
  for (int r = 0; r < cam.rows; ++r) {
    const double el = ((r + 0.5) / cam.rows - 0.5) * cam.vertical_fov;
    for (int c = 0; c < cam.cols; ++c) {
      const double az = ((c + 0.5) / cam.cols - 0.5) * cam.horizontal_fov;
      const Vec3 local{std::tan(az), std::tan(el), 1.0};
      const Vec3 dir = (cam.pose.rotation * local).normalized();
      if (auto hit = raycast(field, cam.pose.position, dir, cam.max_range))
        cloud.points.push_back(*hit);
    }
  }
  return cloud;
}

namespace detail {

// Shared by project_to_grid and its brute-force test oracle so both paths
// bin points with identical arithmetic.
inline bool project_point(const Vec3& p, const Vec3& base_pos, double cos_yaw,
                          double sin_yaw, const GridConfig& cfg, int& row,
                          int& col, double& elevation) {
  const double dx = p.x - base_pos.x;
  const double dy = p.y - base_pos.y;
  const double lx = cos_yaw * dx + sin_yaw * dy;
  const double ly = -sin_yaw * dx + cos_yaw * dy;
  const double fi = (lx - cfg.center_offset.x) / cfg.resolution + (cfg.rows - 1) / 2.0;
  const double fj = (ly - cfg.center_offset.y) / cfg.resolution + (cfg.cols - 1) / 2.0;
  row = int(std::lround(fi));
  col = int(std::lround(fj));
  if (row < 0 || row >= cfg.rows || col < 0 || col >= cfg.cols) return false;
  elevation = p.z - base_pos.z;
  return true;
}

}  // namespace detail

// Bins world points into the yaw-aligned base frame grid, keeping the
// maximum z per cell. Points outside the footprint are discarded.
inline LocalGrid project_to_grid(const PointCloud& cloud, const Pose& base_pose,
                                 const GridConfig& cfg) {
  if (cloud.frame != CloudFrame::World)
    throw Error("project_to_grid expects a world-frame cloud");
  LocalGrid grid(cfg);
  const double yaw = base_pose.yaw();
  const double c = std::cos(yaw), s = std::sin(yaw);
  for (const Vec3& p : cloud.points) {
    int r, cc;
    double z;
    if (!detail::project_point(p, base_pose.position, c, s, cfg, r, cc, z))
      continue;
    if (!grid.is_valid(r, cc) || z > grid.elevations.at(r, cc)) grid.set(r, cc, z);
  }
  return grid;
}

// Ground-truth scan: per-cell top surface under the footprint, base-relative.
inline LocalGrid sample_label_grid(const Heightfield& field,
                                   const Pose& base_pose,
                                   const GridConfig& cfg) {
  LocalGrid grid(cfg);
  const double yaw = base_pose.yaw();
  const double c = std::cos(yaw), s = std::sin(yaw);
  for (int i = 0; i < cfg.rows; ++i)
    for (int j = 0; j < cfg.cols; ++j) {
      const double lx = cfg.cell_x(i), ly = cfg.cell_y(j);
      const double wx = base_pose.position.x + c * lx - s * ly;
      const double wy = base_pose.position.y + s * lx + c * ly;
      if (auto surf = field.top_surface_at(wx, wy))
        grid.set(i, j, *surf - base_pose.position.z);
    }
  return grid;
}

struct ScanPair {
  LocalGrid input;
  LocalGrid label;
};

// Rendered (occluded, discretized) input paired with the exact label.
inline ScanPair sample_scan(const Heightfield& field, const Pose& base_pose,
                            const CameraModel& camera, const GridConfig& cfg) {
  ScanPair out;
  out.label = sample_label_grid(field, base_pose, cfg);
  out.input = project_to_grid(render_depth(field, camera), base_pose, cfg);
  return out;
}

}  // namespace elemap
