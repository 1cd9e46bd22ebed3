#pragma once

#include <cmath>

#include "elemap/core.hpp"
#include "elemap/rng.hpp"
#include "elemap/sensing.hpp"

namespace elemap {

// Virtual-sensor occlusion synthesis: a 2-D sensor pose is drawn from these
// base-relative ranges, and grid cells outside its fov wedge or shadowed by
// nearer terrain are cleared.
struct OcclusionConfig {
  double probability = 0.7;
  double x_min = -1.6, x_max = -0.2;
  double y_min = -0.6, y_max = 0.6;
  double z_min = 0.1, z_max = 0.7;
  double fov_min = deg_to_rad(60.0), fov_max = deg_to_rad(110.0);
};

struct AugmentConfig {
  double noise_mag_max = 0.1;      // per-sample magnitude drawn from [0, max]
  int crop_max_cells = 6;          // per border
  OcclusionConfig occlusion;
  double clip_prob = 0.5;
  double clip_low_min = -2.0, clip_low_max = -0.4;
  double clip_high_min = 0.3, clip_high_max = 1.5;
  double missing_ratio_min = 0.0, missing_ratio_max = 0.3;
  double outlier_ratio_min = 0.0, outlier_ratio_max = 0.05;
  double outlier_elev_min = -2.0, outlier_elev_max = 2.0;
  std::uint64_t seed = 0;

  // Every stage disabled; augment() becomes a bit-exact copy.
  static AugmentConfig identity() {
    AugmentConfig c;
    c.noise_mag_max = 0.0;
    c.crop_max_cells = 0;
    c.occlusion.probability = 0.0;
    c.clip_prob = 0.0;
    c.missing_ratio_min = c.missing_ratio_max = 0.0;
    c.outlier_ratio_min = c.outlier_ratio_max = 0.0;
    return c;
  }

  void validate() const {
    auto ordered = [](double lo, double hi) { return lo <= hi; };
    if (noise_mag_max < 0.0 || crop_max_cells < 0 ||
        !ordered(clip_low_min, clip_low_max) ||
        !ordered(clip_high_min, clip_high_max) ||
        !ordered(missing_ratio_min, missing_ratio_max) ||
        !ordered(outlier_ratio_min, outlier_ratio_max) ||
        missing_ratio_min < 0.0 || missing_ratio_max > 1.0 ||
        outlier_ratio_min < 0.0 || outlier_ratio_max > 1.0)
      throw Error("augment config ranges are ill-formed");
  }
};

namespace detail {

inline void occlude_grid(LocalGrid& g, Rng& rng, const OcclusionConfig& oc) {
  const double sx = rng.uniform(oc.x_min, oc.x_max);
  const double sy = rng.uniform(oc.y_min, oc.y_max);
  const double sz = rng.uniform(oc.z_min, oc.z_max);
  const double fov = rng.uniform(oc.fov_min, oc.fov_max);

  // Aim at the grid center.
  const GridConfig cfg = g.config();
  const double aim = std::atan2(cfg.center_offset.y - sy, cfg.center_offset.x - sx);

  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) {
      if (!g.is_valid(i, j)) continue;
      const double tx = cfg.cell_x(i), ty = cfg.cell_y(j);
      const double dx = tx - sx, dy = ty - sy;
      const double dist = std::hypot(dx, dy);
      const double bearing = std::atan2(dy, dx);
      if (angle_dist(bearing, aim) > fov / 2) {
        g.clear(i, j);
        continue;
      }
      if (dist < 1e-9) continue;
      // Sight line from the sensor to the cell top; any nearer valid cell
      // poking above the line shadows it.
      const double target_z = g.elevations.at(i, j);
      const int steps = int(dist / cfg.resolution);
      bool blocked = false;
      for (int k = 1; k < steps && !blocked; ++k) {
        const double f = double(k) / steps;
        const double px = sx + dx * f, py = sy + dy * f;
        const double fi = (px - cfg.center_offset.x) / cfg.resolution + (cfg.rows - 1) / 2.0;
        const double fj = (py - cfg.center_offset.y) / cfg.resolution + (cfg.cols - 1) / 2.0;
        const int ri = int(std::lround(fi)), rj = int(std::lround(fj));
        if (ri < 0 || ri >= g.rows || rj < 0 || rj >= g.cols) continue;
        if (ri == i && rj == j) break;
        if (!g.is_valid(ri, rj)) continue;
        const double line_z = sz + (target_z - sz) * f;
        if (g.elevations.at(ri, rj) > line_z + 1e-9) blocked = true;
      }
      if (blocked) g.clear(i, j);
    }
}

}  // namespace detail

// Synthesizes a noisy, partially observed input from a clean label grid.
// Stage order is fixed: noise, border crop, occlusion, clipping, dropout,
// outliers. The label is taken by value and never modified.
inline LocalGrid augment(const LocalGrid& label, const AugmentConfig& cfg,
                         Rng& rng) {
  cfg.validate();
  LocalGrid g = label;

  // 1. additive uniform noise with per-sample magnitude
  if (cfg.noise_mag_max > 0.0) {
    const double mag = rng.uniform(0.0, cfg.noise_mag_max);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        if (g.is_valid(i, j))
          g.elevations.at(i, j) += rng.uniform(-mag, mag);
  }

  // 2. border cropping
  if (cfg.crop_max_cells > 0) {
    const int top = int(rng.uniform_int(0, cfg.crop_max_cells));
    const int bottom = int(rng.uniform_int(0, cfg.crop_max_cells));
    const int left = int(rng.uniform_int(0, cfg.crop_max_cells));
    const int right = int(rng.uniform_int(0, cfg.crop_max_cells));
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        if (i < top || i >= g.rows - bottom || j < left || j >= g.cols - right)
          g.clear(i, j);
  }

  // 3. simulated occlusion from a virtual sensor
  if (cfg.occlusion.probability > 0.0 && rng.bernoulli(cfg.occlusion.probability))
    detail::occlude_grid(g, rng, cfg.occlusion);

  // 4. elevation clipping to a sampled range
  if (cfg.clip_prob > 0.0 && rng.bernoulli(cfg.clip_prob)) {
    const double lo = rng.uniform(cfg.clip_low_min, cfg.clip_low_max);
    const double hi = rng.uniform(cfg.clip_high_min, cfg.clip_high_max);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        if (g.is_valid(i, j))
          g.elevations.at(i, j) = std::clamp(g.elevations.at(i, j), lo, hi);
  }

  // 5. random dropout
  if (cfg.missing_ratio_max > 0.0) {
    const double ratio = rng.uniform(cfg.missing_ratio_min, cfg.missing_ratio_max);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        if (g.is_valid(i, j) && rng.uniform() < ratio) g.clear(i, j);
  }

  // 6. random outlier cells
  if (cfg.outlier_ratio_max > 0.0) {
    const double ratio = rng.uniform(cfg.outlier_ratio_min, cfg.outlier_ratio_max);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        if (rng.uniform() < ratio)
          g.set(i, j, rng.uniform(cfg.outlier_elev_min, cfg.outlier_elev_max));
  }

  return g;
}

// Depth-cloud degradation: uniformly removes floor(missing*n) points, then
// replaces floor(artifact*m) survivors with random in-frustum points.
inline PointCloud corrupt_cloud(const PointCloud& cloud, const CameraModel& cam,
                                double missing, double artifact, Rng& rng) {
  if (missing < 0.0 || missing > 1.0 || artifact < 0.0 || artifact > 1.0)
    throw Error("corrupt_cloud fractions must lie in [0, 1]");

  PointCloud out = cloud;
  const size_t n = out.points.size();
  const size_t drop = size_t(std::floor(missing * double(n)));

  // Partial Fisher-Yates: move `drop` random points to the tail, then cut.
  for (size_t k = 0; k < drop; ++k) {
    const size_t last = n - 1 - k;
    const size_t pick = size_t(rng.uniform_int(0, std::int64_t(last)));
    std::swap(out.points[pick], out.points[last]);
  }
  out.points.resize(n - drop);

  const size_t m = out.points.size();
  const size_t replace = size_t(std::floor(artifact * double(m)));
  for (size_t k = 0; k < replace; ++k) {
    const size_t idx = size_t(rng.uniform_int(0, std::int64_t(m) - 1));
    const double az = rng.uniform(-cam.horizontal_fov / 2, cam.horizontal_fov / 2);
    const double el = rng.uniform(-cam.vertical_fov / 2, cam.vertical_fov / 2);
    const double range = rng.uniform(0.1, cam.max_range);
    const Vec3 dir = (cam.pose.rotation * Vec3{std::tan(az), std::tan(el), 1.0}).normalized();
    out.points[idx] = cam.pose.position + dir * range;
  }
  return out;
}

}  // namespace elemap
