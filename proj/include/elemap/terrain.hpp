#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "elemap/core.hpp"
#include "elemap/heightfield.hpp"
#include "elemap/rng.hpp"

namespace elemap {

enum class TerrainFamily {
  Rough,
  StairDown,
  StairUp,
  Boxes,
  Obstacles,
  ClimbUp,
  ClimbDown,
  ClimbConsecutive,
  Gap,
  Pallets,
  Stones,
  Beam,
  StackedBoxes,
  RandomHeightfield,
  FloatingBoxes,
};

enum class RobotProfile { QuadrupedA, BipedT };

inline const char* family_name(TerrainFamily f) {
  switch (f) {
    case TerrainFamily::Rough: return "rough";
    case TerrainFamily::StairDown: return "stair_down";
    case TerrainFamily::StairUp: return "stair_up";
    case TerrainFamily::Boxes: return "boxes";
    case TerrainFamily::Obstacles: return "obstacles";
    case TerrainFamily::ClimbUp: return "climb_up";
    case TerrainFamily::ClimbDown: return "climb_down";
    case TerrainFamily::ClimbConsecutive: return "climb_consecutive";
    case TerrainFamily::Gap: return "gap";
    case TerrainFamily::Pallets: return "pallets";
    case TerrainFamily::Stones: return "stones";
    case TerrainFamily::Beam: return "beam";
    case TerrainFamily::StackedBoxes: return "stacked_boxes";
    case TerrainFamily::RandomHeightfield: return "random_heightfield";
    case TerrainFamily::FloatingBoxes: return "floating_boxes";
  }
  return "?";
}

inline std::optional<TerrainFamily> family_from_name(const std::string& s) {
  for (int i = 0; i <= int(TerrainFamily::FloatingBoxes); ++i) {
    const auto f = TerrainFamily(i);
    if (s == family_name(f)) return f;
  }
  return std::nullopt;
}

// Knobs the difficulty ramps do not cover. Defaults are the documented
// values used throughout; override per spec if needed.
struct TerrainTuning {
  double wall_probability = 0.5;  // stair side walls, per side
  double wall_width = 0.32;
  double wall_height_min = 0.5;
  double wall_height_max = 2.0;
  double stone_width_easy = 0.45;
  double stone_width_hard = 0.20;
  double stone_gap_easy = 0.05;   // governing ramp for Stones
  double stone_gap_hard = 0.25;
  double stone_height_jitter_base = 0.05;
  double stone_height_jitter_ramp = 0.05;
};

struct TerrainSpec {
  TerrainFamily family = TerrainFamily::Rough;
  double difficulty = 0.0;  // clamped to [0, 1]
  std::uint64_t seed = 0;
  RobotProfile robot_profile = RobotProfile::QuadrupedA;

  double tile_length_m = 8.0;
  double tile_width_m = 8.0;
  double resolution = 0.04;
  TerrainTuning tuning;

  double clamped_difficulty() const { return std::clamp(difficulty, 0.0, 1.0); }
};

// Endpoints of the per-family difficulty ramp for the governing parameter.
// Slopes are in degrees, densities in 1/m^2, counts in boxes; everything
// else is meters.
inline std::pair<double, double> family_ramp(TerrainFamily f, RobotProfile p) {
  const bool quad = (p == RobotProfile::QuadrupedA);
  switch (f) {
    case TerrainFamily::Rough: return {0.0, quad ? 0.2 : 0.15};
    case TerrainFamily::StairDown: return {5.0, 45.0};
    case TerrainFamily::StairUp: return {5.0, 45.0};
    case TerrainFamily::Boxes: return {0.05, quad ? 0.4 : 0.3};
    case TerrainFamily::Obstacles: return {0.0, 0.5};
    case TerrainFamily::ClimbUp: return {0.1, quad ? 1.0 : 0.48};
    case TerrainFamily::ClimbDown: return {0.2, quad ? 1.0 : 0.88};
    case TerrainFamily::ClimbConsecutive: return {0.05, quad ? 0.5 : 0.3};
    case TerrainFamily::Gap: return {0.1, quad ? 1.1 : 0.6};
    case TerrainFamily::Pallets: return {0.4, 0.16};
    case TerrainFamily::Stones: return {0.05, 0.25};
    case TerrainFamily::Beam: return {0.9, 0.18};
    case TerrainFamily::StackedBoxes: return {0.05, 0.35};
    case TerrainFamily::RandomHeightfield: return {0.05, 0.8};
    case TerrainFamily::FloatingBoxes: return {6.0, 16.0};
  }
  return {0.0, 0.0};
}

inline double governing_parameter(const TerrainSpec& spec) {
  const auto [lo, hi] = family_ramp(spec.family, spec.robot_profile);
  return lerp(lo, hi, spec.clamped_difficulty());
}

// Second ramp for ClimbConsecutive (outer ring height).
inline double climb_consecutive_second_height(const TerrainSpec& spec) {
  const bool quad = (spec.robot_profile == RobotProfile::QuadrupedA);
  return lerp(0.05, quad ? 0.4 : 0.3, spec.clamped_difficulty());
}

inline bool is_sparse_family(TerrainFamily f) {
  return f == TerrainFamily::Gap || f == TerrainFamily::Pallets ||
         f == TerrainFamily::Stones || f == TerrainFamily::Beam;
}

// Families whose goals live in the far-end region instead of anywhere.
inline bool is_cross_family(TerrainFamily f) {
  switch (f) {
    case TerrainFamily::ClimbUp:
    case TerrainFamily::ClimbDown:
    case TerrainFamily::ClimbConsecutive:
    case TerrainFamily::Gap:
    case TerrainFamily::Pallets:
    case TerrainFamily::Beam:
      return true;
    default:
      return false;
  }
}

namespace detail {

// Half of the sparse fields get a solid floor under the air cells, the rest
// stay void. Floor height uniform in [-1.5, -0.35].
inline std::optional<double> sparse_floor(Rng& rng) {
  const bool has_floor = rng.bernoulli(0.5);
  const double height = rng.uniform(-1.5, -0.35);
  return has_floor ? std::optional<double>(height) : std::nullopt;
}

inline void put_air(Heightfield& hf, int ix, int iy,
                    const std::optional<double>& floor) {
  if (floor)
    hf.elevations.at(ix, iy) = *floor;
  else
    hf.set_void(ix, iy);
}

inline double cell_cx(const Heightfield& hf, int ix) {
  return (ix + 0.5) * hf.resolution;
}
inline double cell_cy(const Heightfield& hf, int iy) {
  return (iy + 0.5) * hf.resolution;
}

inline void set_box(Heightfield& hf, double x0, double y0, double x1,
                    double y1, double value, bool additive = false) {
  const int ix0 = std::max(0, hf.cell_x(x0));
  const int ix1 = std::min(hf.length_cells - 1, hf.cell_x(x1));
  const int iy0 = std::max(0, hf.cell_y(y0));
  const int iy1 = std::min(hf.width_cells - 1, hf.cell_y(y1));
  for (int ix = ix0; ix <= ix1; ++ix)
    for (int iy = iy0; iy <= iy1; ++iy) {
      if (additive)
        hf.elevations.at(ix, iy) += value;
      else
        hf.elevations.at(ix, iy) = value;
    }
}

inline Heightfield make_tile(const TerrainSpec& spec) {
  const int L = std::max(2, int(std::round(spec.tile_length_m / spec.resolution)));
  const int W = std::max(2, int(std::round(spec.tile_width_m / spec.resolution)));
  return Heightfield(L, W, spec.resolution, 0.0);
}

inline void gen_rough(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                      double amp) {
  for (auto& e : hf.elevations.data) e = rng.uniform(-amp, amp);
}

inline void gen_stairs(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                       double slope_deg, bool ascending) {
  const double slope = std::tan(deg_to_rad(slope_deg));
  const double x_start = 1.5;
  const double x_end = hf.size_x() - 1.5;

  // Tread widths are drawn first so elevation is a pure function of x.
  std::vector<std::pair<double, double>> steps;  // (x at step start, z)
  double x = x_start, z = 0.0;
  while (x < x_end) {
    const double tread = rng.uniform(0.25, 0.45);
    steps.push_back({x, z});
    z += (ascending ? 1.0 : -1.0) * slope * tread;
    x += tread;
  }
  const double z_final = steps.empty() ? 0.0 : z;

  for (int ix = 0; ix < hf.length_cells; ++ix) {
    const double cx = cell_cx(hf, ix);
    double e = 0.0;
    if (cx >= x_end)
      e = z_final;
    else if (cx >= x_start) {
      for (auto it = steps.rbegin(); it != steps.rend(); ++it)
        if (cx >= it->first) {
          e = it->second;
          break;
        }
    }
    for (int iy = 0; iy < hf.width_cells; ++iy) hf.elevations.at(ix, iy) = e;
  }

  // Random walls on both sides, height varying per 1 m segment.
  const auto& t = spec.tuning;
  for (int side = 0; side < 2; ++side) {
    if (!rng.bernoulli(t.wall_probability)) continue;
    const std::uint64_t wall_seed = rng.next_u64();
    const int wall_cells = std::max(1, int(std::round(t.wall_width / hf.resolution)));
    for (int ix = 0; ix < hf.length_cells; ++ix) {
      const int segment = int(cell_cx(hf, ix));
      const double h =
          t.wall_height_min + (t.wall_height_max - t.wall_height_min) *
                                  counter_uniform(wall_seed, segment);
      for (int k = 0; k < wall_cells; ++k) {
        const int iy = side == 0 ? k : hf.width_cells - 1 - k;
        hf.elevations.at(ix, iy) += h;
      }
    }
  }
}

inline void gen_boxes(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                      double max_height) {
  const int count = 30;
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, hf.size_x());
    const double cy = rng.uniform(0.0, hf.size_y());
    const double lx = rng.uniform(0.3, 1.2);
    const double ly = rng.uniform(0.3, 1.2);
    const double h = rng.uniform(0.05, std::max(0.05 + 1e-9, max_height));
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    set_box(hf, cx - lx / 2, cy - ly / 2, cx + lx / 2, cy + ly / 2, sign * h);
  }
}

inline void gen_obstacles(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                          double density) {
  const double grade = rng.uniform(0.0, 0.18);
  const double dir = rng.uniform(0.0, 2.0 * kPi);
  const double nx = std::cos(dir), ny = std::sin(dir);
  const double mx = hf.size_x() / 2, my = hf.size_y() / 2;
  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy)
      hf.elevations.at(ix, iy) =
          std::tan(grade) *
          ((cell_cx(hf, ix) - mx) * nx + (cell_cy(hf, iy) - my) * ny);

  const int count = int(std::round(density * hf.size_x() * hf.size_y()));
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, hf.size_x());
    const double cy = rng.uniform(0.0, hf.size_y());
    const double r = rng.uniform(0.15, 0.45);
    const double h = rng.uniform(0.1, 0.5) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    const int ix0 = std::max(0, hf.cell_x(cx - r));
    const int ix1 = std::min(hf.length_cells - 1, hf.cell_x(cx + r));
    const int iy0 = std::max(0, hf.cell_y(cy - r));
    const int iy1 = std::min(hf.width_cells - 1, hf.cell_y(cy + r));
    for (int ix = ix0; ix <= ix1; ++ix)
      for (int iy = iy0; iy <= iy1; ++iy) {
        const double dx = cell_cx(hf, ix) - cx, dy = cell_cy(hf, iy) - cy;
        if (dx * dx + dy * dy <= r * r) hf.elevations.at(ix, iy) += h;
      }
  }
}

// Single step across the tile; edge cells jittered by up to 20% of the
// height. `high_first` selects which side of the edge is elevated.
inline void gen_single_step(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                            double height, bool high_first) {
  const double xe = hf.size_x() / 2;
  const double band = 3.0 * hf.resolution;
  const std::uint64_t edge_seed = rng.next_u64();
  for (int ix = 0; ix < hf.length_cells; ++ix) {
    const double cx = cell_cx(hf, ix);
    const bool high = high_first ? (cx < xe) : (cx >= xe);
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      double e = high ? height : 0.0;
      if (std::abs(cx - xe) <= band) {
        const double u = counter_uniform(edge_seed, ix, iy);
        e += (2.0 * u - 1.0) * 0.2 * height;
      }
      hf.elevations.at(ix, iy) = e;
    }
  }
}

inline void gen_climb_consecutive(const TerrainSpec& spec, Heightfield& hf,
                                  Rng& rng, double h1, double h2) {
  const double cx = hf.size_x() / 2, cy = hf.size_y() / 2;
  const double r0 = 1.2, band = 0.8;
  const std::uint64_t edge_seed = rng.next_u64();
  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      const double dx = std::abs(cell_cx(hf, ix) - cx);
      const double dy = std::abs(cell_cy(hf, iy) - cy);
      const double d = std::max(dx, dy);
      double e = 0.0;
      if (d < r0)
        e = 0.0;
      else if (d < r0 + band)
        e = h1;
      else if (d < r0 + 2 * band)
        e = h1 + h2;
      else if (d < r0 + 3 * band)
        e = h1;
      else
        e = 0.0;
      // Jitter near ring boundaries, proportional to the local step height.
      const double m = std::fmod(d - r0 + 100.0 * band, band);
      const double dist_to_edge = std::min(m, band - m);
      if (d >= r0 - 0.1 && d <= r0 + 3 * band + 0.1 && dist_to_edge < 0.1) {
        const double u = counter_uniform(edge_seed, ix, iy);
        e += (2.0 * u - 1.0) * 0.2 * std::min(h1, h2);
      }
      hf.elevations.at(ix, iy) = e;
    }
}

inline void gen_gap(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                    double distance) {
  const auto floor = sparse_floor(rng);
  const double dz = rng.uniform(-0.3, 0.3) * distance;
  const double gx0 = hf.size_x() / 2 - distance / 2;
  const double gx1 = gx0 + distance;
  const std::uint64_t edge_seed = rng.next_u64();
  for (int iy = 0; iy < hf.width_cells; ++iy) {
    const double j0 = (2.0 * counter_uniform(edge_seed, iy, 0) - 1.0) * 0.1 * distance;
    const double j1 = (2.0 * counter_uniform(edge_seed, iy, 1) - 1.0) * 0.1 * distance;
    for (int ix = 0; ix < hf.length_cells; ++ix) {
      const double cx = cell_cx(hf, ix);
      if (cx >= gx0 + j0 && cx < gx1 + j1)
        put_air(hf, ix, iy, floor);
      else
        hf.elevations.at(ix, iy) = cx >= gx1 + j1 ? dz : 0.0;
    }
  }
}

inline void gen_pallets(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                        double beam_width) {
  const bool quad = (spec.robot_profile == RobotProfile::QuadrupedA);
  const double d = spec.clamped_difficulty();
  const double gap_w = lerp(0.08, quad ? 0.35 : 0.2, d);
  const double dh = lerp(0.0, quad ? 0.3 : 0.2, d);
  const auto floor = sparse_floor(rng);
  const double theta = rng.uniform(-0.5, 0.5);  // pattern normal vs +x
  const double period = beam_width + gap_w;
  const double phase = rng.uniform(0.0, period);
  const std::uint64_t beam_seed = rng.next_u64();
  const double nx = std::cos(theta), ny = std::sin(theta);

  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      const double cx = cell_cx(hf, ix), cy = cell_cy(hf, iy);
      if (cx < 1.2 || cx > hf.size_x() - 1.2) {
        hf.elevations.at(ix, iy) = 0.0;  // start and goal platforms
        continue;
      }
      const double u = cx * nx + cy * ny - phase;
      const double k = std::floor(u / period);
      const double frac = u - k * period;
      if (frac < beam_width) {
        const double h = (counter_uniform(beam_seed, std::uint64_t(std::llround(k) + (1 << 20))) - 0.5) * dh;
        hf.elevations.at(ix, iy) = h;
      } else {
        put_air(hf, ix, iy, floor);
      }
    }
}

inline void gen_stones(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                       double gap_w) {
  const auto& t = spec.tuning;
  const double d = spec.clamped_difficulty();
  const double sw = lerp(t.stone_width_easy, t.stone_width_hard, d);
  const double hj = t.stone_height_jitter_base + t.stone_height_jitter_ramp * d;
  const auto floor = sparse_floor(rng);
  const double period = sw + gap_w;
  const std::uint64_t stone_seed = rng.next_u64();

  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      const double cx = cell_cx(hf, ix), cy = cell_cy(hf, iy);
      const std::int64_t kx = std::int64_t(std::floor(cx / period));
      const std::int64_t ky = std::int64_t(std::floor(cy / period));
      const double jx = (counter_uniform(stone_seed, kx, ky, 0) - 0.5) * gap_w;
      const double jy = (counter_uniform(stone_seed, kx, ky, 1) - 0.5) * gap_w;
      const double sx = (kx + 0.5) * period + jx;
      const double sy = (ky + 0.5) * period + jy;
      if (std::abs(cx - sx) <= sw / 2 && std::abs(cy - sy) <= sw / 2) {
        const double top = (2.0 * counter_uniform(stone_seed, kx, ky, 2) - 1.0) * hj;
        hf.elevations.at(ix, iy) = top;
      } else {
        put_air(hf, ix, iy, floor);
      }
    }
}

inline void gen_beam(const TerrainSpec& spec, Heightfield& hf, Rng& rng,
                     double beam_width) {
  const auto floor = sparse_floor(rng);
  const double dz = rng.uniform(-0.2, 0.2);
  const double roll = rng.uniform(-0.1, 0.1);
  const double yaw = rng.uniform(-0.1, 0.1);
  const double x0 = 2.0, x1 = hf.size_x() - 2.0;
  const double cy = hf.size_y() / 2;

  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      const double px = cell_cx(hf, ix), py = cell_cy(hf, iy);
      if (px < x0) {
        hf.elevations.at(ix, iy) = 0.0;
        continue;
      }
      if (px > x1) {
        hf.elevations.at(ix, iy) = dz;
        continue;
      }
      const double s = (px - x0) / (x1 - x0);
      const double center_y = cy + std::tan(yaw) * (px - hf.size_x() / 2);
      if (std::abs(py - center_y) <= beam_width / 2) {
        hf.elevations.at(ix, iy) = dz * s + std::tan(roll) * (py - center_y);
      } else {
        put_air(hf, ix, iy, floor);
      }
    }
}

inline void gen_stacked_boxes(const TerrainSpec& spec, Heightfield& hf,
                              Rng& rng, double max_height) {
  for (auto& e : hf.elevations.data) e = rng.uniform(-0.02, 0.02);
  const int count = 18;
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, hf.size_x());
    const double cy = rng.uniform(0.0, hf.size_y());
    const double lx = rng.uniform(0.4, 1.5);
    const double ly = rng.uniform(0.4, 1.5);
    const double h = rng.uniform(0.05, std::max(0.05 + 1e-9, max_height));
    set_box(hf, cx - lx / 2, cy - ly / 2, cx + lx / 2, cy + ly / 2, h,
            /*additive=*/true);
  }
}

inline void gen_random_heightfield(const TerrainSpec& spec, Heightfield& hf,
                                   Rng& rng, double amplitude) {
  const double feature = rng.uniform(0.25, 0.8);
  const int cl = std::max(2, int(std::ceil(hf.size_x() / feature)) + 1);
  const int cw = std::max(2, int(std::ceil(hf.size_y() / feature)) + 1);
  Grid coarse(cl, cw, 0.0);
  for (auto& v : coarse.data) v = rng.uniform(-amplitude, amplitude);
  for (int ix = 0; ix < hf.length_cells; ++ix)
    for (int iy = 0; iy < hf.width_cells; ++iy) {
      const double gx = std::min(cell_cx(hf, ix) / feature, double(cl - 1) - 1e-9);
      const double gy = std::min(cell_cy(hf, iy) / feature, double(cw - 1) - 1e-9);
      const int i0 = int(gx), j0 = int(gy);
      const double fx = gx - i0, fy = gy - j0;
      const double v00 = coarse.at(i0, j0), v10 = coarse.at(i0 + 1, j0);
      const double v01 = coarse.at(i0, j0 + 1), v11 = coarse.at(i0 + 1, j0 + 1);
      hf.elevations.at(ix, iy) =
          lerp(lerp(v00, v10, fx), lerp(v01, v11, fx), fy);
    }
}

inline void gen_floating_boxes(const TerrainSpec& spec, Heightfield& hf,
                               Rng& rng, double count_param) {
  for (auto& e : hf.elevations.data) e = rng.uniform(-0.03, 0.03);
  hf.ensure_overlay();
  const int count = int(std::round(count_param));
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.5, hf.size_x() - 0.5);
    const double cy = rng.uniform(0.5, hf.size_y() - 0.5);
    const double lx = rng.uniform(0.4, 1.2);
    const double ly = rng.uniform(0.4, 1.2);
    const double bottom = rng.uniform(0.25, 1.2);
    const double top = bottom + rng.uniform(0.08, 0.3);
    const int ix0 = std::max(0, hf.cell_x(cx - lx / 2));
    const int ix1 = std::min(hf.length_cells - 1, hf.cell_x(cx + lx / 2));
    const int iy0 = std::max(0, hf.cell_y(cy - ly / 2));
    const int iy1 = std::min(hf.width_cells - 1, hf.cell_y(cy + ly / 2));
    for (int ix = ix0; ix <= ix1; ++ix)
      for (int iy = iy0; iy <= iy1; ++iy) {
        if (hf.overlay_mask.at(ix, iy)) {
          hf.overlay_bottom.at(ix, iy) = std::min(hf.overlay_bottom.at(ix, iy), bottom);
          hf.overlay_top.at(ix, iy) = std::max(hf.overlay_top.at(ix, iy), top);
        } else {
          hf.overlay_mask.at(ix, iy) = 1;
          hf.overlay_bottom.at(ix, iy) = bottom;
          hf.overlay_top.at(ix, iy) = top;
        }
      }
  }
}

}  // namespace detail

inline Heightfield generate_terrain(const TerrainSpec& spec) {
  Heightfield hf = detail::make_tile(spec);
  Rng rng(derive_seed(spec.seed, std::uint64_t(spec.family),
                      std::uint64_t(spec.robot_profile)));
  const double g = governing_parameter(spec);
  using F = TerrainFamily;
  switch (spec.family) {
    case F::Rough: detail::gen_rough(spec, hf, rng, g); break;
    case F::StairDown: detail::gen_stairs(spec, hf, rng, g, false); break;
    case F::StairUp: detail::gen_stairs(spec, hf, rng, g, true); break;
    case F::Boxes: detail::gen_boxes(spec, hf, rng, g); break;
    case F::Obstacles: detail::gen_obstacles(spec, hf, rng, g); break;
    case F::ClimbUp: detail::gen_single_step(spec, hf, rng, g, false); break;
    case F::ClimbDown: detail::gen_single_step(spec, hf, rng, g, true); break;
    case F::ClimbConsecutive:
      detail::gen_climb_consecutive(spec, hf, rng, g,
                                    climb_consecutive_second_height(spec));
      break;
    case F::Gap: detail::gen_gap(spec, hf, rng, g); break;
    case F::Pallets: detail::gen_pallets(spec, hf, rng, g); break;
    case F::Stones: detail::gen_stones(spec, hf, rng, g); break;
    case F::Beam: detail::gen_beam(spec, hf, rng, g); break;
    case F::StackedBoxes: detail::gen_stacked_boxes(spec, hf, rng, g); break;
    case F::RandomHeightfield:
      detail::gen_random_heightfield(spec, hf, rng, g);
      break;
    case F::FloatingBoxes: detail::gen_floating_boxes(spec, hf, rng, g); break;
  }
  return hf;
}

struct GoalSample {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

inline GoalSample sample_goal(const TerrainSpec& spec, const Heightfield& field,
                              std::uint64_t rng_seed) {
  const double margin = 0.4;
  const double x_min =
      is_cross_family(spec.family) ? 0.8 * field.size_x() : margin;
  const double x_max = field.size_x() - margin;
  const double y_min = margin, y_max = field.size_y() - margin;

  std::vector<std::pair<int, int>> candidates;
  for (int ix = 0; ix < field.length_cells; ++ix) {
    const double cx = detail::cell_cx(field, ix);
    if (cx < x_min || cx > x_max) continue;
    for (int iy = 0; iy < field.width_cells; ++iy) {
      const double cy = detail::cell_cy(field, iy);
      if (cy < y_min || cy > y_max) continue;
      if (!field.is_void(ix, iy)) candidates.push_back({ix, iy});
    }
  }
  if (candidates.empty()) throw NoValidGoal("no non-void goal cell in region");

  Rng rng(derive_seed(rng_seed, 0x60a1));
  const auto [ix, iy] = candidates[size_t(rng.uniform_int(0, std::int64_t(candidates.size()) - 1))];
  return {detail::cell_cx(field, ix), detail::cell_cy(field, iy),
          rng.uniform(-kPi, kPi)};
}

// Appendix-style training proportions for the locomotion families.
inline std::map<TerrainFamily, double> locomotion_mix() {
  return {
      {TerrainFamily::Rough, 0.05},    {TerrainFamily::StairDown, 0.05},
      {TerrainFamily::StairUp, 0.05},  {TerrainFamily::Boxes, 0.05},
      {TerrainFamily::Obstacles, 0.05},{TerrainFamily::ClimbUp, 0.20},
      {TerrainFamily::ClimbDown, 0.05},{TerrainFamily::ClimbConsecutive, 0.05},
      {TerrainFamily::Gap, 0.05},      {TerrainFamily::Pallets, 0.05},
      {TerrainFamily::Stones, 0.30},   {TerrainFamily::Beam, 0.05},
  };
}

// Mapping-model training proportions: locomotion families scaled to 40%,
// plus the three mesh families used only for mapping data.
inline std::map<TerrainFamily, double> mapping_mix() {
  std::map<TerrainFamily, double> m;
  for (const auto& [f, p] : locomotion_mix()) m[f] = 0.4 * p;
  m[TerrainFamily::StackedBoxes] = 0.2;
  m[TerrainFamily::RandomHeightfield] = 0.2;
  m[TerrainFamily::FloatingBoxes] = 0.2;
  return m;
}

// Largest-remainder apportionment of `count` specs over the proportions.
// Each spec receives a derived seed and a uniform difficulty.
inline std::vector<TerrainSpec> terrain_mix(
    const std::map<TerrainFamily, double>& proportions, int count,
    std::uint64_t seed, RobotProfile profile = RobotProfile::QuadrupedA) {
  double sum = 0.0;
  for (const auto& [f, p] : proportions) {
    if (p < 0.0) throw BadProportions("negative terrain proportion");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw BadProportions("terrain proportions must sum to 1");

  struct Quota {
    TerrainFamily family;
    int base;
    double remainder;
  };
  std::vector<Quota> quotas;
  int assigned = 0;
  for (const auto& [f, p] : proportions) {
    const double exact = p * count;
    const int base = int(std::floor(exact + 1e-9));
    quotas.push_back({f, base, exact - base});
    assigned += base;
  }
  std::stable_sort(quotas.begin(), quotas.end(),
                   [](const Quota& a, const Quota& b) {
                     return a.remainder > b.remainder;
                   });
  for (int i = 0; assigned < count; ++i, ++assigned)
    quotas[size_t(i) % quotas.size()].base += 1;

  std::vector<TerrainFamily> families;
  for (const auto& q : quotas)
    for (int i = 0; i < q.base; ++i) families.push_back(q.family);
  std::sort(families.begin(), families.end());

  Rng rng(derive_seed(seed, 0x301d));
  for (size_t i = families.size(); i > 1; --i)
    std::swap(families[i - 1], families[size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);

  std::vector<TerrainSpec> specs;
  specs.reserve(families.size());
  for (size_t i = 0; i < families.size(); ++i) {
    TerrainSpec s;
    s.family = families[i];
    s.difficulty = rng.uniform();
    s.seed = derive_seed(seed, 0x5bec, i);
    s.robot_profile = profile;
    specs.push_back(s);
  }
  return specs;
}

}  // namespace elemap
