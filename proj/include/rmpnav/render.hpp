#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmpnav/io.hpp"
#include "rmpnav/sim.hpp"

namespace rmpnav {

/// Whole-world filter snapshot for rendering: ground truth sensed
/// without occlusion, seeded at the reference goal. Decoupled from the
/// robot-centered windows the run itself used.
inline std::shared_ptr<const MapSnapshot> globalSnapshot(const Scenario& scenario,
                                                         const FilterParams& params = {}) {
  const World& w = scenario.world;
  const Pose2 center(0.5 * (w.x_min + w.x_max), 0.5 * (w.y_min + w.y_max), 0.0);
  const GridGeometry geometry(w.x_max - w.x_min, w.y_max - w.y_min, scenario.map.resolution);
  const GridMap sensed = sense(w, center, geometry, /*occlusion=*/false);
  return runFilterChain(sensed, scenario.path.back().translation(), params, 0.0);
}

namespace detail {

inline void paintDisc(std::vector<Rgb>& pixels, const GridGeometry& geo, const Eigen::Vector2d& p,
                      int radius_px, Rgb color) {
  const auto idx = geo.worldToIndex(p);
  if (!idx) return;
  for (int dy = -radius_px; dy <= radius_px; ++dy) {
    for (int dx = -radius_px; dx <= radius_px; ++dx) {
      if (dx * dx + dy * dy > radius_px * radius_px) continue;
      const CellIndex c{idx->ix + dx, idx->iy + dy};
      if (!geo.isInside(c)) continue;
      // Image row 0 is the top of the picture, grid row 0 the bottom.
      pixels[static_cast<std::size_t>(geo.ny() - 1 - c.iy) * geo.nx() + c.ix] = color;
    }
  }
}

inline void paintPolyline(std::vector<Rgb>& pixels, const GridGeometry& geo,
                          const std::vector<Eigen::Vector2d>& points, Rgb color) {
  const double step = 0.5 * geo.resolution();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Eigen::Vector2d d = points[i + 1] - points[i];
    const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / step)));
    for (int k = 0; k <= n; ++k) {
      paintDisc(pixels, geo, points[i] + (static_cast<double>(k) / n) * d, 0, color);
    }
  }
}

}  // namespace detail

/// Fixed colormap: field values in grayscale over their finite range,
/// NaN dark blue, +inf white; reference path green, executed trajectory
/// red, start cyan, goal yellow.
inline void renderFieldWithOverlay(const std::string& path, const MapSnapshot& snap,
                                   const std::string& layer, const Scenario& scenario,
                                   const RunResult* result) {
  const GridGeometry& geo = snap.map.geometry();
  const std::vector<double>& values = snap.map.layer(layer);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  std::vector<Rgb> pixels(geo.cellCount());
  for (int iy = 0; iy < geo.ny(); ++iy) {
    for (int ix = 0; ix < geo.nx(); ++ix) {
      const double v = values[static_cast<std::size_t>(iy) * geo.nx() + ix];
      Rgb color;
      if (std::isnan(v)) {
        color = {0, 0, 96};
      } else if (std::isinf(v)) {
        color = {255, 255, 255};
      } else {
        const auto g =
            static_cast<std::uint8_t>(std::lround(std::clamp((v - lo) / (hi - lo), 0.0, 1.0) * 255));
        color = {g, g, g};
      }
      pixels[static_cast<std::size_t>(geo.ny() - 1 - iy) * geo.nx() + ix] = color;
    }
  }

  std::vector<Eigen::Vector2d> reference;
  for (const Pose2& p : scenario.path) reference.push_back(p.translation());
  detail::paintPolyline(pixels, geo, reference, {0, 190, 0});
  if (result) {
    std::vector<Eigen::Vector2d> executed;
    for (const TickLog& tick : result->ticks) executed.push_back(tick.pose.translation());
    detail::paintPolyline(pixels, geo, executed, {230, 30, 30});
  }
  detail::paintDisc(pixels, geo, scenario.start.translation(), 2, {0, 200, 255});
  detail::paintDisc(pixels, geo, scenario.path.back().translation(), 2, {255, 220, 0});

  writePpm(path, pixels, geo.nx(), geo.ny());
}

/// Writes the standard render set: raw 16-bit fields plus color
/// overlays for traversability, SDF, and GDF.
inline void renderRun(const std::string& out_dir, const Scenario& scenario,
                      const RunResult* result) {
  const auto snap = globalSnapshot(scenario);
  const GridGeometry& geo = snap->map.geometry();
  const auto range = [&](const std::string& layer) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : snap->map.layer(layer)) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(hi > lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    return std::make_pair(lo, hi);
  };
  for (const std::string layer : {"traversability", "f_sdf", "f_gdf"}) {
    const auto [lo, hi] = range(layer);
    writePgm16(out_dir + "/" + layer + ".pgm", snap->map.layer(layer), geo.nx(), geo.ny(), lo, hi);
    renderFieldWithOverlay(out_dir + "/" + layer + ".ppm", *snap, layer, scenario, result);
  }
}

}  // namespace rmpnav
