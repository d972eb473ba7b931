#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "rmpnav/edt.hpp"
#include "rmpnav/fmm.hpp"
#include "rmpnav/grid_map.hpp"
#include "rmpnav/image_ops.hpp"

namespace rmpnav {

struct FilterParams {
  double inpaint_radius = 0.10;          // meters
  double slope_critical = 0.4;           // radians
  int roughness_window = 2;              // half-width in cells
  double roughness_critical = 0.08;      // meters
  double traversability_threshold = 0.5; // in (0,1)
  double gradient_sigma = 2.0;           // Gaussian sigma in cells
  double min_goal_clearance = 0.25;      // meters; islands narrower than this never host the GDF seed
};

/// Immutable output of the filter chain. Layers:
///   elevation_filled, traversability, traversability_binary,
///   f_sdf, grad_sdf_x, grad_sdf_y, f_gdf, grad_gdf_x, grad_gdf_y.
/// f_gdf holds +inf on non-traversable and unreachable cells; the gradient
/// layers hold unit vectors (or (0,0) on plateaus).
struct MapSnapshot {
  GridMap map;
  CellIndex goal_seed;
  double timestamp = 0.0;
  bool gdf_valid = false;

  explicit MapSnapshot(GridMap m) : map(std::move(m)) {}
};

struct FilterTimings {
  double inpaint_ms = 0.0;
  double traversability_ms = 0.0;
  double sdf_ms = 0.0;
  double gdf_ms = 0.0;
  double total_ms = 0.0;
};

/// Fills every NaN cell whose nearest valid cell lies within `radius`
/// meters with that cell's value; ties break toward the lowest row-major
/// source index. Cells farther than the radius stay NaN.
inline std::vector<double> inpaint(const std::vector<double>& elevation, int nx, int ny,
                                   double resolution, double radius) {
  std::vector<double> out = elevation;
  const int window = static_cast<int>(std::ceil(radius / resolution));
  const double max_d2 = (radius / resolution) * (radius / resolution);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (!std::isnan(elevation[i])) continue;
      double best_d2 = std::numeric_limits<double>::infinity();
      double best_value = std::numeric_limits<double>::quiet_NaN();
      for (int jy = std::max(0, iy - window); jy <= std::min(ny - 1, iy + window); ++jy) {
        for (int jx = std::max(0, ix - window); jx <= std::min(nx - 1, ix + window); ++jx) {
          const std::size_t j = static_cast<std::size_t>(jy) * nx + jx;
          if (std::isnan(elevation[j])) continue;
          const double d2 = static_cast<double>(jx - ix) * (jx - ix) +
                            static_cast<double>(jy - iy) * (jy - iy);
          if (d2 <= max_d2 && d2 < best_d2) {
            best_d2 = d2;
            best_value = elevation[j];
          }
        }
      }
      if (!std::isnan(best_value)) out[i] = best_value;
    }
  }
  return out;
}

/// Continuous traversability in [0,1] from slope (central differences,
/// one-sided at borders and next to NaN cells) and roughness (standard
/// deviation of elevation in the (2w+1)^2 window, NaN cells skipped):
/// clamp(1 - max(slope/slope_critical, roughness/roughness_critical)).
/// NaN cells score 0.
inline std::vector<double> traversability(const std::vector<double>& elevation, int nx, int ny,
                                          double resolution, const FilterParams& p) {
  std::vector<double> out(elevation.size(), 0.0);
  const auto value = [&](int ix, int iy) -> double {
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);
    return elevation[static_cast<std::size_t>(iy) * nx + ix];
  };
  const auto slopeComponent = [&](double center, double minus, double plus) -> double {
    const bool m_ok = !std::isnan(minus);
    const bool p_ok = !std::isnan(plus);
    if (m_ok && p_ok) return (plus - minus) / (2.0 * resolution);
    if (p_ok) return (plus - center) / resolution;
    if (m_ok) return (center - minus) / resolution;
    return 0.0;
  };
  const int w = p.roughness_window;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      const double z = elevation[i];
      if (std::isnan(z)) continue;

      const double dzdx = slopeComponent(z, value(ix - 1, iy), value(ix + 1, iy));
      const double dzdy = slopeComponent(z, value(ix, iy - 1), value(ix, iy + 1));
      const double slope = std::atan(std::hypot(dzdx, dzdy));

      double sum = 0.0;
      double sum_sq = 0.0;
      int count = 0;
      for (int jy = std::max(0, iy - w); jy <= std::min(ny - 1, iy + w); ++jy) {
        for (int jx = std::max(0, ix - w); jx <= std::min(nx - 1, ix + w); ++jx) {
          const double v = elevation[static_cast<std::size_t>(jy) * nx + jx];
          if (std::isnan(v)) continue;
          sum += v;
          sum_sq += v * v;
          ++count;
        }
      }
      double roughness = 0.0;
      if (count > 1) {
        const double mean = sum / count;
        roughness = std::sqrt(std::max(0.0, sum_sq / count - mean * mean));
      }

      const double worst = std::max(slope / p.slope_critical, roughness / p.roughness_critical);
      out[i] = std::clamp(1.0 - worst, 0.0, 1.0);
    }
  }
  return out;
}

/// 1 where value >= threshold, else 0.
inline std::vector<double> binarize(const std::vector<double>& traversability_layer,
                                    double threshold) {
  std::vector<double> out(traversability_layer.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = traversability_layer[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

namespace detail {

inline void smoothedUnitGradients(const std::vector<double>& field, int nx, int ny,
                                  double resolution, double sigma, std::vector<double>& gx,
                                  std::vector<double>& gy) {
  const std::vector<double> smoothed = gaussianBlur(field, nx, ny, sigma);
  sobelGradients(smoothed, nx, ny, resolution, gx, gy);
  normalizeField(gx, gy);
}

}  // namespace detail

namespace detail {

/// 4-connected component labels over the traversable cells (-1 where
/// non-traversable), matching the adjacency the wavefront can cross.
inline std::vector<int> labelComponents(const std::vector<double>& binary, int nx, int ny) {
  std::vector<int> labels(binary.size(), -1);
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t start = 0; start < binary.size(); ++start) {
    if (binary[start] < 0.5 || labels[start] >= 0) continue;
    const int label = next++;
    labels[start] = label;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int ix = static_cast<int>(i) % nx;
      const int iy = static_cast<int>(i) / nx;
      const auto visit = [&](int jx, int jy) {
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) return;
        const std::size_t j = static_cast<std::size_t>(jy) * nx + jx;
        if (binary[j] < 0.5 || labels[j] >= 0) return;
        labels[j] = label;
        stack.push_back(j);
      };
      visit(ix - 1, iy);
      visit(ix + 1, iy);
      visit(ix, iy - 1);
      visit(ix, iy + 1);
    }
  }
  return labels;
}

}  // namespace detail

/// Picks the wavefront seed for a goal: the goal cell, clamped into the
/// map when outside, then moved to the nearest traversable cell when the
/// cell itself is blocked (ties toward the lowest row-major index).
/// Traversable islands too narrow for the body never host the seed:
/// occlusion shadows filled from a tall neighbor and the flat tops of
/// wide obstacles read as locally drivable, and seeding one would strand
/// the wavefront on a handful of cells no body can stand on. A connected
/// component qualifies only if its interior clearance (max SDF over the
/// component) reaches min_clearance; when none qualifies the rule falls
/// back to plain nearest-traversable. Empty when no traversable cell
/// exists at all.
inline std::optional<CellIndex> selectGoalSeed(const GridGeometry& geometry,
                                               const std::vector<double>& binary,
                                               const std::vector<double>& f_sdf,
                                               double min_clearance,
                                               const Eigen::Vector2d& goal_world) {
  Eigen::Vector2d goal = goal_world;
  const Eigen::Vector2d center = geometry.origin().translation();
  const double margin = 1e-9 * geometry.resolution();
  goal.x() = std::clamp(goal.x(), center.x() - 0.5 * geometry.lengthX(),
                        center.x() + 0.5 * geometry.lengthX() - margin);
  goal.y() = std::clamp(goal.y(), center.y() - 0.5 * geometry.lengthY(),
                        center.y() + 0.5 * geometry.lengthY() - margin);
  const auto cell = geometry.worldToIndex(goal);
  if (!cell) return std::nullopt;

  const int nx = geometry.nx();
  const int ny = geometry.ny();
  const std::vector<int> labels = detail::labelComponents(binary, nx, ny);
  std::vector<double> clearance;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    const int label = labels[i];
    if (label < 0) continue;
    if (label >= static_cast<int>(clearance.size())) clearance.resize(label + 1, 0.0);
    clearance[label] = std::max(clearance[label], f_sdf[i]);
  }
  bool any_qualifies = false;
  for (const double c : clearance) any_qualifies |= c >= min_clearance;
  const auto eligible = [&](std::size_t i) {
    return labels[i] >= 0 && (!any_qualifies || clearance[labels[i]] >= min_clearance);
  };

  const std::size_t goal_index = geometry.linearIndex(*cell);
  if (binary[goal_index] >= 0.5 && eligible(goal_index)) return cell;

  double best_d2 = std::numeric_limits<double>::infinity();
  std::optional<CellIndex> best;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (binary[i] < 0.5 || !eligible(i)) continue;
      const double d2 = static_cast<double>(ix - cell->ix) * (ix - cell->ix) +
                        static_cast<double>(iy - cell->iy) * (iy - cell->iy);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = CellIndex{ix, iy};
      }
    }
  }
  return best;
}

/// Runs the whole chain on the "elevation" layer of the input map and
/// publishes an immutable snapshot. Optionally reports per-stage
/// wall-clock durations.
inline std::shared_ptr<const MapSnapshot> runFilterChain(const GridMap& input,
                                                         const Eigen::Vector2d& goal_world,
                                                         const FilterParams& params,
                                                         double timestamp,
                                                         FilterTimings* timings = nullptr) {
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  const GridGeometry& geo = input.geometry();
  const int nx = geo.nx();
  const int ny = geo.ny();
  const double res = geo.resolution();
  const std::vector<double>& elevation = input.layer("elevation");

  const auto t_total = Clock::now();
  auto t0 = Clock::now();
  std::vector<double> filled = inpaint(elevation, nx, ny, res, params.inpaint_radius);
  const double inpaint_ms = ms_since(t0);

  t0 = Clock::now();
  std::vector<double> trav = traversability(filled, nx, ny, res, params);
  std::vector<double> binary = binarize(trav, params.traversability_threshold);
  const double traversability_ms = ms_since(t0);

  t0 = Clock::now();
  std::vector<double> f_sdf = signedDistanceField(binary, nx, ny, res);
  std::vector<double> grad_sdf_x, grad_sdf_y;
  detail::smoothedUnitGradients(f_sdf, nx, ny, res, params.gradient_sigma, grad_sdf_x, grad_sdf_y);
  const double sdf_ms = ms_since(t0);

  t0 = Clock::now();
  const std::optional<CellIndex> seed =
      selectGoalSeed(geo, binary, f_sdf, params.min_goal_clearance, goal_world);
  std::vector<double> f_gdf(elevation.size(), std::numeric_limits<double>::infinity());
  std::vector<double> grad_gdf_x(elevation.size(), 0.0);
  std::vector<double> grad_gdf_y(elevation.size(), 0.0);
  if (seed) {
    std::vector<std::uint8_t> traversable(binary.size());
    for (std::size_t i = 0; i < binary.size(); ++i) traversable[i] = binary[i] >= 0.5 ? 1 : 0;
    f_gdf = fastMarch(traversable, nx, ny, res, seed->ix, seed->iy);

    // Smoothing must not transport values across walls: a plain Gaussian
    // mixes the low goal-side values of a thin wall into its shadow side
    // and bends descent into the wall. The masked diffusion matches the
    // Gaussian away from walls but treats non-finite cells as
    // insulating. The +inf cells then get a shallow uphill ramp from
    // their nearest smoothed boundary value, so Sobel taps landing
    // inside a wall read mild uphill and descent keeps a standoff; the
    // ramp is only ever read one cell deep.
    const std::vector<double> smooth_gdf =
        maskedHeatDiffusion(f_gdf, nx, ny, params.gradient_sigma);
    const std::vector<double> filled_gdf =
        continueIntoNonFinite(smooth_gdf, nx, ny, res, res * std::sqrt(2.0));
    sobelGradients(filled_gdf, nx, ny, res, grad_gdf_x, grad_gdf_y);
    normalizeField(grad_gdf_x, grad_gdf_y);
  }
  const double gdf_ms = ms_since(t0);

  GridMap out(geo);
  out.add("elevation_filled", std::move(filled));
  out.add("traversability", std::move(trav));
  out.add("traversability_binary", std::move(binary));
  out.add("f_sdf", std::move(f_sdf));
  out.add("grad_sdf_x", std::move(grad_sdf_x));
  out.add("grad_sdf_y", std::move(grad_sdf_y));
  out.add("f_gdf", std::move(f_gdf));
  out.add("grad_gdf_x", std::move(grad_gdf_x));
  out.add("grad_gdf_y", std::move(grad_gdf_y));

  auto snapshot = std::make_shared<MapSnapshot>(std::move(out));
  snapshot->goal_seed = seed.value_or(CellIndex{0, 0});
  snapshot->timestamp = timestamp;
  snapshot->gdf_valid = seed.has_value();

  if (timings) {
    timings->inpaint_ms = inpaint_ms;
    timings->traversability_ms = traversability_ms;
    timings->sdf_ms = sdf_ms;
    timings->gdf_ms = gdf_ms;
    timings->total_ms = ms_since(t_total);
  }
  return snapshot;
}

/// Single-writer/multi-reader slot holding the latest snapshot. Readers
/// get a shared_ptr and never block the writer beyond the swap.
class SnapshotSlot {
 public:
  void publish(std::shared_ptr<const MapSnapshot> snapshot) {
    std::lock_guard<std::mutex> lock(mutex_);
    latest_ = std::move(snapshot);
  }

  std::shared_ptr<const MapSnapshot> latest() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return latest_;
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const MapSnapshot> latest_;
};

}  // namespace rmpnav
