#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpnav/se2.hpp"

namespace rmpnav {

struct CellIndex {
  int ix = 0;
  int iy = 0;

  bool operator==(const CellIndex& o) const { return ix == o.ix && iy == o.iy; }
};

/// World <-> cell geometry of a fixed-size grid. The map frame sits at the
/// grid center and stays axis-aligned with the inertial frame: only the
/// translation of `origin` enters the cell math. Cell (0, 0) is the most
/// negative (x, y) corner; linear storage is row-major (index = iy*nx + ix).
class GridGeometry {
 public:
  GridGeometry(double length_x, double length_y, double resolution, const Pose2& origin = Pose2())
      : resolution_(resolution),
        nx_(static_cast<int>(std::lround(length_x / resolution))),
        ny_(static_cast<int>(std::lround(length_y / resolution))),
        origin_(origin) {
    if (resolution <= 0.0 || nx_ < 2 || ny_ < 2) {
      throw std::invalid_argument("GridGeometry: need resolution > 0 and at least 2x2 cells");
    }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return resolution_; }
  double lengthX() const { return nx_ * resolution_; }
  double lengthY() const { return ny_ * resolution_; }
  const Pose2& origin() const { return origin_; }
  void setOrigin(const Pose2& origin) { origin_ = origin; }

  std::size_t cellCount() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t linearIndex(const CellIndex& c) const {
    return static_cast<std::size_t>(c.iy) * nx_ + c.ix;
  }
  CellIndex fromLinear(std::size_t i) const {
    return {static_cast<int>(i % nx_), static_cast<int>(i / nx_)};
  }

  bool isInside(const CellIndex& c) const {
    return c.ix >= 0 && c.ix < nx_ && c.iy >= 0 && c.iy < ny_;
  }

  bool contains(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d r = p - origin_.translation();
    return r.x() >= -0.5 * lengthX() && r.x() < 0.5 * lengthX() && r.y() >= -0.5 * lengthY() &&
           r.y() < 0.5 * lengthY();
  }

  /// Containing cell of a world point, or nullopt when outside the map.
  std::optional<CellIndex> worldToIndex(const Eigen::Vector2d& p) const {
    if (!contains(p)) return std::nullopt;
    const Eigen::Vector2d r = p - origin_.translation();
    CellIndex c{static_cast<int>(std::floor(r.x() / resolution_ + 0.5 * nx_)),
                static_cast<int>(std::floor(r.y() / resolution_ + 0.5 * ny_))};
    c.ix = std::min(std::max(c.ix, 0), nx_ - 1);
    c.iy = std::min(std::max(c.iy, 0), ny_ - 1);
    return c;
  }

  /// World position of a cell center.
  Eigen::Vector2d indexToWorld(const CellIndex& c) const {
    return origin_.translation() + Eigen::Vector2d((c.ix + 0.5 - 0.5 * nx_) * resolution_,
                                                   (c.iy + 0.5 - 0.5 * ny_) * resolution_);
  }

 private:
  double resolution_;
  int nx_;
  int ny_;
  Pose2 origin_;
};

/// Multi-layer 2.5D grid. Layers are flat row-major double arrays keyed by
/// name; unknown cells hold NaN. Unknown layer names throw.
class GridMap {
 public:
  explicit GridMap(const GridGeometry& geometry) : geometry_(geometry) {}

  const GridGeometry& geometry() const { return geometry_; }

  void add(const std::string& name, double fill = std::numeric_limits<double>::quiet_NaN()) {
    layers_[name].assign(geometry_.cellCount(), fill);
  }

  void add(const std::string& name, std::vector<double> values) {
    if (values.size() != geometry_.cellCount()) {
      throw std::invalid_argument("GridMap: layer '" + name + "' has wrong cell count");
    }
    layers_[name] = std::move(values);
  }

  bool has(const std::string& name) const { return layers_.count(name) > 0; }

  std::vector<double>& layer(const std::string& name) {
    const auto it = layers_.find(name);
    if (it == layers_.end()) throw std::out_of_range("GridMap: no layer named '" + name + "'");
    return it->second;
  }
  const std::vector<double>& layer(const std::string& name) const {
    const auto it = layers_.find(name);
    if (it == layers_.end()) throw std::out_of_range("GridMap: no layer named '" + name + "'");
    return it->second;
  }

  double& at(const std::string& name, const CellIndex& c) {
    return layer(name)[geometry_.linearIndex(c)];
  }
  double at(const std::string& name, const CellIndex& c) const {
    return layer(name)[geometry_.linearIndex(c)];
  }

  std::vector<std::string> layerNames() const {
    std::vector<std::string> names;
    names.reserve(layers_.size());
    for (const auto& [name, values] : layers_) names.push_back(name);
    return names;
  }

  /// Moves the map origin. Layer data is not shifted; the simulator
  /// re-renders layers from ground truth after every recenter.
  void recenter(const Pose2& new_origin) { geometry_.setOrigin(new_origin); }

  /// Bilinear interpolation over the 4 cell centers around p.
  /// Degenerate corners:
  ///  - any NaN corner: the nearest non-NaN corner value is returned
  ///    (unknown cells poison interpolation, so fall back to a point
  ///    lookup);
  ///  - infinite corners but no NaN: bilinear over the finite corners
  ///    with renormalized weights, so values stay continuous next to
  ///    diverging regions;
  ///  - no finite corner at all: the nearest infinity if there is one,
  ///    otherwise empty.
  /// Out-of-bounds positions throw.
  std::optional<double> sampleBilinear(const std::string& name, const Eigen::Vector2d& p) const {
    if (!geometry_.contains(p)) {
      throw std::out_of_range("GridMap: position outside map in sampleBilinear('" + name + "')");
    }
    const std::vector<double>& values = layer(name);
    const Eigen::Vector2d r = p - geometry_.origin().translation();
    const int nx = geometry_.nx();
    const int ny = geometry_.ny();
    double gx = r.x() / geometry_.resolution() + 0.5 * nx - 0.5;
    double gy = r.y() / geometry_.resolution() + 0.5 * ny - 0.5;
    gx = std::min(std::max(gx, 0.0), static_cast<double>(nx - 1));
    gy = std::min(std::max(gy, 0.0), static_cast<double>(ny - 1));
    const int ix0 = std::min(static_cast<int>(std::floor(gx)), nx - 2);
    const int iy0 = std::min(static_cast<int>(std::floor(gy)), ny - 2);
    const double fx = gx - ix0;
    const double fy = gy - iy0;

    const double v00 = values[geometry_.linearIndex({ix0, iy0})];
    const double v10 = values[geometry_.linearIndex({ix0 + 1, iy0})];
    const double v01 = values[geometry_.linearIndex({ix0, iy0 + 1})];
    const double v11 = values[geometry_.linearIndex({ix0 + 1, iy0 + 1})];

    if (std::isfinite(v00) && std::isfinite(v10) && std::isfinite(v01) && std::isfinite(v11)) {
      return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
    }

    struct Corner {
      double value;
      double dx;
      double dy;
      double weight;
    };
    // Row-major corner order, so nearest-corner ties resolve toward the
    // lowest row-major index.
    const Corner corners[4] = {{v00, fx, fy, (1.0 - fx) * (1.0 - fy)},
                               {v10, 1.0 - fx, fy, fx * (1.0 - fy)},
                               {v01, fx, 1.0 - fy, (1.0 - fx) * fy},
                               {v11, 1.0 - fx, 1.0 - fy, fx * fy}};
    const auto nearest = [&corners](bool (*usable)(double)) -> std::optional<double> {
      double best = 0.0;
      double best_d2 = std::numeric_limits<double>::infinity();
      bool found = false;
      for (const Corner& c : corners) {
        if (!usable(c.value)) continue;
        const double d2 = c.dx * c.dx + c.dy * c.dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c.value;
          found = true;
        }
      }
      if (!found) return std::nullopt;
      return best;
    };

    bool any_nan = false;
    bool any_finite = false;
    for (const Corner& c : corners) {
      any_nan = any_nan || std::isnan(c.value);
      any_finite = any_finite || std::isfinite(c.value);
    }
    if (any_nan) {
      if (const auto non_nan = nearest([](double v) { return !std::isnan(v); })) return non_nan;
      return std::nullopt;
    }
    if (any_finite) {
      double num = 0.0;
      double den = 0.0;
      for (const Corner& c : corners) {
        if (!std::isfinite(c.value)) continue;
        num += c.weight * c.value;
        den += c.weight;
      }
      if (den > 1e-12) return num / den;
      return nearest([](double v) { return std::isfinite(v); });
    }
    return nearest([](double v) { return std::isinf(v); });
  }

 private:
  GridGeometry geometry_;
  std::map<std::string, std::vector<double>> layers_;
};

}  // namespace rmpnav
