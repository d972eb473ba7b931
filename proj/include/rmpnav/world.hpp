#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rmpnav/grid_map.hpp"
#include "rmpnav/rmp.hpp"
#include "rmpnav/se2.hpp"

namespace rmpnav {

struct BoxObstacle {
  double x0 = 0.0, x1 = 0.0;
  double y0 = 0.0, y1 = 0.0;
  double height = 1.0;
};

struct CircleObstacle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
  double height = 1.0;
};

/// Ground-truth 2.5D world: a flat ground plane with solid prism
/// obstacles. Heights are absolute (not relative to the ground).
struct World {
  double ground_height = 0.0;
  double x_min = -6.0, x_max = 6.0;
  double y_min = -6.0, y_max = 6.0;
  std::vector<BoxObstacle> boxes;
  std::vector<CircleObstacle> circles;

  bool inBounds(const Eigen::Vector2d& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }

  /// Surface height at a point: the tallest obstacle covering it, else
  /// the ground plane; NaN outside the world bounds.
  double heightAt(const Eigen::Vector2d& p) const {
    if (!inBounds(p)) return std::numeric_limits<double>::quiet_NaN();
    double h = ground_height;
    for (const BoxObstacle& b : boxes) {
      if (p.x() >= b.x0 && p.x() <= b.x1 && p.y() >= b.y0 && p.y() <= b.y1) {
        h = std::max(h, b.height);
      }
    }
    for (const CircleObstacle& c : circles) {
      if ((p - c.center).squaredNorm() <= c.radius * c.radius) h = std::max(h, c.height);
    }
    return h;
  }
};

/// Synthetic elevation sensing: ground-truth height at every cell center
/// of a map recentered on the body. With occlusion on, a cell whose
/// line of sight to the body center passes over strictly taller ground
/// reads NaN (the shadow a rangefinder would leave).
inline GridMap sense(const World& world, const Pose2& pose, const GridGeometry& geometry,
                     bool occlusion = true) {
  GridGeometry geo = geometry;
  geo.setOrigin(Pose2(pose.x(), pose.y(), 0.0));
  GridMap map(geo);
  std::vector<double> elevation(geo.cellCount());
  const Eigen::Vector2d body = pose.translation();
  const double step = 0.5 * geo.resolution();
  for (std::size_t i = 0; i < geo.cellCount(); ++i) {
    const Eigen::Vector2d c = geo.indexToWorld(geo.fromLinear(i));
    double h = world.heightAt(c);
    if (occlusion && std::isfinite(h)) {
      const Eigen::Vector2d d = c - body;
      const double len = d.norm();
      // March from just outside the body toward the cell, stopping one
      // cell short so a cell never shadows itself.
      for (double s = step; s < len - geo.resolution(); s += step) {
        const double h_ray = world.heightAt(body + (s / len) * d);
        if (h_ray > h + 1e-9) {
          h = std::numeric_limits<double>::quiet_NaN();
          break;
        }
      }
    }
    elevation[i] = h;
  }
  map.add("elevation", std::move(elevation));
  return map;
}

/// Holonomic kinematic step: the body follows the constant-twist screw
/// for dt seconds.
inline Pose2 stepBody(const Pose2& pose, const Tangent2& twist, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("stepBody: dt must be > 0");
  return compose(pose, exp(Tangent2(twist.vx * dt, twist.vy * dt, twist.wtheta * dt)));
}

/// True iff any collision sphere strictly overlaps an obstacle
/// footprint (tangency does not count).
inline bool checkCollision(const World& world, const Pose2& pose,
                           const std::vector<CollisionSphere>& spheres) {
  for (const CollisionSphere& sphere : spheres) {
    const Eigen::Vector2d p = pose * sphere.offset;
    for (const BoxObstacle& b : world.boxes) {
      const Eigen::Vector2d q(std::clamp(p.x(), b.x0, b.x1), std::clamp(p.y(), b.y0, b.y1));
      if ((p - q).squaredNorm() < sphere.radius * sphere.radius) return true;
    }
    for (const CircleObstacle& c : world.circles) {
      const double reach = sphere.radius + c.radius;
      if ((p - c.center).squaredNorm() < reach * reach) return true;
    }
  }
  return false;
}

}  // namespace rmpnav
