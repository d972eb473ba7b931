#pragma once

// Small synthetic elevation worlds shared by the policy, controller and
// simulator suites.

#include <rmpnav/grid_map.hpp>

namespace testmaps {

inline rmpnav::GridMap flatMap(double length, double res, double height = 0.0) {
  rmpnav::GridMap m(rmpnav::GridGeometry(length, length, res));
  m.add("elevation", height);
  return m;
}

inline void raiseBlock(rmpnav::GridMap& m, double x0, double x1, double y0, double y1, double h) {
  const auto& geo = m.geometry();
  auto& elev = m.layer("elevation");
  for (int iy = 0; iy < geo.ny(); ++iy) {
    for (int ix = 0; ix < geo.nx(); ++ix) {
      const Eigen::Vector2d c = geo.indexToWorld({ix, iy});
      if (c.x() >= x0 && c.x() <= x1 && c.y() >= y0 && c.y() <= y1) {
        elev[geo.linearIndex({ix, iy})] = h;
      }
    }
  }
}

}  // namespace testmaps
