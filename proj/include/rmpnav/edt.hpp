#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace rmpnav {

namespace detail {

/// One pass of the Felzenszwalb-Huttenlocher lower envelope of parabolas.
/// Input/output are squared distances; +inf entries never seed a parabola,
/// so the result stays exact for integer-valued inputs.
inline void edt1d(const double* f, double* d, int n, int stride, int* v, double* z) {
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[q * stride];
    if (fq == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = ((fq + static_cast<double>(q) * q) -
                (f[v[k] * stride] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((fq + static_cast<double>(q) * q) -
           (f[v[k] * stride] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q * stride] = inf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q * stride] = dq * dq + f[v[j] * stride];
  }
}

}  // namespace detail

/// Exact squared Euclidean distance (in cell units) from every cell to the
/// nearest cell with targets[i] != 0. Cells are +inf when no target exists.
inline std::vector<double> squaredDistanceToCells(const std::vector<std::uint8_t>& targets, int nx,
                                                  int ny) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> field(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) field[i] = targets[i] ? 0.0 : inf;

  const int n_max = nx > ny ? nx : ny;
  std::vector<double> tmp(field.size());
  std::vector<int> v(static_cast<std::size_t>(n_max));
  std::vector<double> z(static_cast<std::size_t>(n_max) + 1);

  for (int iy = 0; iy < ny; ++iy) {
    detail::edt1d(field.data() + static_cast<std::size_t>(iy) * nx,
                  tmp.data() + static_cast<std::size_t>(iy) * nx, nx, 1, v.data(), z.data());
  }
  for (int ix = 0; ix < nx; ++ix) {
    detail::edt1d(tmp.data() + ix, field.data() + ix, ny, nx, v.data(), z.data());
  }
  return field;
}

/// Extends a field into its non-finite cells: every such cell receives
/// the value of its nearest finite cell (chamfer metric) plus slope times
/// the chamfer distance. Finite cells pass through untouched. Two-pass
/// 3x3 chamfer relaxation over (distance, source value) pairs; taking the
/// nearest source rather than the cheapest total keeps values from one
/// side of a thick barrier from undercutting the other side's.
inline std::vector<double> continueIntoNonFinite(const std::vector<double>& values, int nx, int ny,
                                                 double slope_axis, double slope_diag) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(values.size());
  std::vector<double> source(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool finite = std::isfinite(values[i]);
    dist[i] = finite ? 0.0 : inf;
    source[i] = finite ? values[i] : 0.0;
  }
  const auto relaxFrom = [&](std::size_t i, int ix, int iy, int dx, int dy) {
    const int jx = ix + dx;
    const int jy = iy + dy;
    if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) return;
    const std::size_t j = static_cast<std::size_t>(jy) * nx + jx;
    const double step = (dx != 0 && dy != 0) ? slope_diag : slope_axis;
    if (dist[j] + step < dist[i]) {
      dist[i] = dist[j] + step;
      source[i] = source[j];
    }
  };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (std::isfinite(values[i])) continue;
      relaxFrom(i, ix, iy, -1, 0);
      relaxFrom(i, ix, iy, -1, -1);
      relaxFrom(i, ix, iy, 0, -1);
      relaxFrom(i, ix, iy, 1, -1);
    }
  }
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = nx - 1; ix >= 0; --ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (std::isfinite(values[i])) continue;
      relaxFrom(i, ix, iy, 1, 0);
      relaxFrom(i, ix, iy, 1, 1);
      relaxFrom(i, ix, iy, 0, 1);
      relaxFrom(i, ix, iy, -1, 1);
    }
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::isinf(dist[i]) ? inf : source[i] + dist[i];
  }
  return out;
}

/// Two-sided signed distance in meters over a binary occupancy layer
/// (1 = traversable, 0 = obstacle): positive distance to the nearest
/// obstacle cell on traversable cells, negative distance to the nearest
/// traversable cell on obstacle cells. Degenerate all-one-class maps are
/// capped at the map diagonal.
inline std::vector<double> signedDistanceField(const std::vector<double>& binary, int nx, int ny,
                                               double resolution) {
  std::vector<std::uint8_t> obstacles(binary.size());
  std::vector<std::uint8_t> free_cells(binary.size());
  for (std::size_t i = 0; i < binary.size(); ++i) {
    const bool traversable = binary[i] >= 0.5;
    obstacles[i] = traversable ? 0 : 1;
    free_cells[i] = traversable ? 1 : 0;
  }
  const std::vector<double> d2_obstacle = squaredDistanceToCells(obstacles, nx, ny);
  const std::vector<double> d2_free = squaredDistanceToCells(free_cells, nx, ny);

  const double cap = resolution * std::sqrt(static_cast<double>(nx) * nx + static_cast<double>(ny) * ny);
  std::vector<double> sdf(binary.size());
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (free_cells[i]) {
      const double d2 = d2_obstacle[i];
      sdf[i] = std::isinf(d2) ? cap : resolution * std::sqrt(d2);
    } else {
      const double d2 = d2_free[i];
      sdf[i] = std::isinf(d2) ? -cap : -resolution * std::sqrt(d2);
    }
  }
  return sdf;
}

}  // namespace rmpnav
