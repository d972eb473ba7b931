#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rmpnav {

namespace detail {

inline std::vector<double> gaussianKernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> w(static_cast<std::size_t>(2 * radius) + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma * sigma));
    w[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// Replicate-border tap.
inline double tapAt(const std::vector<double>& in, int nx, int ny, int ix, int iy) {
  ix = std::clamp(ix, 0, nx - 1);
  iy = std::clamp(iy, 0, ny - 1);
  return in[static_cast<std::size_t>(iy) * nx + ix];
}

}  // namespace detail

/// Separable Gaussian blur with replicate borders; sigma in cells, kernel
/// radius 3*sigma.
inline std::vector<double> gaussianBlur(const std::vector<double>& in, int nx, int ny, double sigma) {
  const std::vector<double> w = detail::gaussianKernel(sigma);
  const int radius = (static_cast<int>(w.size()) - 1) / 2;
  std::vector<double> horiz(in.size());
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += w[static_cast<std::size_t>(k + radius)] * detail::tapAt(in, nx, ny, ix + k, iy);
      }
      horiz[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  }
  std::vector<double> out(in.size());
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += w[static_cast<std::size_t>(k + radius)] * detail::tapAt(horiz, nx, ny, ix, iy + k);
      }
      out[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  }
  return out;
}

/// Gaussian smoothing restricted to finite-valued cells: explicit heat
/// diffusion with insulating (no-flux) boundaries at non-finite cells and
/// map edges. Away from non-finite regions this matches a plain Gaussian
/// of the same sigma, but values never diffuse across a non-finite
/// barrier. Non-finite cells pass through unchanged.
inline std::vector<double> maskedHeatDiffusion(const std::vector<double>& in, int nx, int ny,
                                               double sigma) {
  const double rate = 0.2;  // per-neighbor exchange rate; stable for <= 0.25
  const int steps = std::max(1, static_cast<int>(std::ceil(sigma * sigma / (2.0 * rate))));
  std::vector<double> a = in;
  std::vector<double> b = in;
  for (int s = 0; s < steps; ++s) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
        const double c = a[i];
        if (!std::isfinite(c)) continue;
        double flux = 0.0;
        if (ix > 0 && std::isfinite(a[i - 1])) flux += a[i - 1] - c;
        if (ix + 1 < nx && std::isfinite(a[i + 1])) flux += a[i + 1] - c;
        if (iy > 0 && std::isfinite(a[i - nx])) flux += a[i - nx] - c;
        if (iy + 1 < ny && std::isfinite(a[i + nx])) flux += a[i + nx] - c;
        b[i] = c + rate * flux;
      }
    }
    std::swap(a, b);
  }
  return a;
}

/// 3x3 Sobel derivative pair with replicate borders, scaled to 1/meters.
inline void sobelGradients(const std::vector<double>& in, int nx, int ny, double resolution,
                           std::vector<double>& gx, std::vector<double>& gy) {
  gx.assign(in.size(), 0.0);
  gy.assign(in.size(), 0.0);
  const double scale = 1.0 / (8.0 * resolution);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double sx = 0.0;
      double sy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = detail::tapAt(in, nx, ny, ix + dx, iy + dy);
          const int wy = (dy == 0) ? 2 : 1;
          const int wx = (dx == 0) ? 2 : 1;
          sx += dx * wy * v;
          sy += dy * wx * v;
        }
      }
      gx[static_cast<std::size_t>(iy) * nx + ix] = sx * scale;
      gy[static_cast<std::size_t>(iy) * nx + ix] = sy * scale;
    }
  }
}

/// Rescales a vector field to unit length in place; near-zero vectors
/// become exactly (0, 0).
inline void normalizeField(std::vector<double>& gx, std::vector<double>& gy, double eps = 1e-12) {
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double n = std::hypot(gx[i], gy[i]);
    if (n > eps) {
      gx[i] /= n;
      gy[i] /= n;
    } else {
      gx[i] = 0.0;
      gy[i] = 0.0;
    }
  }
}

}  // namespace rmpnav
