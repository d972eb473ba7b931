#pragma once

#include <Eigen/Core>
#include <cmath>

namespace rmpnav {

/// Wraps an angle to the half-open interval (-pi, pi].
inline double wrapAngle(double theta) {
  const double two_pi = 2.0 * M_PI;
  return theta - two_pi * std::ceil((theta - M_PI) / two_pi);
}

/// Element of the SE(2) tangent space: (vx, vy, wtheta).
/// Units depend on context (displacement, velocity or acceleration).
struct Tangent2 {
  double vx = 0.0;
  double vy = 0.0;
  double wtheta = 0.0;

  Tangent2() = default;
  Tangent2(double vx_in, double vy_in, double wtheta_in) : vx(vx_in), vy(vy_in), wtheta(wtheta_in) {}
  explicit Tangent2(const Eigen::Vector3d& v) : vx(v.x()), vy(v.y()), wtheta(v.z()) {}

  Eigen::Vector3d vector() const { return {vx, vy, wtheta}; }
  Eigen::Vector2d linear() const { return {vx, vy}; }

  Tangent2 operator+(const Tangent2& o) const { return {vx + o.vx, vy + o.vy, wtheta + o.wtheta}; }
  Tangent2 operator-(const Tangent2& o) const { return {vx - o.vx, vy - o.vy, wtheta - o.wtheta}; }
  Tangent2 operator-() const { return {-vx, -vy, -wtheta}; }
  Tangent2 operator*(double s) const { return {vx * s, vy * s, wtheta * s}; }
};

inline Tangent2 operator*(double s, const Tangent2& v) { return v * s; }

/// Rigid transform in SE(2). The angle is wrapped to (-pi, pi] at
/// construction so downstream code never sees unwrapped values.
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta) : x_(x), y_(y), theta_(wrapAngle(theta)) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  Eigen::Vector2d translation() const { return {x_, y_}; }
  Eigen::Matrix2d rotation() const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
  }

  /// Applies the transform to a point.
  Eigen::Vector2d operator*(const Eigen::Vector2d& p) const { return rotation() * p + translation(); }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// SE(2) adjoint matrix, block form [R, hat(1)*t; 0 0 1].
using Adjoint2 = Eigen::Matrix3d;

inline Pose2 compose(const Pose2& a, const Pose2& b) {
  const Eigen::Vector2d t = a * b.translation();
  return {t.x(), t.y(), a.theta() + b.theta()};
}

inline Pose2 inverse(const Pose2& p) {
  const Eigen::Vector2d t = -(p.rotation().transpose() * p.translation());
  return {t.x(), t.y(), -p.theta()};
}

/// Exponential map: tangent displacement to pose (principal branch).
inline Pose2 exp(const Tangent2& v) {
  const double w = v.wtheta;
  double a, b;  // V = a*I + b*J with J = [[0,-1],[1,0]]
  if (std::abs(w) < 1e-8) {
    a = 1.0 - w * w / 6.0;
    b = 0.5 * w - w * w * w / 24.0;
  } else {
    a = std::sin(w) / w;
    b = (1.0 - std::cos(w)) / w;
  }
  const double tx = a * v.vx - b * v.vy;
  const double ty = b * v.vx + a * v.vy;
  return {tx, ty, w};
}

/// Logarithm map, inverse of exp(). Well defined on the whole wrapped
/// range including theta = pi (the 2x2 left Jacobian stays invertible).
inline Tangent2 log(const Pose2& p) {
  const double w = p.theta();
  double a, b;
  if (std::abs(w) < 1e-8) {
    a = 1.0 - w * w / 6.0;
    b = 0.5 * w - w * w * w / 24.0;
  } else {
    a = std::sin(w) / w;
    b = (1.0 - std::cos(w)) / w;
  }
  const double det = a * a + b * b;
  const double vx = (a * p.x() + b * p.y()) / det;
  const double vy = (-b * p.x() + a * p.y()) / det;
  return {vx, vy, w};
}

inline Adjoint2 adjoint(const Pose2& p) {
  Adjoint2 adj = Adjoint2::Identity();
  adj.topLeftCorner<2, 2>() = p.rotation();
  // hat(1) * t = (-ty, tx)
  adj(0, 2) = -p.y();
  adj(1, 2) = p.x();
  return adj;
}

/// Expresses a 2D gradient vector in the target frame of the transform.
/// Equivalent to padding the gradient with a zero angular component and
/// applying the adjoint; the translation column drops out.
inline Eigen::Vector2d rotateGradient(const Pose2& p, const Eigen::Vector2d& g) {
  return p.rotation() * g;
}

}  // namespace rmpnav
