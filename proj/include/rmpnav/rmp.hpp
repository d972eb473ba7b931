#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpnav/filters.hpp"
#include "rmpnav/grid_map.hpp"
#include "rmpnav/se2.hpp"

namespace rmpnav {

/// Per-policy shape parameters: k scales the acceleration field, s the
/// regularization metric, d_c and alpha shape the logistic activation.
struct PolicyParams {
  double k = 1.0;      // field gain
  double s = 0.05;     // regularization metric scale
  double d_c = 1.0;    // activation distance, meters
  double alpha = 5.0;  // logistic steepness, 1/meters
};

inline void validatePolicyParams(const PolicyParams& p) {
  if (!(p.k >= 0.0) || !(p.s >= 0.0) || !(p.d_c > 0.0) || !(p.alpha > 0.0)) {
    throw std::invalid_argument("PolicyParams: need k >= 0, s >= 0, d_c > 0, alpha > 0");
  }
}

struct CollisionSphere {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // center in the body frame, meters
  double radius = 0.1;                               // meters, > 0
};

/// Acceleration field sample plus its Riemannian metric. N = 3 for body
/// policies (a_x, a_y, a_theta), N = 2 for sphere policies (translation
/// only).
template <int N>
struct MotionPolicy {
  Eigen::Matrix<double, N, 1> f = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> M = Eigen::Matrix<double, N, N>::Zero();
};

using BodyPolicy = MotionPolicy<3>;
using SpherePolicy = MotionPolicy<2>;

/// A sphere policy paired with the sphere it acts on; the pullback
/// Jacobian depends on the sphere's body-frame offset.
struct SphereBoundPolicy {
  CollisionSphere sphere;
  SpherePolicy policy;
};

struct RobotState {
  Pose2 T_IB;       // body pose in the inertial frame
  Tangent2 v_B;     // body-frame twist
  Tangent2 a_prev;  // acceleration command of the previous tick
};

struct VelocityLimits {
  double vx = 0.5;      // m/s
  double vy = 0.5;      // m/s
  double wtheta = 0.7;  // rad/s
};

enum class ActivationMode { kCloser, kFarther };

/// Logistic activation in [0, 1]: approaches 1 when the distance is on
/// the active side of d_c, exactly 0.5 at d_c.
inline double activation(double d, double d_c, double alpha, ActivationMode mode) {
  const double closer = 1.0 / (1.0 + std::exp(alpha * (d - d_c)));
  return mode == ActivationMode::kCloser ? closer : 1.0 - closer;
}

namespace detail {

/// Samples a two-layer vector field; nullopt outside the map or where a
/// component is not finite.
inline std::optional<Eigen::Vector2d> sampleGradient(const GridMap& map, const std::string& layer_x,
                                                     const std::string& layer_y,
                                                     const Eigen::Vector2d& p) {
  if (!map.geometry().contains(p)) return std::nullopt;
  const auto gx = map.sampleBilinear(layer_x, p);
  const auto gy = map.sampleBilinear(layer_y, p);
  if (!gx || !gy || !std::isfinite(*gx) || !std::isfinite(*gy)) return std::nullopt;
  return Eigen::Vector2d(*gx, *gy);
}

}  // namespace detail

/// Goal attraction along the geodesic flow, translation only; active
/// when the goal is farther than d_c. Unknown gradient (outside the map
/// or invalid field) yields the zero policy.
inline BodyPolicy gdfGoalPolicy(const RobotState& state, const MapSnapshot& snap, const Pose2& goal,
                                const PolicyParams& params) {
  validatePolicyParams(params);
  BodyPolicy out;
  if (!snap.gdf_valid) return out;
  const auto grad =
      detail::sampleGradient(snap.map, "grad_gdf_x", "grad_gdf_y", state.T_IB.translation());
  if (!grad) return out;
  const Eigen::Vector2d g_B = rotateGradient(inverse(state.T_IB), *grad);
  out.f.head<2>() = -params.k * g_B;  // f_theta stays 0
  const double d_goal = (goal.translation() - state.T_IB.translation()).norm();
  out.M = activation(d_goal, params.d_c, params.alpha, ActivationMode::kFarther) *
          Eigen::Matrix3d::Identity();
  return out;
}

/// Pulls pose toward the goal with the full SE(2) error; active when the
/// goal is closer than d_c.
inline BodyPolicy freespaceGoalPolicy(const RobotState& state, const Pose2& goal,
                                      const PolicyParams& params) {
  validatePolicyParams(params);
  BodyPolicy out;
  const Tangent2 err = log(compose(inverse(state.T_IB), goal));
  out.f = params.k * err.vector();
  const double d_goal = (goal.translation() - state.T_IB.translation()).norm();
  out.M = activation(d_goal, params.d_c, params.alpha, ActivationMode::kCloser) *
          Eigen::Matrix3d::Identity();
  return out;
}

/// Obstacle repulsion at one collision sphere: pushes along the
/// clearance gradient, growing as the inverse clearance; active when
/// clearance is below d_c. The denominator is clamped at 1e-3 m so
/// contact and penetration produce a strong but finite push.
inline SpherePolicy obstaclePolicy(const RobotState& state, const MapSnapshot& snap,
                                   const CollisionSphere& sphere, const PolicyParams& params) {
  validatePolicyParams(params);
  if (!(sphere.radius > 0.0)) throw std::invalid_argument("obstaclePolicy: radius must be > 0");
  SpherePolicy out;
  const Eigen::Vector2d p_S = state.T_IB * sphere.offset;
  if (!snap.map.geometry().contains(p_S)) return out;
  const auto f_sdf = snap.map.sampleBilinear("f_sdf", p_S);
  const auto grad = detail::sampleGradient(snap.map, "grad_sdf_x", "grad_sdf_y", p_S);
  if (!f_sdf || !std::isfinite(*f_sdf) || !grad) return out;
  const Eigen::Vector2d g_B = rotateGradient(inverse(state.T_IB), *grad);
  const double clearance = *f_sdf - sphere.radius;
  out.f = params.k / std::max(clearance, 1e-3) * g_B;
  out.M = activation(clearance, params.d_c, params.alpha, ActivationMode::kCloser) *
          Eigen::Matrix2d::Identity();
  return out;
}

/// Aligns heading with the direction of travel; off near the goal (so
/// the final heading may differ from the travel direction) and at
/// near-zero speed where atan2 is ill-conditioned.
inline BodyPolicy headingPolicy(const RobotState& state, const Pose2& goal,
                                const PolicyParams& params) {
  validatePolicyParams(params);
  BodyPolicy out;
  if (state.v_B.linear().norm() < 0.01) return out;
  out.f.z() = params.k * std::atan2(state.v_B.vy, state.v_B.vx);
  const double d_goal = (goal.translation() - state.T_IB.translation()).norm();
  out.M = activation(d_goal, params.d_c, params.alpha, ActivationMode::kFarther) *
          Eigen::Matrix3d::Identity();
  return out;
}

/// Velocity damping on all three components, always on.
inline BodyPolicy dampingPolicy(const RobotState& state, const PolicyParams& params) {
  validatePolicyParams(params);
  BodyPolicy out;
  out.f = -params.k * state.v_B.vector();
  out.M = Eigen::Matrix3d::Identity();
  return out;
}

/// Pulls the solution toward the previous acceleration command, always
/// on with metric scale s; this keeps the normal matrix invertible.
inline BodyPolicy regularizationPolicy(const RobotState& state, const PolicyParams& params) {
  validatePolicyParams(params);
  BodyPolicy out;
  out.f = state.a_prev.vector();
  out.M = params.s * Eigen::Matrix3d::Identity();
  return out;
}

/// Pullback from body acceleration (a_x, a_y, a_theta) to the sphere
/// center's translational acceleration, both in the body frame.
inline Eigen::Matrix<double, 2, 3> sphereJacobian(const CollisionSphere& sphere) {
  Eigen::Matrix<double, 2, 3> j;
  j << 1.0, 0.0, -sphere.offset.y(),  //
      0.0, 1.0, sphere.offset.x();
  return j;
}

/// Closed-form minimizer of the stacked weighted least-squares objective
/// sum_i ||J_i a - f_i||^2_{M_i}: a = (sum J'MJ)^-1 (sum J'Mf), with
/// J = I3 for body policies and the sphere pullback otherwise.
inline Tangent2 solvePolicies(const std::vector<BodyPolicy>& body,
                              const std::vector<SphereBoundPolicy>& spheres) {
  Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const BodyPolicy& p : body) {
    lhs += p.M;
    rhs += p.M * p.f;
  }
  for (const SphereBoundPolicy& sp : spheres) {
    const Eigen::Matrix<double, 2, 3> j = sphereJacobian(sp.sphere);
    lhs += j.transpose() * sp.policy.M * j;
    rhs += j.transpose() * sp.policy.M * sp.policy.f;
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(lhs);
  if (!lu.isInvertible()) {
    throw std::runtime_error("solvePolicies: singular normal matrix (no always-on policy?)");
  }
  return Tangent2(Eigen::Vector3d(lu.solve(rhs)));
}

/// Forward-Euler velocity update with componentwise symmetric limits.
inline Tangent2 integrate(const Tangent2& a, const Tangent2& v, double dt,
                          const VelocityLimits& limits) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  return {std::clamp(v.vx + a.vx * dt, -limits.vx, limits.vx),
          std::clamp(v.vy + a.vy * dt, -limits.vy, limits.vy),
          std::clamp(v.wtheta + a.wtheta * dt, -limits.wtheta, limits.wtheta)};
}

}  // namespace rmpnav
