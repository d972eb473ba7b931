#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rmpnav/filters.hpp"
#include "rmpnav/rmp.hpp"
#include "rmpnav/se2.hpp"

namespace rmpnav {

enum class ControllerState { kRunning, kGoalReached, kGoalUnreachable, kStuck };

inline const char* toString(ControllerState s) {
  switch (s) {
    case ControllerState::kRunning: return "running";
    case ControllerState::kGoalReached: return "goal_reached";
    case ControllerState::kGoalUnreachable: return "goal_unreachable";
    case ControllerState::kStuck: return "stuck";
  }
  return "unknown";
}

/// Which motion policies the tick assembles. The damping and
/// regularization pair is always on (it keeps the solve well posed).
///   kFullRmp:         all six policies, distance-activated metrics.
///   kPotentialField:  freespace goal + obstacle avoidance with fixed
///                     (identity) metrics; the classic reactive baseline.
///   kGdfOnly:         geodesic + freespace goal reaching, no avoidance.
///   kGdfAvoidance:    geodesic goal reaching + obstacle avoidance +
///                     velocity-aligned heading; no freespace term, so
///                     the final orientation is left to the approach
///                     direction.
enum class ControllerVariant { kFullRmp, kPotentialField, kGdfOnly, kGdfAvoidance };

struct ControllerStatus {
  ControllerState state = ControllerState::kRunning;
  double progress = 0.0;  // latched projection arclength, meters
  double pte = 0.0;       // distance to the reference path, meters
};

struct FollowerConfig {
  double d_carrot = 1.5;            // look-ahead distance, meters
  double position_tolerance = 0.15; // meters
  double angular_tolerance = 0.2;   // radians
  double stuck_window = 6.0;        // seconds
  double stuck_displacement = 0.1;  // meters
  int unreachable_debounce = 5;     // consecutive ticks
};

inline void validateFollowerConfig(const FollowerConfig& c) {
  if (!(c.d_carrot > 0.0) || !(c.position_tolerance > 0.0) || !(c.angular_tolerance > 0.0) ||
      !(c.stuck_window > 0.0) || !(c.stuck_displacement > 0.0) || c.unreachable_debounce < 1) {
    throw std::invalid_argument("FollowerConfig: all fields must be positive");
  }
}

/// Gains and geometry for the full policy stack plus the control period.
struct TuningParams {
  PolicyParams gdf_goal{6.0, 0.05, 1.0, 5.0};
  PolicyParams freespace_goal{2.0, 0.05, 1.0, 5.0};
  PolicyParams obstacle{0.8, 0.05, 0.35, 10.0};
  PolicyParams heading{1.2, 0.05, 1.0, 5.0};
  PolicyParams damping{2.5, 0.05, 1.0, 5.0};
  PolicyParams regularization{0.0, 0.05, 1.0, 5.0};
  std::vector<CollisionSphere> spheres = {
      {{-0.25, 0.0}, 0.25}, {{0.0, 0.0}, 0.25}, {{0.25, 0.0}, 0.25}};
  VelocityLimits limits;
  double control_dt = 0.1;  // seconds per tick
};

/// Reference poses resampled so consecutive samples are at most 0.5 m
/// apart, with strictly increasing cumulative arclength. Sample headings
/// follow the segment tangents; the final vertex keeps the heading it
/// was given (the goal heading).
class ReferencePath {
 public:
  static constexpr double kMaxSpacing = 0.5;

  explicit ReferencePath(const std::vector<Pose2>& waypoints) {
    if (waypoints.empty()) throw std::invalid_argument("ReferencePath: no waypoints");
    std::vector<Pose2> cleaned;
    cleaned.push_back(waypoints.front());
    for (const Pose2& w : waypoints) {
      if ((w.translation() - cleaned.back().translation()).norm() > 1e-12) cleaned.push_back(w);
    }
    if (cleaned.size() == 1) {
      poses_ = {cleaned.front()};
      s_ = {0.0};
      return;
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cleaned.size(); ++i) {
      const Eigen::Vector2d a = cleaned[i].translation();
      const Eigen::Vector2d b = cleaned[i + 1].translation();
      const double len = (b - a).norm();
      const double heading = std::atan2(b.y() - a.y(), b.x() - a.x());
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / kMaxSpacing)));
      for (int k = 0; k < pieces; ++k) {
        const double t = static_cast<double>(k) / pieces;
        const Eigen::Vector2d p = a + t * (b - a);
        poses_.emplace_back(p.x(), p.y(), heading);
        s_.push_back(s + t * len);
      }
      s += len;
    }
    poses_.push_back(cleaned.back());  // keeps the goal heading
    s_.push_back(s);
  }

  const std::vector<Pose2>& poses() const { return poses_; }
  const std::vector<double>& arclength() const { return s_; }
  double totalLength() const { return s_.back(); }
  const Pose2& finalPose() const { return poses_.back(); }

  /// Interpolated pose at the given arclength, clamped to the ends.
  Pose2 poseAt(double s) const {
    if (poses_.size() == 1 || s <= 0.0) return poses_.front();
    if (s >= s_.back()) return poses_.back();
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - s_.begin()) - 1;
    const double span = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / span;
    const Eigen::Vector2d p =
        poses_[i].translation() + t * (poses_[i + 1].translation() - poses_[i].translation());
    const double heading =
        poses_[i].theta() + t * wrapAngle(poses_[i + 1].theta() - poses_[i].theta());
    return {p.x(), p.y(), heading};
  }

  /// Arclength of the point nearest to p, restricted to s >= min_s.
  /// Distance ties resolve to the larger arclength.
  double projectArclength(const Eigen::Vector2d& p, double min_s = 0.0) const {
    if (poses_.size() == 1) return 0.0;
    min_s = std::clamp(min_s, 0.0, s_.back());
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = min_s;
    for (std::size_t i = 0; i + 1 < poses_.size(); ++i) {
      if (s_[i + 1] < min_s) continue;
      const Eigen::Vector2d a = poses_[i].translation();
      const Eigen::Vector2d b = poses_[i + 1].translation();
      const double span = s_[i + 1] - s_[i];
      const double u_min = std::clamp((min_s - s_[i]) / span, 0.0, 1.0);
      const Eigen::Vector2d ab = b - a;
      const double u = std::clamp(ab.dot(p - a) / ab.squaredNorm(), u_min, 1.0);
      const Eigen::Vector2d q = a + u * ab;
      const double d2 = (p - q).squaredNorm();
      const double s = s_[i] + u * span;
      if (d2 < best_d2 || (d2 == best_d2 && s > best_s)) {
        best_d2 = d2;
        best_s = s;
      }
    }
    return best_s;
  }

 private:
  std::vector<Pose2> poses_;
  std::vector<double> s_;
};

/// Look-ahead goal d_carrot farther along the path than the projection
/// of the body position, clamped to the final pose.
inline Pose2 carrotPose(const ReferencePath& path, const Pose2& pose, double d_carrot,
                        double min_s = 0.0) {
  const double s = path.projectArclength(pose.translation(), min_s);
  return path.poseAt(s + d_carrot);
}

/// Distance from each executed pose to the nearest point of the
/// piecewise-linear reference.
inline std::vector<double> pathTrackingError(const std::vector<Pose2>& executed,
                                             const ReferencePath& ref) {
  std::vector<double> out;
  out.reserve(executed.size());
  for (const Pose2& pose : executed) {
    const double s = ref.projectArclength(pose.translation());
    out.push_back((pose.translation() - ref.poseAt(s).translation()).norm());
  }
  return out;
}

struct TickResult {
  Tangent2 twist;
  ControllerStatus status;
  Pose2 carrot;
  double solve_ms = 0.0;  // policy assembly + solve wall time
};

/// Per-run reactive controller: latched path projection, carrot
/// look-ahead, policy assembly per variant, and terminal status
/// detection (reached, unreachable with debounce, stuck).
class Controller {
 public:
  Controller(ReferencePath path, FollowerConfig config, TuningParams tuning,
             ControllerVariant variant = ControllerVariant::kFullRmp)
      : path_(std::move(path)),
        config_(config),
        tuning_(std::move(tuning)),
        variant_(variant) {
    validateFollowerConfig(config_);
    if (!(tuning_.regularization.s > 0.0)) {
      throw std::invalid_argument("Controller: regularization scale must be > 0");
    }
  }

  /// Advances the latched projection for the current position and
  /// returns the carrot; the filter chain should use this as its goal.
  /// Idempotent for a fixed position.
  Pose2 advanceCarrot(const Pose2& pose) {
    latched_s_ = std::max(latched_s_, path_.projectArclength(pose.translation(), latched_s_));
    return path_.poseAt(latched_s_ + config_.d_carrot);
  }

  double progress() const { return latched_s_; }

  TickResult tick(const Pose2& pose, const Tangent2& v_B, const MapSnapshot& snap, double t_now) {
    TickResult out;
    out.carrot = advanceCarrot(pose);
    out.status.progress = latched_s_;
    const double s_near = path_.projectArclength(pose.translation());
    out.status.pte = (pose.translation() - path_.poseAt(s_near).translation()).norm();

    if (terminal_) {
      out.status.state = *terminal_;
      return out;
    }

    // Goal check against the final path pose.
    const Pose2& goal = path_.finalPose();
    const double d_pos = (pose.translation() - goal.translation()).norm();
    const double d_ang = std::abs(wrapAngle(pose.theta() - goal.theta()));
    if (d_pos < config_.position_tolerance && d_ang < config_.angular_tolerance) {
      terminal_ = ControllerState::kGoalReached;
      out.status.state = *terminal_;
      return out;
    }

    // Unreachable: the geodesic field marks the body disconnected from
    // the goal seed (or the whole field is invalid), debounced.
    bool disconnected = !snap.gdf_valid;
    if (!disconnected) {
      if (snap.map.geometry().contains(pose.translation())) {
        const auto f = snap.map.sampleBilinear("f_gdf", pose.translation());
        disconnected = !f || !std::isfinite(*f);
      } else {
        disconnected = true;
      }
    }
    unreachable_count_ = disconnected ? unreachable_count_ + 1 : 0;
    if (unreachable_count_ >= config_.unreachable_debounce) {
      terminal_ = ControllerState::kGoalUnreachable;
      out.status.state = *terminal_;
      return out;
    }

    // Stuck: negligible displacement across the stuck window.
    history_.emplace_back(t_now, pose.translation());
    while (!history_.empty() && t_now - history_.front().first > config_.stuck_window) {
      history_.pop_front();
    }
    if (t_now - history_.front().first >= 0.99 * config_.stuck_window &&
        (pose.translation() - history_.front().second).norm() < config_.stuck_displacement) {
      terminal_ = ControllerState::kStuck;
      out.status.state = *terminal_;
      return out;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RobotState state;
    state.T_IB = pose;
    state.v_B = v_B;
    state.a_prev = a_prev_;

    std::vector<BodyPolicy> body;
    std::vector<SphereBoundPolicy> spheres;
    const bool use_gdf = variant_ != ControllerVariant::kPotentialField;
    const bool use_freespace = variant_ != ControllerVariant::kGdfAvoidance;
    const bool use_obstacle = variant_ != ControllerVariant::kGdfOnly;
    const bool use_heading =
        variant_ == ControllerVariant::kFullRmp || variant_ == ControllerVariant::kGdfAvoidance;
    const bool fixed_metrics = variant_ == ControllerVariant::kPotentialField;

    if (use_gdf) body.push_back(gdfGoalPolicy(state, snap, out.carrot, tuning_.gdf_goal));
    if (use_freespace) {
      BodyPolicy p = freespaceGoalPolicy(state, out.carrot, tuning_.freespace_goal);
      if (fixed_metrics) p.M = Eigen::Matrix3d::Identity();
      body.push_back(p);
    }
    if (use_heading) body.push_back(headingPolicy(state, out.carrot, tuning_.heading));
    body.push_back(dampingPolicy(state, tuning_.damping));
    body.push_back(regularizationPolicy(state, tuning_.regularization));
    if (use_obstacle) {
      for (const CollisionSphere& sphere : tuning_.spheres) {
        SphereBoundPolicy sp{sphere, obstaclePolicy(state, snap, sphere, tuning_.obstacle)};
        if (fixed_metrics) sp.policy.M = Eigen::Matrix2d::Identity();
        spheres.push_back(sp);
      }
    }

    const Tangent2 a = solvePolicies(body, spheres);
    out.twist = integrate(a, v_B, tuning_.control_dt, tuning_.limits);
    a_prev_ = a;
    out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                       .count();
    out.status.state = ControllerState::kRunning;
    return out;
  }

 private:
  ReferencePath path_;
  FollowerConfig config_;
  TuningParams tuning_;
  ControllerVariant variant_;
  double latched_s_ = 0.0;
  int unreachable_count_ = 0;
  Tangent2 a_prev_;
  std::optional<ControllerState> terminal_;
  std::deque<std::pair<double, Eigen::Vector2d>> history_;
};

}  // namespace rmpnav
