#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpnav/controller.hpp"
#include "rmpnav/filters.hpp"
#include "rmpnav/world.hpp"

namespace rmpnav {

inline const char* toString(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::kFullRmp: return "full_rmp";
    case ControllerVariant::kPotentialField: return "potential_field";
    case ControllerVariant::kGdfOnly: return "gdf_only";
    case ControllerVariant::kGdfAvoidance: return "gdf_avoidance";
  }
  return "unknown";
}

inline ControllerVariant variantFromString(const std::string& s) {
  if (s == "full_rmp") return ControllerVariant::kFullRmp;
  if (s == "potential_field") return ControllerVariant::kPotentialField;
  if (s == "gdf_only") return ControllerVariant::kGdfOnly;
  if (s == "gdf_avoidance") return ControllerVariant::kGdfAvoidance;
  throw std::invalid_argument("unknown controller variant '" + s + "'");
}

/// Size of the robot-centered sensing window.
struct MapSpec {
  double length = 6.0;      // meters, square window
  double resolution = 0.05; // meters per cell
};

struct Scenario {
  std::string name = "scenario";
  World world;
  std::vector<Pose2> path;
  ControllerVariant variant = ControllerVariant::kFullRmp;
  Pose2 start;
  std::uint64_t seed = 0;
  double duration_s = 60.0;
  double start_jitter_xy = 0.0;     // meters, uniform per axis
  double start_jitter_theta = 0.0;  // radians, uniform
  bool occlusion = true;
  MapSpec map;
};

struct TickLog {
  double t = 0.0;
  Pose2 pose;
  Tangent2 twist;
  Pose2 carrot;
  double pte = 0.0;
  ControllerState status = ControllerState::kRunning;
  double solve_ms = 0.0;
  FilterTimings timings;
};

struct RunResult {
  std::vector<TickLog> ticks;
  // kRunning here means the duration limit expired without a terminal
  // controller status.
  ControllerState terminal = ControllerState::kRunning;
  int collision_count = 0;  // entries into contact, not contact ticks
  double sim_time = 0.0;
  double mean_speed = 0.0;  // executed path length / sim time
  Pose2 final_pose;
};

constexpr double kControlHz = 10.0;

/// Deterministic closed loop: sense -> filter chain -> controller tick
/// at 10 Hz, body integration and collision checks at the physics rate.
/// The same scenario and seed always produce the same result.
inline RunResult runScenario(const Scenario& scenario, const TuningParams& tuning = {},
                             const FollowerConfig& follower = {},
                             const FilterParams& filter_params = {}, int physics_hz = 100) {
  if (scenario.path.empty()) throw std::invalid_argument("runScenario: empty path");
  if (physics_hz < kControlHz ||
      std::fmod(static_cast<double>(physics_hz), kControlHz) != 0.0) {
    throw std::invalid_argument("runScenario: physics rate must be a multiple of 10 Hz");
  }
  const int substeps = static_cast<int>(physics_hz / kControlHz);
  const double dt_physics = 1.0 / physics_hz;

  std::mt19937_64 rng(scenario.seed);
  std::uniform_real_distribution<double> uxy(-scenario.start_jitter_xy, scenario.start_jitter_xy);
  std::uniform_real_distribution<double> uth(-scenario.start_jitter_theta,
                                             scenario.start_jitter_theta);
  const double jx = uxy(rng);
  const double jy = uxy(rng);
  const double jt = uth(rng);
  Pose2 pose(scenario.start.x() + jx, scenario.start.y() + jy, scenario.start.theta() + jt);

  const GridGeometry window(scenario.map.length, scenario.map.length, scenario.map.resolution);
  Controller controller(ReferencePath(scenario.path), follower, tuning, scenario.variant);

  RunResult result;
  Tangent2 v;
  bool in_contact = checkCollision(scenario.world, pose, tuning.spheres);
  if (in_contact) ++result.collision_count;
  double traveled = 0.0;

  const int max_ticks = static_cast<int>(std::ceil(scenario.duration_s * kControlHz));
  for (int i = 0; i < max_ticks; ++i) {
    const double t = i / kControlHz;
    const Pose2 carrot = controller.advanceCarrot(pose);
    const GridMap sensed = sense(scenario.world, pose, window, scenario.occlusion);
    FilterTimings timings;
    const auto snapshot =
        runFilterChain(sensed, carrot.translation(), filter_params, t, &timings);
    const TickResult r = controller.tick(pose, v, *snapshot, t);

    TickLog log;
    log.t = t;
    log.pose = pose;
    log.twist = r.twist;
    log.carrot = r.carrot;
    log.pte = r.status.pte;
    log.status = r.status.state;
    log.solve_ms = r.solve_ms;
    log.timings = timings;
    result.ticks.push_back(log);
    result.sim_time = t;

    if (r.status.state != ControllerState::kRunning) {
      result.terminal = r.status.state;
      break;
    }
    v = r.twist;
    for (int k = 0; k < substeps; ++k) {
      const Pose2 next = stepBody(pose, v, dt_physics);
      traveled += (next.translation() - pose.translation()).norm();
      pose = next;
      const bool contact = checkCollision(scenario.world, pose, tuning.spheres);
      if (contact && !in_contact) ++result.collision_count;
      in_contact = contact;
    }
  }

  result.final_pose = pose;
  result.mean_speed = result.sim_time > 0.0 ? traveled / result.sim_time : 0.0;
  return result;
}

struct SuiteRow {
  ControllerVariant variant = ControllerVariant::kFullRmp;
  int reps = 0;
  int successes = 0;        // terminal == GoalReached
  int total_collisions = 0;
  int max_collisions = 0;   // worst single rep
  double mean_speed = 0.0;
  double mean_pte = 0.0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  // First-rep run per variant, for rendering.
  std::vector<RunResult> representatives;
};

/// Repeats the scenario per variant with seeds seed, seed+1, ... and
/// aggregates outcome statistics.
inline SuiteResult runSuite(const Scenario& scenario,
                            const std::vector<ControllerVariant>& variants, int reps,
                            const TuningParams& tuning = {}, const FollowerConfig& follower = {},
                            const FilterParams& filter_params = {}) {
  if (reps < 1) throw std::invalid_argument("runSuite: reps must be >= 1");
  SuiteResult suite;
  for (const ControllerVariant variant : variants) {
    SuiteRow row;
    row.variant = variant;
    row.reps = reps;
    double speed_sum = 0.0;
    double pte_sum = 0.0;
    std::size_t pte_count = 0;
    for (int rep = 0; rep < reps; ++rep) {
      Scenario s = scenario;
      s.variant = variant;
      s.seed = scenario.seed + static_cast<std::uint64_t>(rep);
      const RunResult run = runScenario(s, tuning, follower, filter_params);
      if (run.terminal == ControllerState::kGoalReached) ++row.successes;
      row.total_collisions += run.collision_count;
      row.max_collisions = std::max(row.max_collisions, run.collision_count);
      speed_sum += run.mean_speed;
      for (const TickLog& tick : run.ticks) pte_sum += tick.pte;
      pte_count += run.ticks.size();
      if (rep == 0) suite.representatives.push_back(run);
    }
    row.mean_speed = speed_sum / reps;
    row.mean_pte = pte_count > 0 ? pte_sum / static_cast<double>(pte_count) : 0.0;
    suite.rows.push_back(row);
  }
  return suite;
}

}  // namespace rmpnav
