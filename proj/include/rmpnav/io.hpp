#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmpnav/controller.hpp"
#include "rmpnav/sim.hpp"

namespace rmpnav {

/// Shortest round-trip decimal form; identical inputs give identical
/// bytes, which the deterministic-rerun guarantee relies on.
inline std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Scenario files

inline Pose2 poseFromJson(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw std::runtime_error(what + ": expected [x, y, theta]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Scenario scenarioFromJson(const nlohmann::json& j) {
  Scenario s;
  s.name = j.value("name", std::string("scenario"));

  if (!j.contains("world")) throw std::runtime_error("scenario: missing 'world'");
  const auto& jw = j["world"];
  s.world.ground_height = jw.value("ground_height", 0.0);
  if (jw.contains("bounds")) {
    const auto& b = jw["bounds"];
    if (!b.is_array() || b.size() != 4) {
      throw std::runtime_error("world.bounds: expected [x_min, x_max, y_min, y_max]");
    }
    s.world.x_min = b[0].get<double>();
    s.world.x_max = b[1].get<double>();
    s.world.y_min = b[2].get<double>();
    s.world.y_max = b[3].get<double>();
    if (s.world.x_min >= s.world.x_max || s.world.y_min >= s.world.y_max) {
      throw std::runtime_error("world.bounds: min must be below max on both axes");
    }
  }
  for (const auto& jo : jw.value("obstacles", nlohmann::json::array())) {
    const std::string type = jo.value("type", std::string());
    const double height = jo.value("height", 1.0);
    if (height <= s.world.ground_height + 0.2) {
      throw std::runtime_error(
          "obstacle height must rise at least 0.2 m above the ground so it "
          "maps to non-traversable cells");
    }
    if (type == "box") {
      const auto& x = jo.at("x");
      const auto& y = jo.at("y");
      if (!x.is_array() || x.size() != 2 || !y.is_array() || y.size() != 2) {
        throw std::runtime_error("box obstacle: expected x: [x0, x1], y: [y0, y1]");
      }
      BoxObstacle box{x[0].get<double>(), x[1].get<double>(), y[0].get<double>(),
                      y[1].get<double>(), height};
      if (box.x0 >= box.x1 || box.y0 >= box.y1) {
        throw std::runtime_error("box obstacle: degenerate extent");
      }
      s.world.boxes.push_back(box);
    } else if (type == "circle") {
      const auto& c = jo.at("center");
      if (!c.is_array() || c.size() != 2) {
        throw std::runtime_error("circle obstacle: expected center: [x, y]");
      }
      CircleObstacle circle{{c[0].get<double>(), c[1].get<double>()},
                            jo.at("radius").get<double>(), height};
      if (circle.radius <= 0.0) throw std::runtime_error("circle obstacle: radius must be > 0");
      s.world.circles.push_back(circle);
    } else {
      throw std::runtime_error("obstacle type must be 'box' or 'circle', got '" + type + "'");
    }
  }

  if (!j.contains("path") || !j["path"].is_array() || j["path"].empty()) {
    throw std::runtime_error("scenario: 'path' must be a non-empty array of waypoints");
  }
  std::vector<std::array<double, 2>> xy;
  std::vector<std::optional<double>> theta;
  for (const auto& jp : j["path"]) {
    if (!jp.is_array() || jp.size() < 2 || jp.size() > 3) {
      throw std::runtime_error("path entry: expected [x, y] or [x, y, theta]");
    }
    xy.push_back({jp[0].get<double>(), jp[1].get<double>()});
    theta.push_back(jp.size() == 3 ? std::optional<double>(jp[2].get<double>()) : std::nullopt);
  }
  for (std::size_t i = 0; i < xy.size(); ++i) {
    double th = 0.0;
    if (theta[i]) {
      th = *theta[i];
    } else if (i + 1 == xy.size() && i > 0) {
      // Goal heading defaults to the incoming tangent.
      th = std::atan2(xy[i][1] - xy[i - 1][1], xy[i][0] - xy[i - 1][0]);
    }
    s.path.emplace_back(xy[i][0], xy[i][1], th);
  }

  if (!j.contains("start")) throw std::runtime_error("scenario: missing 'start'");
  s.start = poseFromJson(j["start"], "start");

  try {
    s.variant = variantFromString(j.value("variant", std::string("full_rmp")));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  s.seed = j.value("seed", static_cast<std::uint64_t>(0));
  s.duration_s = j.value("duration_s", 60.0);
  if (!(s.duration_s > 0.0)) throw std::runtime_error("scenario: duration_s must be > 0");
  s.start_jitter_xy = j.value("start_jitter_xy", 0.0);
  s.start_jitter_theta = j.value("start_jitter_theta", 0.0);
  s.occlusion = j.value("occlusion", true);
  if (j.contains("map")) {
    s.map.length = j["map"].value("length", s.map.length);
    s.map.resolution = j["map"].value("resolution", s.map.resolution);
    if (!(s.map.resolution > 0.0) || s.map.length < 10.0 * s.map.resolution) {
      throw std::runtime_error("scenario: map window must span at least 10 cells");
    }
  }
  return s;
}

inline Scenario loadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("scenario '" + path + "': " + e.what());
  }
  try {
    return scenarioFromJson(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("scenario '" + path + "': " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("scenario '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV logs

inline void writeFileOrThrow(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Deterministic per-tick log; wall-clock timings live in the separate
/// timing CSVs so same-seed reruns stay byte-identical.
inline void writeRunCsv(const std::string& path, const RunResult& result) {
  std::ostringstream out;
  out << "t,x,y,theta,vx,vy,wtheta,carrot_x,carrot_y,pte,status\n";
  for (const TickLog& tick : result.ticks) {
    out << formatDouble(tick.t) << ',' << formatDouble(tick.pose.x()) << ','
        << formatDouble(tick.pose.y()) << ',' << formatDouble(tick.pose.theta()) << ','
        << formatDouble(tick.twist.vx) << ',' << formatDouble(tick.twist.vy) << ','
        << formatDouble(tick.twist.wtheta) << ',' << formatDouble(tick.carrot.x()) << ','
        << formatDouble(tick.carrot.y()) << ',' << formatDouble(tick.pte) << ','
        << toString(tick.status) << '\n';
  }
  writeFileOrThrow(path, out.str());
}

inline void writeControllerTimingCsv(const std::string& path, const RunResult& result) {
  std::ostringstream out;
  out << "t,solve_ms\n";
  for (const TickLog& tick : result.ticks) {
    out << formatDouble(tick.t) << ',' << formatDouble(tick.solve_ms) << '\n';
  }
  writeFileOrThrow(path, out.str());
}

inline void writeFilterTimingCsv(const std::string& path, const RunResult& result) {
  std::ostringstream out;
  out << "t,inpaint_ms,traversability_ms,sdf_ms,gdf_ms,total_ms\n";
  for (const TickLog& tick : result.ticks) {
    out << formatDouble(tick.t) << ',' << formatDouble(tick.timings.inpaint_ms) << ','
        << formatDouble(tick.timings.traversability_ms) << ','
        << formatDouble(tick.timings.sdf_ms) << ',' << formatDouble(tick.timings.gdf_ms) << ','
        << formatDouble(tick.timings.total_ms) << '\n';
  }
  writeFileOrThrow(path, out.str());
}

inline void writeSuiteCsv(const std::string& path, const SuiteResult& suite) {
  std::ostringstream out;
  out << "variant,reps,successes,total_collisions,max_collisions,mean_speed,mean_pte\n";
  for (const SuiteRow& row : suite.rows) {
    out << toString(row.variant) << ',' << row.reps << ',' << row.successes << ','
        << row.total_collisions << ',' << row.max_collisions << ','
        << formatDouble(row.mean_speed) << ',' << formatDouble(row.mean_pte) << '\n';
  }
  writeFileOrThrow(path, out.str());
}

// ---------------------------------------------------------------------------
// Images

/// 16-bit grayscale PGM (big-endian samples, as the format requires).
/// Values scale linearly from [lo, hi] to [0, 65535]; NaN maps to 0,
/// +inf to 65535. Image rows run top-down, so grid +y points up in the
/// image. A sidecar '<path>.meta' records the scaling for readers.
inline void writePgm16(const std::string& path, const std::vector<double>& values, int nx, int ny,
                       double lo, double hi) {
  if (static_cast<std::size_t>(nx) * ny != values.size()) {
    throw std::invalid_argument("writePgm16: size mismatch");
  }
  if (!(hi > lo)) throw std::invalid_argument("writePgm16: need hi > lo");
  std::string out;
  out.reserve(values.size() * 2 + 64);
  out += "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = values[static_cast<std::size_t>(iy) * nx + ix];
      std::uint16_t q = 0;
      if (std::isnan(v)) {
        q = 0;
      } else if (std::isinf(v)) {
        q = v > 0 ? 65535 : 0;
      } else {
        const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      }
      out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xff));
    }
  }
  writeFileOrThrow(path, out);
  writeFileOrThrow(path + ".meta", "nx=" + std::to_string(nx) + "\nny=" + std::to_string(ny) +
                                       "\nlo=" + formatDouble(lo) + "\nhi=" + formatDouble(hi) +
                                       "\n");
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// Binary PPM; the pixel buffer is row-major with row 0 at the top.
inline void writePpm(const std::string& path, const std::vector<Rgb>& pixels, int nx, int ny) {
  if (static_cast<std::size_t>(nx) * ny != pixels.size()) {
    throw std::invalid_argument("writePpm: size mismatch");
  }
  std::string out;
  out.reserve(pixels.size() * 3 + 64);
  out += "P6\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  for (const Rgb& p : pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  writeFileOrThrow(path, out);
}

// ---------------------------------------------------------------------------
// Tuning overrides

/// Flat key registry over the tuning and follower structs; `--set` and
/// tuning files only accept these names.
inline std::vector<std::pair<std::string, double*>> tuningRegistry(TuningParams& t,
                                                                   FollowerConfig& f) {
  return {
      {"gdf_goal.k", &t.gdf_goal.k},
      {"gdf_goal.d_c", &t.gdf_goal.d_c},
      {"gdf_goal.alpha", &t.gdf_goal.alpha},
      {"freespace_goal.k", &t.freespace_goal.k},
      {"freespace_goal.d_c", &t.freespace_goal.d_c},
      {"freespace_goal.alpha", &t.freespace_goal.alpha},
      {"obstacle.k", &t.obstacle.k},
      {"obstacle.d_c", &t.obstacle.d_c},
      {"obstacle.alpha", &t.obstacle.alpha},
      {"heading.k", &t.heading.k},
      {"heading.d_c", &t.heading.d_c},
      {"heading.alpha", &t.heading.alpha},
      {"damping.k", &t.damping.k},
      {"regularization.s", &t.regularization.s},
      {"limits.vx", &t.limits.vx},
      {"limits.vy", &t.limits.vy},
      {"limits.wtheta", &t.limits.wtheta},
      {"control_dt", &t.control_dt},
      {"follower.d_carrot", &f.d_carrot},
      {"follower.position_tolerance", &f.position_tolerance},
      {"follower.angular_tolerance", &f.angular_tolerance},
      {"follower.stuck_window", &f.stuck_window},
      {"follower.stuck_displacement", &f.stuck_displacement},
  };
}

inline void applyTuningOverride(TuningParams& tuning, FollowerConfig& follower,
                                const std::string& key, double value) {
  if (key == "sphere.radius") {
    if (!(value > 0.0)) throw std::invalid_argument("sphere.radius must be > 0");
    for (CollisionSphere& sphere : tuning.spheres) sphere.radius = value;
    return;
  }
  for (auto& [name, target] : tuningRegistry(tuning, follower)) {
    if (name == key) {
      *target = value;
      return;
    }
  }
  throw std::invalid_argument("unknown tuning key '" + key + "'");
}

inline std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

/// Parses "key=value" as used by --set and tuning files; whitespace
/// around the separator is ignored.
inline std::pair<std::string, double> parseKeyValue(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("expected KEY=VALUE, got '" + arg + "'");
  }
  const std::string key = trimmed(arg.substr(0, eq));
  const std::string raw = trimmed(arg.substr(eq + 1));
  if (key.empty()) throw std::invalid_argument("expected KEY=VALUE, got '" + arg + "'");
  try {
    std::size_t used = 0;
    const double value = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return {key, value};
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid numeric value in '" + arg + "'");
  }
}

/// Loads KEY=VALUE lines; '#' starts a comment, blank lines are skipped.
inline void loadTuningFile(const std::string& path, TuningParams& tuning,
                           FollowerConfig& follower) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tuning file '" + path + "'");
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    try {
      const auto [key, value] = parseKeyValue(line);
      applyTuningOverride(tuning, follower, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace rmpnav
