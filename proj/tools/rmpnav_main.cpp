// Command-line front end: run scenarios, aggregate suites, benchmark the
// filter chain and controller, render field images, validate scenario
// files. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rmpnav/io.hpp"
#include "rmpnav/render.hpp"
#include "rmpnav/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::string tuning_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  bool no_occlusion = false;
};

void addScenarioOptions(CLI::App* cmd, CommonOptions* opts, bool with_out) {
  cmd->add_option("--scenario", opts->scenario_path, "Scenario JSON file")->required();
  if (with_out) cmd->add_option("--out", opts->out_dir, "Output directory (created if absent)");
  cmd->add_option("--set", opts->overrides, "Tuning override KEY=VALUE (repeatable)");
  cmd->add_option("--tuning", opts->tuning_file, "Tuning file with KEY=VALUE lines");
  cmd->add_option("--seed", opts->seed, "Override the scenario seed");
  cmd->add_option("--variant", opts->variant,
                  "Override the controller variant "
                  "(full_rmp|potential_field|gdf_only|gdf_avoidance)");
  cmd->add_flag("--no-occlusion", opts->no_occlusion, "Disable sensing shadows");
}

rmpnav::Scenario loadScenarioChecked(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("scenario file not found: " + path);
  return rmpnav::loadScenario(path);
}

struct Setup {
  rmpnav::Scenario scenario;
  rmpnav::TuningParams tuning;
  rmpnav::FollowerConfig follower;
};

Setup applyCommon(const CommonOptions& opts) {
  Setup setup{loadScenarioChecked(opts.scenario_path), {}, {}};
  if (!opts.tuning_file.empty()) {
    if (!fs::exists(opts.tuning_file)) {
      throw UsageError("tuning file not found: " + opts.tuning_file);
    }
    rmpnav::loadTuningFile(opts.tuning_file, setup.tuning, setup.follower);
  }
  for (const std::string& arg : opts.overrides) {
    const auto [key, value] = rmpnav::parseKeyValue(arg);
    rmpnav::applyTuningOverride(setup.tuning, setup.follower, key, value);
  }
  if (opts.seed) setup.scenario.seed = *opts.seed;
  if (opts.variant) setup.scenario.variant = rmpnav::variantFromString(*opts.variant);
  if (opts.no_occlusion) setup.scenario.occlusion = false;
  return setup;
}

void ensureOutDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

void printRunSummary(const rmpnav::Scenario& scenario, const rmpnav::RunResult& result) {
  const char* terminal = result.terminal == rmpnav::ControllerState::kRunning
                             ? "timeout"
                             : rmpnav::toString(result.terminal);
  std::cout << scenario.name << " [" << rmpnav::toString(scenario.variant) << "] seed "
            << scenario.seed << ": " << terminal << " after " << result.sim_time << " s, "
            << result.collision_count << " collision(s), final pose (" << result.final_pose.x()
            << ", " << result.final_pose.y() << ", " << result.final_pose.theta()
            << "), mean speed " << result.mean_speed << " m/s\n";
}

int cmdRun(const CommonOptions& opts, bool render_only) {
  const Setup setup = applyCommon(opts);
  ensureOutDir(opts.out_dir);
  const rmpnav::RunResult result =
      rmpnav::runScenario(setup.scenario, setup.tuning, setup.follower);
  if (!render_only) {
    rmpnav::writeRunCsv(opts.out_dir + "/run.csv", result);
    rmpnav::writeControllerTimingCsv(opts.out_dir + "/controller_timing.csv", result);
    rmpnav::writeFilterTimingCsv(opts.out_dir + "/timing.csv", result);
  }
  rmpnav::renderRun(opts.out_dir, setup.scenario, &result);
  printRunSummary(setup.scenario, result);
  return kExitOk;
}

int cmdSuite(const CommonOptions& opts, int reps, const std::string& variants_csv) {
  const Setup setup = applyCommon(opts);
  ensureOutDir(opts.out_dir);

  std::vector<rmpnav::ControllerVariant> variants;
  std::stringstream ss(variants_csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) variants.push_back(rmpnav::variantFromString(token));
  }
  if (variants.empty()) throw UsageError("no variants given");

  const rmpnav::SuiteResult suite = rmpnav::runSuite(setup.scenario, variants, reps, setup.tuning,
                                                     setup.follower);
  rmpnav::writeSuiteCsv(opts.out_dir + "/suite.csv", suite);
  for (std::size_t i = 0; i < suite.rows.size(); ++i) {
    const rmpnav::SuiteRow& row = suite.rows[i];
    const std::string sub = opts.out_dir + "/" + rmpnav::toString(row.variant);
    ensureOutDir(sub);
    rmpnav::Scenario rendered = setup.scenario;
    rendered.variant = row.variant;
    rmpnav::renderRun(sub, rendered, &suite.representatives[i]);
    std::cout << rmpnav::toString(row.variant) << ": " << row.successes << "/" << row.reps
              << " reached, " << row.total_collisions << " collision(s) total (max "
              << row.max_collisions << " in a rep), mean speed " << row.mean_speed
              << " m/s, mean pte " << row.mean_pte << " m\n";
  }
  std::cout << "wrote " << opts.out_dir << "/suite.csv\n";
  return kExitOk;
}

struct Stats {
  double mean = 0.0;
  double p95 = 0.0;
};

Stats statsOf(std::vector<double> samples) {
  Stats s;
  if (samples.empty()) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const std::size_t idx =
      std::min(samples.size() - 1,
               static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size()))) -
                   1);
  s.p95 = samples[idx];
  return s;
}

int cmdBench(int grid, int reps, std::uint64_t seed, const std::string& out_dir) {
  if (grid < 20) throw UsageError("--grid must be at least 20 cells");
  if (reps < 10) throw UsageError("--reps must be at least 10");

  const double res = 0.05;
  const double half = 0.5 * grid * res;
  rmpnav::World world;
  world.x_min = world.y_min = -half - 1.0;
  world.x_max = world.y_max = half + 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upos(-0.8 * half, 0.8 * half);
  std::uniform_real_distribution<double> usize(0.3, 1.2);
  for (int i = 0; i < 8; ++i) {
    const double cx = upos(rng);
    const double cy = upos(rng);
    const double w = usize(rng);
    const double h = usize(rng);
    world.boxes.push_back({cx - 0.5 * w, cx + 0.5 * w, cy - 0.5 * h, cy + 0.5 * h, 0.7});
  }
  for (int i = 0; i < 4; ++i) {
    world.circles.push_back({{upos(rng), upos(rng)}, 0.5 * usize(rng), 0.7});
  }

  const rmpnav::GridGeometry window(grid * res, grid * res, res);
  const rmpnav::GridMap sensed = rmpnav::sense(world, rmpnav::Pose2(), window);
  const Eigen::Vector2d goal(0.45 * half, 0.0);

  std::vector<double> inpaint, trav, sdf, gdf, total;
  std::shared_ptr<const rmpnav::MapSnapshot> snapshot;
  for (int rep = 0; rep < reps; ++rep) {
    rmpnav::FilterTimings t;
    snapshot = rmpnav::runFilterChain(sensed, goal, {}, rep, &t);
    inpaint.push_back(t.inpaint_ms);
    trav.push_back(t.traversability_ms);
    sdf.push_back(t.sdf_ms);
    gdf.push_back(t.gdf_ms);
    total.push_back(t.total_ms);
  }

  const rmpnav::ReferencePath path({rmpnav::Pose2(-0.45 * half, 0, 0),
                                    rmpnav::Pose2(0.45 * half, 0, 0)});
  std::vector<double> solve;
  for (int rep = 0; rep < reps; ++rep) {
    rmpnav::Controller controller(path, {}, {});
    const auto r = controller.tick(rmpnav::Pose2(-0.4 * half, 0.05, 0.0),
                                   rmpnav::Tangent2(0.2, 0, 0), *snapshot, 0.0);
    solve.push_back(r.solve_ms);
  }

  struct Line {
    const char* stage;
    Stats stats;
    double budget;  // <= 0 means informational only
  };
  const std::vector<Line> lines = {
      {"inpaint", statsOf(inpaint), 0.0},        {"traversability", statsOf(trav), 0.0},
      {"sdf", statsOf(sdf), 0.0},                {"gdf", statsOf(gdf), 25.0},
      {"filter_total", statsOf(total), 100.0},   {"controller", statsOf(solve), 2.0},
  };

  std::ostringstream csv;
  csv << "stage,mean_ms,p95_ms,budget_ms\n";
  bool breached = false;
  std::cout << "grid " << grid << "x" << grid << ", " << reps << " repetitions\n";
  for (const Line& line : lines) {
    std::cout << "  " << line.stage << ": mean " << line.stats.mean << " ms, p95 "
              << line.stats.p95 << " ms";
    if (line.budget > 0.0) {
      const bool ok = line.stats.mean <= line.budget;
      breached = breached || !ok;
      std::cout << " (budget " << line.budget << " ms: " << (ok ? "ok" : "OVER") << ")";
    }
    std::cout << "\n";
    csv << line.stage << ',' << rmpnav::formatDouble(line.stats.mean) << ','
        << rmpnav::formatDouble(line.stats.p95) << ',' << rmpnav::formatDouble(line.budget)
        << '\n';
  }
  if (!out_dir.empty()) {
    ensureOutDir(out_dir);
    rmpnav::writeFileOrThrow(out_dir + "/bench.csv", csv.str());
    std::cout << "wrote " << out_dir << "/bench.csv\n";
  }

  const char* hard = std::getenv("RNAV_BENCH_HARD");
  if (breached && hard && std::string(hard) == "1") {
    std::cerr << "bench: budget exceeded (hard gate enabled)\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmdValidate(const std::string& path) {
  if (!fs::exists(path)) {
    std::cerr << "scenario file not found: " << path << "\n";
    return kExitUsage;
  }
  const rmpnav::Scenario s = rmpnav::loadScenario(path);
  std::cout << "OK: " << s.name << " (" << s.world.boxes.size() << " box(es), "
            << s.world.circles.size() << " circle(s), " << s.path.size() << " waypoint(s), "
            << "variant " << rmpnav::toString(s.variant) << ", " << s.duration_s << " s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reactive navigation: scenario runs, suites, benchmarks, renders"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one scenario; write CSV logs and renders");
  addScenarioOptions(run, &run_opts, true);

  CommonOptions suite_opts;
  int suite_reps = 10;
  std::string suite_variants = "full_rmp,potential_field,gdf_only";
  CLI::App* suite = app.add_subcommand("suite", "Repeat a scenario per variant and aggregate");
  addScenarioOptions(suite, &suite_opts, true);
  suite->add_option("--reps", suite_reps, "Repetitions per variant")->check(CLI::Range(1, 1000));
  suite->add_option("--variants", suite_variants, "Comma-separated variant list");

  int bench_grid = 200;
  int bench_reps = 100;
  std::uint64_t bench_seed = 1;
  std::string bench_out;
  CLI::App* bench = app.add_subcommand("bench", "Time the filter chain and controller");
  bench->add_option("--grid", bench_grid, "Grid size in cells per side");
  bench->add_option("--reps", bench_reps, "Repetitions");
  bench->add_option("--seed", bench_seed, "Synthetic world seed");
  bench->add_option("--out", bench_out, "Optional directory for bench.csv");

  CommonOptions render_opts;
  CLI::App* render = app.add_subcommand("render", "Run a scenario and write only the images");
  addScenarioOptions(render, &render_opts, true);

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", validate_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmdRun(run_opts, false);
    if (suite->parsed()) return cmdSuite(suite_opts, suite_reps, suite_variants);
    if (bench->parsed()) return cmdBench(bench_grid, bench_reps, bench_seed, bench_out);
    if (render->parsed()) return cmdRun(render_opts, true);
    if (validate->parsed()) return cmdValidate(validate_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
