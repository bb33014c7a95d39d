// Copyright 2026 The rmpc_push Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Episode runner, collision-ratio metrics and planner comparison tables.
//
// A collision event is a step whose summed non-target displacement exceeds
// reward.collision_epsilon. The collision ratio of an episode is its event
// count over its step count. recall(k) is the fraction of episodes whose
// ratio is at most k.

#ifndef RMPC_PUSH_EVAL_HPP_
#define RMPC_PUSH_EVAL_HPP_

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rmpc_push/config.hpp"
#include "rmpc_push/core.hpp"
#include "rmpc_push/physics.hpp"
#include "rmpc_push/planners.hpp"
#include "rmpc_push/reward.hpp"
#include "rmpc_push/scene_io.hpp"

namespace rmpc_push {

struct StepRecord {
  RobotAction action;
  SceneState state;  // after the step
  StepReward reward;
};

struct EpisodeLog {
  std::string scene_id;
  PlannerKind planner = PlannerKind::kRmpc;
  std::string config_hash;
  std::vector<StepRecord> steps;
  int steps_taken = 0;
  bool success = false;
  int collision_events = 0;
  double collision_ratio = 0.0;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  bool failed = false;  // planner or simulation error
  std::string failure_reason;

  /// Episodes that never executed a step carry no trajectory to score.
  bool has_trajectory() const { return steps_taken > 0; }
};

/// Differences between the executing world and the planner's model.
struct WorldPerturbation {
  double target_mass_scale = 1.0;
};

/// One scene with its identity and per-scene seed.
struct SceneCase {
  std::string id;
  SceneState state;
  PushTask task;
  std::uint64_t seed = 0;
};

namespace detail {

// The planner sees the world's poses and velocities but its own masses.
inline SceneState observe(const SceneState& world, const SceneState& model) {
  SceneState obs = world;
  for (std::size_t i = 0; i < obs.objects.size(); ++i) obs.objects[i].mass = model.objects[i].mass;
  return obs;
}

inline void finish(EpisodeLog& log, const SceneState& last, const PushTask& task) {
  log.steps_taken = static_cast<int>(log.steps.size());
  log.collision_events = 0;
  for (const auto& s : log.steps) log.collision_events += s.reward.collision_event ? 1 : 0;
  log.collision_ratio = log.steps_taken > 0 ? static_cast<double>(log.collision_events) / log.steps_taken : 0.0;
  log.final_distance = target_goal_distance(last, task);
  log.success = log.final_distance <= task.goal_tolerance;
}

}  // namespace detail

/// Alternates plan, step and reward until the target is within tolerance
/// or max_steps have run. Always executes at least one step. Planner and
/// simulation failures end the episode and are recorded, not thrown.
inline EpisodeLog run_episode(const SceneCase& scene, const Settings& settings, int max_steps,
                              const WorldPerturbation& perturb = {}) {
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  PlanningContext ctx = settings.context();
  ctx.planner.seed = mix_seed(settings.planner.seed, scene.seed);
  const PushTask& task = scene.task;

  EpisodeLog log;
  log.scene_id = scene.id;
  log.planner = settings.planner.kind;
  log.config_hash = config_hash(settings);
  log.initial_distance = target_goal_distance(scene.state, task);

  SceneState world = scene.state;
  if (ObjectState* t = world.find(task.target_id)) t->mass *= perturb.target_mass_scale;

  const DisplacementFilter filter{task.target_id, ctx.reward.angular_weight, ctx.reward.collision_epsilon};
  auto execute = [&](const RobotAction& a) {
    auto [next, report] = step(world, a, ctx.physics, filter);
    StepRecord rec{a, next, step_reward(world, next, task, ctx.reward)};
    log.steps.push_back(std::move(rec));
    world = std::move(next);
    return target_goal_distance(world, task) <= task.goal_tolerance;
  };

  try {
    if (ctx.planner.kind == PlannerKind::kOpenLoop) {
      const auto seq = open_loop_plan(scene.state, task, ctx, max_steps);
      for (const auto& a : seq)
        if (execute(a)) break;
    } else {
      for (int t = 0; t < max_steps; ++t) {
        const RobotAction a = plan_next(detail::observe(world, scene.state), task, ctx);
        if (execute(a)) break;
      }
    }
  } catch (const PlannerError& e) {
    log.failed = true;
    log.failure_reason = e.what();
  } catch (const SimulationError& e) {
    log.failed = true;
    log.failure_reason = e.what();
  }
  detail::finish(log, world, task);
  return log;
}

inline double recall_at_k(std::span<const double> ratios, double k) {
  if (ratios.empty()) throw InvalidArgument("recall_at_k needs at least one episode");
  const auto hits = std::count_if(ratios.begin(), ratios.end(), [k](double r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ratios.size());
}

/// Collision ratios of episodes that executed at least one step.
inline std::vector<double> collision_ratios(std::span<const EpisodeLog> logs, bool success_only = false) {
  std::vector<double> out;
  for (const auto& l : logs)
    if (l.has_trajectory() && (!success_only || l.success)) out.push_back(l.collision_ratio);
  return out;
}

inline double recall_at_k(std::span<const EpisodeLog> logs, double k) {
  return recall_at_k(std::span<const double>(collision_ratios(logs)), k);
}

struct RecallPoint {
  double k = 0.0;
  double recall = 0.0;
};

inline std::vector<RecallPoint> recall_curve(std::span<const double> ratios, std::span<const double> k_grid) {
  if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw InvalidArgument("k grid must be sorted ascending");
  std::vector<RecallPoint> out;
  out.reserve(k_grid.size());
  for (double k : k_grid) out.push_back({k, recall_at_k(ratios, k)});
  return out;
}

inline std::vector<RecallPoint> recall_curve(std::span<const EpisodeLog> logs, std::span<const double> k_grid,
                                             bool success_only = false) {
  const auto ratios = collision_ratios(logs, success_only);
  return recall_curve(std::span<const double>(ratios), k_grid);
}

/// 0.00, 0.05, ..., 1.00.
inline std::vector<double> default_k_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i * 0.05);
  return g;
}

struct PlannerSummary {
  PlannerKind planner = PlannerKind::kRmpc;
  int episodes = 0;
  int scored = 0;  // episodes with a trajectory
  double mean_collision_ratio = 0.0;
  double success_rate = 0.0;
  double mean_final_distance = 0.0;
  std::vector<RecallPoint> recall;          // all scored episodes; NaN if none
  std::vector<RecallPoint> recall_success;  // successful episodes only; empty if none
};

struct Comparison {
  std::vector<PlannerKind> planners;
  std::vector<EpisodeLog> logs;  // planner-major, scene order within
  std::vector<PlannerSummary> summaries;

  std::span<const EpisodeLog> logs_for(std::size_t planner_index) const {
    const std::size_t n = logs.size() / planners.size();
    return std::span<const EpisodeLog>(logs).subspan(planner_index * n, n);
  }
};

inline PlannerSummary summarize(PlannerKind kind, std::span<const EpisodeLog> logs, std::span<const double> k_grid) {
  PlannerSummary s;
  s.planner = kind;
  s.episodes = static_cast<int>(logs.size());
  int successes = 0;
  double ratio_sum = 0.0, dist_sum = 0.0;
  for (const auto& l : logs) {
    if (l.success) ++successes;
    dist_sum += l.final_distance;
    if (l.has_trajectory()) {
      ++s.scored;
      ratio_sum += l.collision_ratio;
    }
  }
  s.mean_collision_ratio = s.scored > 0 ? ratio_sum / s.scored : 0.0;
  s.success_rate = s.episodes > 0 ? static_cast<double>(successes) / s.episodes : 0.0;
  s.mean_final_distance = s.episodes > 0 ? dist_sum / s.episodes : 0.0;
  if (s.scored > 0) {
    s.recall = recall_curve(logs, k_grid);
  } else {
    // Nothing to score: keep one row per k so every planner shows up.
    for (double k : k_grid) s.recall.push_back({k, std::numeric_limits<double>::quiet_NaN()});
  }
  if (successes > 0) s.recall_success = recall_curve(logs, k_grid, true);
  return s;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs `jobs` independent tasks on up to `workers` threads (0 picks the
/// hardware concurrency). Results land at their job index, so output never
/// depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t jobs, int workers, Fn&& fn, const ProgressFn& progress = {}) {
  std::size_t n_threads = workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, std::max<std::size_t>(jobs, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs; i = next++) {
      fn(i);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, jobs);
      }
    }
  };
  if (n_threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

/// Every planner runs on every scene with the same per-scene seed.
inline Comparison compare_planners(std::span<const SceneCase> scenes, std::span<const PlannerKind> planners,
                                   const Settings& settings, int workers = 0, const WorldPerturbation& perturb = {},
                                   const ProgressFn& progress = {}) {
  if (scenes.empty()) throw InvalidArgument("compare_planners: empty scene batch");
  if (planners.empty()) throw InvalidArgument("compare_planners: no planners");
  Comparison c;
  c.planners.assign(planners.begin(), planners.end());
  c.logs.resize(scenes.size() * planners.size());
  parallel_for(
      c.logs.size(), workers,
      [&](std::size_t job) {
        const std::size_t p = job / scenes.size();
        const std::size_t i = job % scenes.size();
        Settings s = settings;
        s.planner.kind = planners[p];
        c.logs[job] = run_episode(scenes[i], s, settings.eval.max_steps, perturb);
      },
      progress);
  const auto grid = default_k_grid();
  for (std::size_t p = 0; p < planners.size(); ++p) c.summaries.push_back(summarize(planners[p], c.logs_for(p), grid));
  return c;
}

// ---- CSV outputs (floats with 9 significant digits) ----

inline std::string episodes_csv(const Comparison& c) {
  std::string out =
      "planner,config_hash,scene_id,steps,success,collision_events,collision_ratio,initial_distance,final_distance,"
      "failed,failure_reason\n";
  for (std::size_t p = 0; p < c.planners.size(); ++p) {
    auto logs = std::vector<EpisodeLog>(c.logs_for(p).begin(), c.logs_for(p).end());
    std::stable_sort(logs.begin(), logs.end(), [](const EpisodeLog& a, const EpisodeLog& b) { return a.scene_id < b.scene_id; });
    for (const auto& l : logs) {
      std::string reason = l.failure_reason;
      std::replace(reason.begin(), reason.end(), ',', ';');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      out += std::string(to_string(l.planner)) + "," + l.config_hash + "," + l.scene_id + "," +
             std::to_string(l.steps_taken) + "," + (l.success ? "true" : "false") + "," +
             std::to_string(l.collision_events) + "," + format_g9(l.collision_ratio) + "," +
             format_g9(l.initial_distance) + "," + format_g9(l.final_distance) + "," + (l.failed ? "true" : "false") +
             "," + reason + "\n";
    }
  }
  return out;
}

/// subset is "all" (every scored episode) or "success" (successful ones).
inline std::string recall_csv(const Comparison& c) {
  std::string out = "planner,subset,k,recall\n";
  for (const auto& s : c.summaries) {
    for (const auto& pt : s.recall)
      out += std::string(to_string(s.planner)) + ",all," + format_g9(pt.k) + "," + format_g9(pt.recall) + "\n";
    for (const auto& pt : s.recall_success)
      out += std::string(to_string(s.planner)) + ",success," + format_g9(pt.k) + "," + format_g9(pt.recall) + "\n";
  }
  return out;
}

inline std::string summary_csv(const Comparison& c) {
  std::string out = "planner,mean_ratio,success_rate,episodes,scored,mean_final_distance\n";
  for (const auto& s : c.summaries)
    out += std::string(to_string(s.planner)) + "," + format_g9(s.mean_collision_ratio) + "," +
           format_g9(s.success_rate) + "," + std::to_string(s.episodes) + "," + std::to_string(s.scored) + "," +
           format_g9(s.mean_final_distance) + "\n";
  return out;
}

// ---- Step-level trajectory CSV and replay ----
//
// Lines starting with '#' carry the scene id, any world perturbation and
// the full settings echo.
// Columns: step,t,action_vx,action_vy,action_ax,action_ay,robot_x,robot_y,
// robot_vx,robot_vy, then obj<id>_x,obj<id>_y,obj<id>_theta per object,
// then reward,collision. Row k is the state after step k (k from 1).
// Numbers use 17 significant digits so states round-trip bit-exactly.

inline std::string trajectory_csv(const EpisodeLog& log, const SceneState& initial, const Settings& settings,
                                  const PushTask& task = {}, const WorldPerturbation& perturb = {}) {
  std::string out = "# rmpc_push trajectory\n# scene_id=" + log.scene_id + "\n";
  if (perturb.target_mass_scale != 1.0) {
    out += "# world.target_id=" + std::to_string(task.target_id) + "\n";
    out += "# world.target_mass_scale=" + format_g17(perturb.target_mass_scale) + "\n";
  }
  const std::string cfg = echo(settings);
  std::size_t pos = 0;
  while (pos < cfg.size()) {
    const std::size_t nl = cfg.find('\n', pos);
    out += "# " + cfg.substr(pos, nl - pos) + "\n";
    pos = nl + 1;
  }
  out += "step,t,action_vx,action_vy,action_ax,action_ay,robot_x,robot_y,robot_vx,robot_vy";
  for (const auto& o : initial.objects) {
    const std::string p = "obj" + std::to_string(o.id);
    out += "," + p + "_x," + p + "_y," + p + "_theta";
  }
  out += ",reward,collision\n";
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    const auto& r = log.steps[k];
    const auto& s = r.state;
    out += std::to_string(k + 1);
    for (double v : {s.time, r.action.velocity.x(), r.action.velocity.y(), r.action.acceleration.x(),
                     r.action.acceleration.y(), s.robot.pose.x, s.robot.pose.y, s.robot.velocity.x(),
                     s.robot.velocity.y()})
      out += "," + format_g17(v);
    for (const auto& o : s.objects) out += "," + format_g17(o.pose.x) + "," + format_g17(o.pose.y) + "," + format_g17(o.pose.theta);
    out += "," + format_g17(r.reward.value) + "," + (r.reward.collision_event ? "1" : "0") + "\n";
  }
  return out;
}

struct TrajectoryFile {
  Settings settings;
  std::string scene_id;
  int perturbed_target_id = -1;
  WorldPerturbation perturb;
  std::vector<int> object_ids;
  std::vector<RobotAction> actions;
  std::vector<std::vector<double>> rows;  // numeric columns after 'step', excluding reward/collision
};

inline TrajectoryFile parse_trajectory_csv(std::string_view text) {
  TrajectoryFile f;
  std::string cfg;
  bool have_header = false;
  int line_no = 0;
  std::size_t pos = 0;
  std::size_t n_cols = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = detail::trim(line.substr(1));
      if (body.starts_with("scene_id=")) {
        f.scene_id = std::string(body.substr(9));
      } else if (body.starts_with("world.target_id=")) {
        f.perturbed_target_id = detail::parse_integral<int>("world.target_id", body.substr(16));
      } else if (body.starts_with("world.target_mass_scale=")) {
        const auto v = body.substr(24);
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), f.perturb.target_mass_scale);
        if (ec != std::errc() || ptr != v.data() + v.size() || !(f.perturb.target_mass_scale > 0.0))
          throw ParseError(line_no, 1, "bad target mass scale");
      } else if (body.find('=') != std::string_view::npos) {
        cfg += std::string(body) + "\n";
      }
      continue;
    }
    std::vector<std::string_view> cells;
    std::size_t c = 0;
    while (true) {
      const std::size_t comma = line.find(',', c);
      cells.push_back(detail::trim(line.substr(c, comma == std::string_view::npos ? std::string_view::npos : comma - c)));
      if (comma == std::string_view::npos) break;
      c = comma + 1;
    }
    if (!have_header) {
      if (cells.size() < 12 || cells[0] != "step") throw ParseError(line_no, 1, "missing trajectory header row");
      for (std::size_t i = 10; i + 5 <= cells.size(); i += 3) {
        const auto name = cells[i];
        if (!name.starts_with("obj") || !name.ends_with("_x")) break;
        f.object_ids.push_back(std::stoi(std::string(name.substr(3, name.size() - 5))));
      }
      n_cols = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != n_cols) throw ParseError(line_no, 1, "expected " + std::to_string(n_cols) + " columns");
    std::vector<double> row;
    for (std::size_t i = 1; i + 2 < cells.size(); ++i) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc() || ptr != cells[i].data() + cells[i].size())
        throw ParseError(line_no, 1, "bad number in column " + std::to_string(i + 1));
      row.push_back(v);
    }
    f.actions.push_back({Vec2(row[1], row[2]), Vec2(row[3], row[4])});
    f.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, 1, "empty trajectory file");
  apply_config_text(f.settings, cfg, "trajectory header");
  return f;
}

struct ReplayResult {
  bool match = true;
  int first_divergent_step = 0;  // 1-based; 0 when matching
  std::string detail;
};

/// Re-simulates the logged actions from `initial` and compares each
/// logged row bit-for-bit.
inline ReplayResult replay(const SceneState& initial, const TrajectoryFile& traj) {
  ReplayResult res;
  auto diverge = [&](int k, std::string why) {
    res.match = false;
    res.first_divergent_step = k;
    res.detail = std::move(why);
    return res;
  };
  if (traj.object_ids.size() != initial.objects.size()) return diverge(1, "object count differs from scene");
  for (std::size_t i = 0; i < initial.objects.size(); ++i)
    if (traj.object_ids[i] != initial.objects[i].id) return diverge(1, "object ids differ from scene");
  SceneState cur = initial;
  if (traj.perturbed_target_id >= 0) {
    ObjectState* t = cur.find(traj.perturbed_target_id);
    if (t == nullptr) return diverge(1, "perturbed target is not in the scene");
    t->mass *= traj.perturb.target_mass_scale;
  }
  for (std::size_t k = 0; k < traj.actions.size(); ++k) {
    const int step_no = static_cast<int>(k) + 1;
    try {
      cur = step(cur, traj.actions[k], traj.settings.physics).first;
    } catch (const SimulationError& e) {
      return diverge(step_no, e.what());
    }
    const auto& row = traj.rows[k];
    std::vector<double> expect = {cur.time,           row[1], row[2], row[3], row[4], cur.robot.pose.x, cur.robot.pose.y,
                                  cur.robot.velocity.x(), cur.robot.velocity.y()};
    for (const auto& o : cur.objects) {
      expect.push_back(o.pose.x);
      expect.push_back(o.pose.y);
      expect.push_back(o.pose.theta);
    }
    if (expect.size() != row.size()) return diverge(step_no, "column count mismatch");
    for (std::size_t i = 0; i < row.size(); ++i)
      if (expect[i] != row[i]) return diverge(step_no, "column " + std::to_string(i + 2) + " differs");
  }
  return res;
}

/// Replays an in-memory log against its starting scene.
inline ReplayResult replay(const SceneState& initial, const EpisodeLog& log, const PhysicsConfig& physics) {
  ReplayResult res;
  SceneState cur = initial;
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    cur = step(cur, log.steps[k].action, physics).first;
    if (!(cur == log.steps[k].state)) {
      res.match = false;
      res.first_divergent_step = static_cast<int>(k) + 1;
      res.detail = "state differs";
      return res;
    }
  }
  return res;
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_EVAL_HPP_
