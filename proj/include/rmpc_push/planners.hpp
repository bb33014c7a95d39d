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

// Pushing planners sharing one interface: given the current state and task,
// produce the next action (or, for the open-loop baseline, the whole
// sequence up front).
//
//   rmpc       sample node weights, imagine H steps per sample in a cloned
//              world, execute the first action of the best-scoring rollout
//   rmp        the RMP controller with nominal weights
//   mpc        random piecewise-constant velocity sequences, lowest cost wins
//   open_loop  mpc run to completion inside the model, then replayed blind
//   direct     attractor-only RMP controller, obstacles ignored
//
// All randomness is derived from (seed, state.time), so each call is a pure
// function of its inputs.

#ifndef RMPC_PUSH_PLANNERS_HPP_
#define RMPC_PUSH_PLANNERS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rmpc_push/core.hpp"
#include "rmpc_push/physics.hpp"
#include "rmpc_push/random.hpp"
#include "rmpc_push/reward.hpp"
#include "rmpc_push/rmp.hpp"

namespace rmpc_push {

enum class PlannerKind { kRmpc, kRmp, kMpc, kOpenLoop, kDirect };

inline std::string_view to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::kRmpc: return "rmpc";
    case PlannerKind::kRmp: return "rmp";
    case PlannerKind::kMpc: return "mpc";
    case PlannerKind::kOpenLoop: return "open_loop";
    case PlannerKind::kDirect: return "direct";
  }
  return "?";
}

inline PlannerKind parse_planner_kind(std::string_view s) {
  for (auto k : {PlannerKind::kRmpc, PlannerKind::kRmp, PlannerKind::kMpc, PlannerKind::kOpenLoop, PlannerKind::kDirect})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown planner '" + std::string(s) + "'");
}

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kRmpc;
  int samples_K = 16;  // total candidates per plan call, nominal included
  int horizon_H = 20;
  double weight_low = 0.1;
  double weight_high = 10.0;
  std::uint64_t seed = 0;
  bool include_nominal = true;
  bool sample_policy_weights = true;
  bool sample_field_alphas = true;
  int mpc_resample_every = 5;
  double mpc_obstacle_lambda = 1.0;
  double mpc_reach_weight = 0.5;
  int open_loop_max_steps = 400;
};

inline void validate(const PlannerConfig& c) {
  if (c.samples_K < 1) throw InvalidArgument("samples_K must be >= 1");
  if (c.horizon_H < 1) throw InvalidArgument("horizon_H must be >= 1");
  if (!(c.weight_low > 0.0 && c.weight_low <= c.weight_high)) throw InvalidArgument("weight range must satisfy 0 < low <= high");
  if (c.include_nominal && !(c.weight_low <= 1.0 && 1.0 <= c.weight_high))
    throw InvalidArgument("nominal weight 1.0 must lie inside the weight range");
  if (c.mpc_resample_every < 1) throw InvalidArgument("mpc_resample_every must be >= 1");
}

/// Everything a planner needs besides the state and task.
struct PlanningContext {
  PhysicsConfig physics;
  RmpGains gains;
  RewardConfig reward;
  PlannerConfig planner;
};

class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RolloutCandidate {
  RmpWeights weights;
  std::vector<RobotAction> actions;
  std::vector<SceneState> states;
  std::vector<double> rewards;
  double score = -std::numeric_limits<double>::infinity();
  bool failed = false;
};

inline std::size_t obstacle_count(const SceneState& s, const PushTask& task) {
  return s.objects.size() - (s.find(task.target_id) != nullptr ? 1 : 0);
}

inline RobotAction rmp_plan(const SceneState& state, const PushTask& task, const RmpGains& gains,
                            const PhysicsConfig& physics) {
  return control(state, task, RmpWeights::nominal(obstacle_count(state, task)), gains, physics);
}

inline RobotAction direct_plan(const SceneState& state, const PushTask& task, const RmpGains& gains,
                               const PhysicsConfig& physics) {
  return control(state, task, RmpWeights::nominal(obstacle_count(state, task)), gains, physics,
                 ControlOptions{.avoid_obstacles = false});
}

/// Log-uniform node weights; frozen groups stay at 1.0.
inline RmpWeights sample_weights(Rng& rng, std::size_t n_obstacles, const PlannerConfig& cfg) {
  RmpWeights w = RmpWeights::nominal(n_obstacles);
  if (cfg.sample_policy_weights) {
    w.attractor_weight = rng.log_uniform(cfg.weight_low, cfg.weight_high);
    for (auto& x : w.obstacle_weights) x = rng.log_uniform(cfg.weight_low, cfg.weight_high);
  }
  if (cfg.sample_field_alphas)
    for (auto& a : w.field_alphas) a = rng.log_uniform(cfg.weight_low, cfg.weight_high);
  return w;
}

/// Closed-loop imagination: H steps of the controller under fixed weights,
/// scored with the discounted step reward.
inline RolloutCandidate imagine(const SceneState& state, const PushTask& task, const RmpWeights& weights,
                                const PlanningContext& ctx) {
  RolloutCandidate c;
  c.weights = weights;
  const int H = ctx.planner.horizon_H;
  c.actions.reserve(H);
  c.states.reserve(H);
  c.rewards.reserve(H);
  SceneState cur = clone_state(state);
  for (int k = 0; k < H; ++k) {
    RobotAction a = control(cur, task, weights, ctx.gains, ctx.physics);
    auto [next, report] = step(cur, a, ctx.physics);
    c.rewards.push_back(step_reward(cur, next, task, ctx.reward).value);
    c.actions.push_back(a);
    c.states.push_back(next);
    cur = std::move(next);
  }
  c.score = trajectory_reward(c.rewards, ctx.reward.gamma);
  return c;
}

/// Index of the winning candidate: highest score, lowest index on ties.
inline std::optional<std::size_t> best_candidate(const std::vector<RolloutCandidate>& cands) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].failed) continue;
    if (!best || cands[i].score > cands[*best].score) best = i;
  }
  return best;
}

inline RobotAction rmpc_plan(const SceneState& state, const PushTask& task, const PlanningContext& ctx,
                             std::vector<RolloutCandidate>* candidates_out = nullptr) {
  const auto& cfg = ctx.planner;
  const std::size_t n_obs = obstacle_count(state, task);
  Rng rng(mix_seed(cfg.seed, state.time));
  std::vector<RolloutCandidate> cands;
  cands.reserve(cfg.samples_K);
  for (int i = 0; i < cfg.samples_K; ++i) {
    const RmpWeights w = (i == 0 && cfg.include_nominal) ? RmpWeights::nominal(n_obs) : sample_weights(rng, n_obs, cfg);
    try {
      cands.push_back(imagine(state, task, w, ctx));
    } catch (const SimulationError&) {
      RolloutCandidate failed;
      failed.weights = w;
      failed.failed = true;
      cands.push_back(std::move(failed));
    }
  }
  const auto best = best_candidate(cands);
  if (!best) throw PlannerError("rmpc: every candidate rollout failed");
  RobotAction out = cands[*best].actions.front();
  if (candidates_out != nullptr) *candidates_out = std::move(cands);
  return out;
}

/// Piecewise-constant velocity commands; a fresh heading and speed every
/// `resample_every` steps.
inline std::vector<RobotAction> sample_velocity_sequence(Rng& rng, int length, int resample_every, double v_max) {
  std::vector<RobotAction> seq(length);
  RobotAction cur;
  for (int k = 0; k < length; ++k) {
    if (k % resample_every == 0) {
      const double heading = rng.uniform(0.0, 2.0 * kPi);
      const double speed = v_max * rng.uniform_open_closed();
      cur.velocity = speed * Vec2(std::cos(heading), std::sin(heading));
      cur.acceleration = Vec2::Zero();
    }
    seq[k] = cur;
  }
  return seq;
}

/// Sum over obstacles of how far a body intrudes into the active band.
inline double proximity_cost(const SceneState& s, const PushTask& task, double robot_radius, double d_active) {
  const ObjectState* target = s.find(task.target_id);
  const Vec2 robot = s.robot.pose.position();
  const double target_bound = bounding_radius(target->shape);
  double cost = 0.0;
  for (const auto& o : s.objects) {
    if (o.id == task.target_id) continue;
    const double ob = bounding_radius(o.shape);
    const double robot_gap = (robot - o.pose.position()).norm() - ob - robot_radius;
    const double target_gap = (target->pose.position() - o.pose.position()).norm() - ob - target_bound;
    cost += std::max(0.0, d_active - robot_gap) + std::max(0.0, d_active - target_gap);
  }
  return cost;
}

/// Final target-to-goal distance, a pull towards the staging point, and
/// the accumulated obstacle proximity along the rollout.
inline double mpc_cost(const std::vector<SceneState>& states, const PushTask& task, const PlanningContext& ctx) {
  double prox = 0.0;
  for (const auto& s : states) prox += proximity_cost(s, task, ctx.physics.robot_radius, ctx.gains.obstacle_d_active);
  const SceneState& last = states.back();
  const ObjectState* target = last.find(task.target_id);
  const Vec2 to_goal = task.goal - target->pose.position();
  const double bearing = std::atan2(to_goal.y(), to_goal.x());
  const Vec2 staging = approach_point(*target, bearing, ctx.physics.robot_radius, ctx.gains.approach_margin);
  const double reach = (last.robot.pose.position() - staging).norm();
  return to_goal.norm() + ctx.planner.mpc_reach_weight * reach + ctx.planner.mpc_obstacle_lambda * prox;
}

struct MpcCandidate {
  std::vector<RobotAction> actions;
  double cost = std::numeric_limits<double>::infinity();
  bool failed = false;
};

inline RobotAction mpc_plan(const SceneState& state, const PushTask& task, const PlanningContext& ctx,
                            std::vector<MpcCandidate>* candidates_out = nullptr) {
  const auto& cfg = ctx.planner;
  Rng rng(mix_seed(cfg.seed ^ 0x6d7063ull, state.time));
  std::vector<MpcCandidate> cands(cfg.samples_K);
  std::optional<std::size_t> best;
  for (int i = 0; i < cfg.samples_K; ++i) {
    auto& c = cands[i];
    c.actions = sample_velocity_sequence(rng, cfg.horizon_H, cfg.mpc_resample_every, ctx.physics.v_max);
    try {
      const auto roll = rollout(state, c.actions, ctx.physics);
      c.cost = mpc_cost(roll.states, task, ctx);
    } catch (const SimulationError&) {
      c.failed = true;
      continue;
    }
    if (!best || c.cost < cands[*best].cost) best = static_cast<std::size_t>(i);
  }
  if (!best) throw PlannerError("mpc: every sampled sequence failed");
  RobotAction out = cands[*best].actions.front();
  if (candidates_out != nullptr) *candidates_out = std::move(cands);
  return out;
}

/// Runs mpc to completion inside the model and returns the whole action
/// sequence. Fails when the imagined run ends farther than twice the goal
/// tolerance from the goal.
inline std::vector<RobotAction> open_loop_plan(const SceneState& state, const PushTask& task,
                                               const PlanningContext& ctx, int max_steps,
                                               std::vector<SceneState>* predicted = nullptr) {
  if (max_steps < 1) throw PlannerError("open_loop: max_steps must be >= 1");
  std::vector<RobotAction> seq;
  std::vector<SceneState> states;
  SceneState cur = clone_state(state);
  for (int t = 0; t < max_steps; ++t) {
    const RobotAction a = mpc_plan(cur, task, ctx);
    auto [next, report] = step(cur, a, ctx.physics);
    seq.push_back(a);
    cur = std::move(next);
    states.push_back(cur);
    if (target_goal_distance(cur, task) <= task.goal_tolerance) break;
  }
  const double final_distance = target_goal_distance(cur, task);
  if (final_distance > 2.0 * task.goal_tolerance)
    throw PlannerError("open_loop: no sampled plan reaches the goal (predicted final distance " +
                       std::to_string(final_distance) + " m)");
  if (predicted != nullptr) *predicted = std::move(states);
  return seq;
}

/// Dispatches on the configured planner kind. Open-loop planners are
/// driven through open_loop_plan() instead.
inline RobotAction plan_next(const SceneState& state, const PushTask& task, const PlanningContext& ctx) {
  switch (ctx.planner.kind) {
    case PlannerKind::kRmpc: return rmpc_plan(state, task, ctx);
    case PlannerKind::kRmp: return rmp_plan(state, task, ctx.gains, ctx.physics);
    case PlannerKind::kMpc: return mpc_plan(state, task, ctx);
    case PlannerKind::kDirect: return direct_plan(state, task, ctx.gains, ctx.physics);
    case PlannerKind::kOpenLoop: break;
  }
  throw InvalidArgument("plan_next: open_loop planner has no per-step action");
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_PLANNERS_HPP_
