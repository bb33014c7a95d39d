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

#ifndef RMPC_PUSH_REWARD_HPP_
#define RMPC_PUSH_REWARD_HPP_

#include <span>
#include <stdexcept>
#include <string>

#include "rmpc_push/core.hpp"

namespace rmpc_push {

/// Reward for one control step, in meters.
///
/// progress is the decrease of the target-to-goal distance over the step;
/// collision_penalty sums the pose change of every other object.
struct StepReward {
  double progress = 0.0;
  double collision_penalty = 0.0;
  double value = 0.0;
  bool collision_event = false;
};

inline StepReward step_reward(const SceneState& prev, const SceneState& next, const PushTask& task,
                              const RewardConfig& cfg) {
  if (prev.objects.size() != next.objects.size())
    throw InvalidArgument("step_reward: object sets differ in size");
  StepReward r;
  bool found_target = false;
  for (std::size_t i = 0; i < prev.objects.size(); ++i) {
    const auto& a = prev.objects[i];
    const auto& b = next.objects[i];
    if (a.id != b.id) throw InvalidArgument("step_reward: object ids differ at index " + std::to_string(i));
    if (a.id == task.target_id) {
      found_target = true;
      r.progress = (a.pose.position() - task.goal).norm() - (b.pose.position() - task.goal).norm();
    } else {
      r.collision_penalty += pose_distance(b.pose, a.pose, cfg.angular_weight);
    }
  }
  if (!found_target) throw InvalidArgument("step_reward: target id missing");
  r.value = r.progress - r.collision_penalty;
  r.collision_event = r.collision_penalty > cfg.collision_epsilon;
  return r;
}

/// Discounted sum: sum_k gamma^k * rewards[k].
inline double trajectory_reward(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw InvalidArgument("trajectory_reward: empty reward sequence");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("trajectory_reward: gamma outside [0,1]");
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_REWARD_HPP_
