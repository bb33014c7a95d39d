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

// Flat key=value settings covering every tunable in the library.
//
// Keys are "<group>.<name>", e.g. physics.dt or planner.samples_K. Files hold
// one assignment per line; '#' starts a comment. Unknown keys are errors.
// echo() prints every key with round-trip precision, so its output can be
// parsed back to an identical Settings.

#ifndef RMPC_PUSH_CONFIG_HPP_
#define RMPC_PUSH_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rmpc_push/core.hpp"
#include "rmpc_push/physics.hpp"
#include "rmpc_push/planners.hpp"
#include "rmpc_push/rmp.hpp"
#include "rmpc_push/scene_io.hpp"
#include "rmpc_push/scenegen.hpp"

namespace rmpc_push {

struct EvalConfig {
  int max_steps = 400;
  double goal_tolerance = 0.05;
};

struct Settings {
  PhysicsConfig physics;
  RmpGains gains;
  RewardConfig reward;
  PlannerConfig planner;
  SceneGenConfig scenegen;
  EvalConfig eval;
  double workspace_w = 2.0;
  double workspace_h = 2.0;

  PlanningContext context() const {
    PlanningContext ctx{physics, gains, reward, planner};
    ctx.reward.horizon = planner.horizon_H;
    return ctx;
  }
  SceneGenConfig scenegen_config() const {
    SceneGenConfig c = scenegen;
    c.workspace = Workspace::centered(workspace_w, workspace_h);
    c.goal_tolerance = eval.goal_tolerance;
    c.robot_radius = physics.robot_radius;
    return c;
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using SettingRef = std::variant<double*, int*, std::uint64_t*, bool*, PlannerKind*>;

struct SettingEntry {
  std::string_view key;
  SettingRef ref;
};

inline std::vector<SettingEntry> setting_entries(Settings& s) {
  return {
      {"physics.dt", &s.physics.dt},
      {"physics.floor_friction_mu", &s.physics.floor_friction_mu},
      {"physics.contact_restitution", &s.physics.contact_restitution},
      {"physics.contact_friction_mu", &s.physics.contact_friction_mu},
      {"physics.penetration_tolerance", &s.physics.penetration_tolerance},
      {"physics.solver_iterations", &s.physics.solver_iterations},
      {"physics.position_iterations", &s.physics.position_iterations},
      {"physics.robot_radius", &s.physics.robot_radius},
      {"physics.robot_mass", &s.physics.robot_mass},
      {"physics.v_max", &s.physics.v_max},
      {"physics.a_max", &s.physics.a_max},
      {"rmp.attractor_gain", &s.gains.attractor_gain},
      {"rmp.attractor_damping", &s.gains.attractor_damping},
      {"rmp.attractor_eps", &s.gains.attractor_eps},
      {"rmp.attractor_soft_radius", &s.gains.attractor_soft_radius},
      {"rmp.obstacle_eta", &s.gains.obstacle_eta},
      {"rmp.obstacle_damping", &s.gains.obstacle_damping},
      {"rmp.obstacle_d_min", &s.gains.obstacle_d_min},
      {"rmp.obstacle_metric_cap", &s.gains.obstacle_metric_cap},
      {"rmp.obstacle_d_active", &s.gains.obstacle_d_active},
      {"rmp.obstacle_range", &s.gains.obstacle_range},
      {"rmp.approach_margin", &s.gains.approach_margin},
      {"rmp.engage_radius", &s.gains.engage_radius},
      {"rmp.field_gain", &s.gains.field_gain},
      {"rmp.orbit_scale", &s.gains.orbit_scale},
      {"rmp.orbit_step", &s.gains.orbit_step},
      {"rmp.direction_eps", &s.gains.direction_eps},
      {"rmp.pinv_threshold", &s.gains.pinv_threshold},
      {"reward.gamma", &s.reward.gamma},
      {"reward.angular_weight", &s.reward.angular_weight},
      {"reward.collision_epsilon", &s.reward.collision_epsilon},
      {"planner.kind", &s.planner.kind},
      {"planner.samples_K", &s.planner.samples_K},
      {"planner.horizon_H", &s.planner.horizon_H},
      {"planner.weight_low", &s.planner.weight_low},
      {"planner.weight_high", &s.planner.weight_high},
      {"planner.seed", &s.planner.seed},
      {"planner.include_nominal", &s.planner.include_nominal},
      {"planner.sample_policy_weights", &s.planner.sample_policy_weights},
      {"planner.sample_field_alphas", &s.planner.sample_field_alphas},
      {"planner.mpc_resample_every", &s.planner.mpc_resample_every},
      {"planner.mpc_obstacle_lambda", &s.planner.mpc_obstacle_lambda},
      {"planner.mpc_reach_weight", &s.planner.mpc_reach_weight},
      {"scenegen.min_objects", &s.scenegen.min_objects},
      {"scenegen.max_objects", &s.scenegen.max_objects},
      {"scenegen.min_clearance", &s.scenegen.min_clearance},
      {"scenegen.min_goal_distance", &s.scenegen.min_goal_distance},
      {"scenegen.workspace_w", &s.workspace_w},
      {"scenegen.workspace_h", &s.workspace_h},
      {"eval.max_steps", &s.eval.max_steps},
      {"eval.goal_tolerance", &s.eval.goal_tolerance},
  };
}

template <typename T>
T parse_integral(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline void set_value(Settings& s, std::string_view key, std::string_view value) {
  value = detail::trim(value);
  for (auto& e : detail::setting_entries(s)) {
    if (e.key != key) continue;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size())
              throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(value) + "'");
            *p = v;
          } else if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1") {
              *p = true;
            } else if (value == "false" || value == "0") {
              *p = false;
            } else {
              throw ConfigError("bad boolean for " + std::string(key) + ": '" + std::string(value) + "'");
            }
          } else if constexpr (std::is_same_v<T, PlannerKind>) {
            try {
              *p = parse_planner_kind(value);
            } catch (const InvalidArgument& e) {
              throw ConfigError(e.what());
            }
          } else {
            *p = detail::parse_integral<T>(key, value);
          }
        },
        e.ref);
    return;
  }
  throw ConfigError("unknown setting '" + std::string(key) + "'");
}

/// Applies "key=value" lines; '#' comments and blank lines are skipped.
inline void apply_config_text(Settings& s, std::string_view text, std::string_view origin = "config") {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      set_value(s, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline std::string echo(const Settings& s_in) {
  Settings s = s_in;
  std::string out;
  for (auto& e : detail::setting_entries(s)) {
    out += e.key;
    out += '=';
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            out += format_g17(*p);
          } else if constexpr (std::is_same_v<T, bool>) {
            out += *p ? "true" : "false";
          } else if constexpr (std::is_same_v<T, PlannerKind>) {
            out += to_string(*p);
          } else {
            out += std::to_string(*p);
          }
        },
        e.ref);
    out += '\n';
  }
  return out;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x00000100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const Settings& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(echo(s))));
  return buf;
}

inline void validate(const Settings& s) {
  validate(s.physics);
  validate(s.reward);
  validate(s.planner);
  validate(s.scenegen_config());
  if (s.eval.max_steps < 1) throw InvalidArgument("eval.max_steps must be >= 1");
  if (!(s.eval.goal_tolerance > 0.0)) throw InvalidArgument("eval.goal_tolerance must be > 0");
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_CONFIG_HPP_
