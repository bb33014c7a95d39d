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

// Shared vocabulary for the planar pushing world: poses, object shapes,
// scene snapshots, push tasks and robot actions.

#ifndef RMPC_PUSH_CORE_HPP_
#define RMPC_PUSH_CORE_HPP_

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace rmpc_push {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.81;

// Ids used in contact reports for bodies that are not scene objects.
inline constexpr int kRobotId = -1;
inline constexpr int kWallLeftId = -2;
inline constexpr int kWallRightId = -3;
inline constexpr int kWallBottomId = -4;
inline constexpr int kWallTopId = -5;

/// Thrown when a caller hands in a state, action or configuration that
/// violates a documented invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2&) const = default;
};

inline bool is_finite(const Pose2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
}

/// Translation distance plus angular_weight times the wrapped heading change.
inline double pose_distance(const Pose2& a, const Pose2& b, double angular_weight) {
  return std::hypot(a.x - b.x, a.y - b.y) +
         angular_weight * std::abs(wrap_angle(a.theta - b.theta));
}

struct Disc {
  double radius = 0.0;
  bool operator==(const Disc&) const = default;
};

/// Box footprint; width runs along the body x axis, length along body y.
struct Box {
  double width = 0.0;
  double length = 0.0;
  bool operator==(const Box&) const = default;
};

using Shape = std::variant<Disc, Box>;

inline double mean_extent(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return 2.0 * d->radius;
  const auto& b = std::get<Box>(s);
  return 0.5 * (b.width + b.length);
}

/// Radius of the smallest origin-centred circle containing the shape.
inline double bounding_radius(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return d->radius;
  const auto& b = std::get<Box>(s);
  return 0.5 * std::hypot(b.width, b.length);
}

inline double shape_area(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return kPi * d->radius * d->radius;
  const auto& b = std::get<Box>(s);
  return b.width * b.length;
}

/// Rotational inertia about the centroid for a uniform lamina of mass m.
inline double shape_inertia(const Shape& s, double mass) {
  if (const auto* d = std::get_if<Disc>(&s)) return 0.5 * mass * d->radius * d->radius;
  const auto& b = std::get<Box>(s);
  return mass * (b.width * b.width + b.length * b.length) / 12.0;
}

inline bool shape_valid(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return d->radius > 0.0 && std::isfinite(d->radius);
  const auto& b = std::get<Box>(s);
  return b.width > 0.0 && b.length > 0.0 && std::isfinite(b.width) && std::isfinite(b.length);
}

struct ObjectState {
  int id = 0;
  Shape shape = Disc{0.05};
  Pose2 pose;
  Vec2 linear_velocity = Vec2::Zero();
  double angular_velocity = 0.0;
  double mass = 1.0;

  bool operator==(const ObjectState&) const = default;
};

inline double mean_extent(const ObjectState& o) { return mean_extent(o.shape); }

/// Axis-aligned rectangle.
struct Workspace {
  double min_x = -1.0;
  double min_y = -1.0;
  double max_x = 1.0;
  double max_y = 1.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(const Vec2& p) const {
    return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y;
  }
  /// Rectangle of size w x h centred on the origin.
  static Workspace centered(double w, double h) { return {-0.5 * w, -0.5 * h, 0.5 * w, 0.5 * h}; }
  bool operator==(const Workspace&) const = default;
};

struct RobotState {
  Pose2 pose;
  Vec2 velocity = Vec2::Zero();
  bool operator==(const RobotState&) const = default;
};

struct SceneState {
  std::vector<ObjectState> objects;
  RobotState robot;
  double time = 0.0;
  Workspace workspace;

  bool operator==(const SceneState&) const = default;

  const ObjectState* find(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  ObjectState* find(int id) {
    for (auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
};

struct PushTask {
  int target_id = 0;
  Vec2 goal = Vec2::Zero();
  double goal_tolerance = 0.05;

  bool operator==(const PushTask&) const = default;
};

struct RobotAction {
  Vec2 velocity = Vec2::Zero();
  Vec2 acceleration = Vec2::Zero();

  bool operator==(const RobotAction&) const = default;
};

struct RewardConfig {
  double gamma = 0.95;
  int horizon = 20;
  double angular_weight = 0.1;     // m/rad
  double collision_epsilon = 0.002;  // m
};

inline void validate(const RewardConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0,1]");
  if (c.horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(c.angular_weight >= 0.0)) throw InvalidArgument("angular_weight must be >= 0");
  if (!(c.collision_epsilon > 0.0)) throw InvalidArgument("collision_epsilon must be > 0");
}

inline double target_goal_distance(const SceneState& s, const PushTask& task) {
  const ObjectState* t = s.find(task.target_id);
  if (t == nullptr) throw InvalidArgument("target id " + std::to_string(task.target_id) + " not in scene");
  return (t->pose.position() - task.goal).norm();
}

/// Checks the structural invariants of a scene (unique ids, valid shapes,
/// positive masses, finite numbers, centres inside the workspace).
inline void validate(const SceneState& s) {
  if (!(s.workspace.max_x > s.workspace.min_x && s.workspace.max_y > s.workspace.min_y))
    throw InvalidArgument("workspace is empty");
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    for (std::size_t j = 0; j < i; ++j)
      if (s.objects[j].id == o.id) throw InvalidArgument("duplicate object id " + std::to_string(o.id));
    if (!shape_valid(o.shape)) throw InvalidArgument("object " + std::to_string(o.id) + " has a degenerate shape");
    if (!(o.mass > 0.0) || !std::isfinite(o.mass))
      throw InvalidArgument("object " + std::to_string(o.id) + " has non-positive mass");
    if (!is_finite(o.pose) || !o.linear_velocity.allFinite() || !std::isfinite(o.angular_velocity))
      throw InvalidArgument("object " + std::to_string(o.id) + " has non-finite state");
    if (!s.workspace.contains(o.pose.position()))
      throw InvalidArgument("object " + std::to_string(o.id) + " lies outside the workspace");
  }
  if (!is_finite(s.robot.pose) || !s.robot.velocity.allFinite()) throw InvalidArgument("robot state is non-finite");
}

inline void validate(const PushTask& task, const SceneState& s) {
  if (s.find(task.target_id) == nullptr)
    throw InvalidArgument("target id " + std::to_string(task.target_id) + " not in scene");
  if (!task.goal.allFinite() || !s.workspace.contains(task.goal)) throw InvalidArgument("goal outside workspace");
  if (!(task.goal_tolerance > 0.0)) throw InvalidArgument("goal_tolerance must be > 0");
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_CORE_HPP_
