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

// Riemannian motion policies for a planar disc pusher.
//
// Each local policy lives in a task space reached through a task map
// (identity for the attractor, signed clearance for obstacle avoidance).
// Policies are pulled back through their Jacobians and combined by a
// metric-weighted least-squares resolve:
//
//   qdd = (sum J_i^T M_i J_i)^+ sum J_i^T M_i (a_i - Jdot_i qd)
//
// control() wires the policies into a pusher controller: an object-level
// resolve picks the direction the target should travel, a robot-level resolve
// drives the robot to the staging point behind the target, and once the
// robot is close and behind it the local pushing field takes over the
// velocity command.

#ifndef RMPC_PUSH_RMP_HPP_
#define RMPC_PUSH_RMP_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rmpc_push/core.hpp"
#include "rmpc_push/physics.hpp"

namespace rmpc_push {

/// Gains and geometric constants for all policies. Units in comments.
struct RmpGains {
  double attractor_gain = 2.0;      // m/s^2
  double attractor_damping = 2.0;   // 1/s
  double attractor_eps = 1e-6;      // m
  double attractor_soft_radius = 0.2;  // m
  double obstacle_eta = 0.05;       // m^3/s^2
  double obstacle_damping = 4.0;    // 1/s
  double obstacle_d_min = 0.01;     // m
  double obstacle_metric_cap = 1e4;
  double obstacle_d_active = 0.3;   // m
  double obstacle_range = std::numeric_limits<double>::infinity();  // m, policies beyond this clearance are off
  double approach_margin = 0.02;    // m
  double engage_radius = 0.0;       // m; <= 0 selects mean_extent + 2 robot_radius
  double field_gain = 30.0;         // 1/(m s), scales the local field to a velocity
  double orbit_scale = 1.25;        // orbit radius over the staging distance
  double orbit_step = kPi / 3.0;    // rad, carrot lead along the orbit
  double direction_eps = 1e-6;      // m/s^2
  double pinv_threshold = 1e-9;
};

/// Node weights: one per policy plus the local-field coefficients.
struct RmpWeights {
  double attractor_weight = 1.0;
  std::vector<double> obstacle_weights;  // one per non-target object, scene order
  std::array<double, 4> field_alphas{1.0, 1.0, 1.0, 1.0};

  static RmpWeights nominal(std::size_t n_obstacles) {
    RmpWeights w;
    w.obstacle_weights.assign(n_obstacles, 1.0);
    return w;
  }
  bool operator==(const RmpWeights&) const = default;
};

using TaskVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using TaskMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using TaskJacobian = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 2, 2>;

/// A local policy evaluated at one robot state, ready for resolve().
struct EvaluatedPolicy {
  TaskJacobian jacobian;  // task_dim x 2
  TaskVector accel;       // desired task acceleration
  TaskMatrix metric;      // task_dim x task_dim, symmetric PSD
  TaskVector curvature;   // Jdot * qd
};

class NotPsdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (alpha1 x^2 - alpha2 y^2 - alpha3 (m/2)^2, alpha4 x y), with (x, y) in the push frame.
inline Vec2 push_local_field(const Vec2& rel, double mean_extent, const std::array<double, 4>& alphas) {
  const double x = rel.x(), y = rel.y();
  const double half = 0.5 * mean_extent;
  return {alphas[0] * x * x - alphas[1] * y * y - alphas[2] * half * half, alphas[3] * x * y};
}

/// Frame at the target's centre with its x axis along the global policy direction.
inline Pose2 push_frame(const ObjectState& target, double global_policy_dir) {
  return {target.pose.x, target.pose.y, wrap_angle(global_policy_dir)};
}

inline Vec2 to_frame(const Pose2& frame, const Vec2& world_point) {
  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  const Vec2 d = world_point - frame.position();
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

inline Vec2 rotate_from_frame(const Pose2& frame, const Vec2& local_vector) {
  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  return {c * local_vector.x() - s * local_vector.y(), s * local_vector.x() + c * local_vector.y()};
}

/// Identity-map attractor with a saturated pull and linear damping.
inline EvaluatedPolicy attractor_policy(const Vec2& pos, const Vec2& vel, const Vec2& goal, double weight,
                                        const RmpGains& g = {}) {
  const Vec2 diff = goal - pos;
  const double dist = diff.norm();
  const Vec2 pull = diff / std::max(dist, g.attractor_eps) * std::min(dist / g.attractor_soft_radius, 1.0);
  EvaluatedPolicy p;
  p.jacobian = Mat2::Identity();
  p.accel = g.attractor_gain * pull - g.attractor_damping * vel;
  p.metric = weight * Mat2::Identity();
  p.curvature = Vec2::Zero();
  return p;
}

/// d(x) = |x - c| - obstacle_radius - self_radius and its derivatives.
struct ClearanceMap {
  Vec2 center;
  double offset;  // obstacle_radius + self_radius

  double value(const Vec2& x) const { return (x - center).norm() - offset; }
  Eigen::RowVector2d jacobian(const Vec2& x) const {
    const Vec2 d = x - center;
    const double n = d.norm();
    if (n < 1e-12) return {1.0, 0.0};
    return (d / n).transpose();
  }
  // Jdot * xd = xd^T Hess(d) xd = (|xd|^2 - ddot^2) / |x - c|.
  double curvature(const Vec2& x, const Vec2& xd) const {
    const double n = (x - center).norm();
    if (n < 1e-12) return 0.0;
    const double ddot = jacobian(x).dot(xd);
    return (xd.squaredNorm() - ddot * ddot) / n;
  }
};

/// One-dimensional clearance policy against a circular obstacle bound.
inline EvaluatedPolicy obstacle_policy(const Vec2& pos, const Vec2& vel, const Vec2& center, double obstacle_radius,
                                       double self_radius, double weight, const RmpGains& g = {}) {
  const ClearanceMap map{center, obstacle_radius + self_radius};
  const double d = map.value(pos);
  const Eigen::RowVector2d J = map.jacobian(pos);
  const double ddot = J.dot(vel);
  const double dc = std::max(d, g.obstacle_d_min);
  const bool approaching = ddot < 0.0;
  EvaluatedPolicy p;
  p.jacobian = J;
  p.accel = TaskVector::Constant(1, g.obstacle_eta / (dc * dc) - (approaching ? g.obstacle_damping * ddot : 0.0));
  const bool active = d < g.obstacle_range && (approaching || d < g.obstacle_d_active);
  p.metric = TaskMatrix::Constant(1, 1, active ? weight * std::min(1.0 / (dc * dc), g.obstacle_metric_cap) : 0.0);
  p.curvature = TaskVector::Constant(1, map.curvature(pos, vel));
  return p;
}

inline EvaluatedPolicy obstacle_policy(const Vec2& pos, const Vec2& vel, const ObjectState& obstacle,
                                       double self_radius, double weight, const RmpGains& g = {}) {
  return obstacle_policy(pos, vel, obstacle.pose.position(), bounding_radius(obstacle.shape), self_radius, weight, g);
}

/// Metric-weighted combination of the pulled-back policies, clamped to a_max.
inline Vec2 resolve(std::span<const EvaluatedPolicy> policies,
                    double a_max = std::numeric_limits<double>::infinity(), double pinv_threshold = 1e-9) {
  if (policies.empty()) throw InvalidArgument("resolve needs at least one policy");
  Mat2 A = Mat2::Zero();
  Vec2 b = Vec2::Zero();
  for (const auto& p : policies) {
    const auto& M = p.metric;
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw NotPsdError("policy metric is not symmetric");
    if (M.rows() == 1) {
      if (M(0, 0) < -1e-9) throw NotPsdError("policy metric is not positive semidefinite");
    } else {
      Eigen::SelfAdjointEigenSolver<Mat2> es(Mat2(M), Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-9) throw NotPsdError("policy metric is not positive semidefinite");
    }
    const auto JtM = (p.jacobian.transpose() * M).eval();
    A.noalias() += JtM * p.jacobian;
    b.noalias() += JtM * (p.accel - p.curvature);
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(A);
  const Vec2& ev = es.eigenvalues();
  const Mat2& V = es.eigenvectors();
  Vec2 inv_ev;
  for (int i = 0; i < 2; ++i) inv_ev[i] = std::abs(ev[i]) < pinv_threshold ? 0.0 : 1.0 / ev[i];
  const Vec2 qdd = V * inv_ev.asDiagonal() * V.transpose() * b;
  return clamp_norm(qdd, a_max);
}

/// Staging point behind the target, on the line through its centre along dir.
inline Vec2 approach_point(const ObjectState& target, double dir, double robot_radius, double margin) {
  const double offset = 0.5 * mean_extent(target) + robot_radius + margin;
  return target.pose.position() - offset * Vec2(std::cos(dir), std::sin(dir));
}

struct ControlOptions {
  bool avoid_obstacles = true;  // false gives the attractor-only (direct) controller
};

/// Intermediate quantities of one control() call.
struct ControlTrace {
  double global_policy_dir = 0.0;
  Vec2 approach = Vec2::Zero();
  Vec2 waypoint = Vec2::Zero();
  Vec2 accel = Vec2::Zero();
  bool engaged = false;
};

/// Direction the target should travel: object-level resolve of the goal
/// attractor against the obstacle policies, falling back to the bearing
/// towards the goal when the resolved acceleration vanishes.
inline double global_policy_direction(const SceneState& state, const PushTask& task, const RmpWeights& weights,
                                      const RmpGains& gains, const ControlOptions& opts = {}) {
  const ObjectState* target = state.find(task.target_id);
  if (target == nullptr) throw InvalidArgument("target id not in scene");
  const Vec2 pos = target->pose.position();
  const Vec2 to_goal = task.goal - pos;
  const double bearing = std::atan2(to_goal.y(), to_goal.x());

  std::vector<EvaluatedPolicy> policies;
  policies.reserve(state.objects.size());
  policies.push_back(attractor_policy(pos, target->linear_velocity, task.goal, weights.attractor_weight, gains));
  if (opts.avoid_obstacles) {
    const double self = bounding_radius(target->shape);
    std::size_t k = 0;
    for (const auto& o : state.objects) {
      if (o.id == task.target_id) continue;
      policies.push_back(obstacle_policy(pos, target->linear_velocity, o, self, weights.obstacle_weights.at(k++), gains));
    }
  }
  const Vec2 a = resolve(policies, std::numeric_limits<double>::infinity(), gains.pinv_threshold);
  if (a.norm() < gains.direction_eps) return bearing;
  return std::atan2(a.y(), a.x());
}

/// Robot target for this step: the staging point when the straight path to
/// it clears the target, otherwise a carrot that walks around the target
/// towards its back side.
inline Vec2 staging_waypoint(const Vec2& robot, const ObjectState& target, double dir, const Vec2& approach,
                             double robot_radius, const RmpGains& g) {
  const Vec2 c = target.pose.position();
  const double keep_out = 0.5 * mean_extent(target) + robot_radius;
  const Vec2 seg = approach - robot;
  const double len2 = seg.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((c - robot).dot(seg) / len2, 0.0, 1.0) : 0.0;
  const double clearance = (robot + s * seg - c).norm();
  if (clearance >= keep_out) return approach;

  const Pose2 frame{c.x(), c.y(), dir};
  const Vec2 rel = to_frame(frame, robot);
  const double bearing = std::atan2(rel.y(), rel.x());
  const double side = rel.y() >= 0.0 ? 1.0 : -1.0;
  const double carrot = side > 0.0 ? std::min(bearing + g.orbit_step, kPi) : std::max(bearing - g.orbit_step, -kPi);
  const double radius = g.orbit_scale * (keep_out + g.approach_margin);
  return c + radius * Vec2(std::cos(dir + carrot), std::sin(dir + carrot));
}

/// Pusher controller for fixed node weights.
inline RobotAction control(const SceneState& state, const PushTask& task, const RmpWeights& weights,
                           const RmpGains& gains, const PhysicsConfig& physics, const ControlOptions& opts = {},
                           ControlTrace* trace = nullptr) {
  const ObjectState* target = state.find(task.target_id);
  if (target == nullptr) throw InvalidArgument("target id not in scene");
  if (opts.avoid_obstacles && weights.obstacle_weights.size() + 1 != state.objects.size())
    throw InvalidArgument("need one obstacle weight per non-target object");

  const double dir = global_policy_direction(state, task, weights, gains, opts);
  const Vec2 approach = approach_point(*target, dir, physics.robot_radius, gains.approach_margin);
  const Vec2 robot = state.robot.pose.position();
  const Vec2& robot_vel = state.robot.velocity;
  const Vec2 waypoint = staging_waypoint(robot, *target, dir, approach, physics.robot_radius, gains);

  std::vector<EvaluatedPolicy> policies;
  policies.reserve(state.objects.size());
  policies.push_back(attractor_policy(robot, robot_vel, waypoint, weights.attractor_weight, gains));
  if (opts.avoid_obstacles) {
    std::size_t k = 0;
    for (const auto& o : state.objects) {
      if (o.id == task.target_id) continue;
      policies.push_back(obstacle_policy(robot, robot_vel, o, physics.robot_radius, weights.obstacle_weights[k++], gains));
    }
  }
  const Vec2 accel = resolve(policies, physics.a_max, gains.pinv_threshold);

  const double m = mean_extent(*target);
  const double engage = gains.engage_radius > 0.0 ? gains.engage_radius : m + 2.0 * physics.robot_radius;
  const Pose2 frame = push_frame(*target, dir);
  const Vec2 rel = to_frame(frame, robot);
  const bool engaged = (robot - target->pose.position()).norm() < engage && rel.x() < 0.0;

  RobotAction action;
  action.acceleration = accel;
  if (engaged) {
    const Vec2 field = gains.field_gain * push_local_field(rel, m, weights.field_alphas);
    action.velocity = clamp_norm(rotate_from_frame(frame, field), physics.v_max);
  } else {
    action.velocity = clamp_norm(robot_vel, physics.v_max);
  }
  if (trace != nullptr) *trace = {dir, approach, waypoint, accel, engaged};
  return action;
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_RMP_HPP_
