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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "rmpc_push/random.hpp"
#include "rmpc_push/rmp.hpp"
#include "test_scenes.hpp"

namespace rmpc_push {
namespace {

using testing::disc;
constexpr std::array<double, 4> kOnes{1.0, 1.0, 1.0, 1.0};

EvaluatedPolicy linear_policy(const Eigen::MatrixXd& J, const Eigen::VectorXd& a, const Eigen::MatrixXd& M) {
  EvaluatedPolicy p;
  p.jacobian = J;
  p.accel = a;
  p.metric = M;
  p.curvature = TaskVector::Zero(a.size());
  return p;
}

// ---- local field ----

TEST(PushLocalField, Examples) {
  Vec2 v = push_local_field({0, 0}, 0.1, kOnes);
  EXPECT_NEAR(v.x(), -0.0025, 1e-9);
  EXPECT_NEAR(v.y(), 0.0, 1e-9);
  v = push_local_field({1, 1}, 0.1, kOnes);
  EXPECT_NEAR(v.x(), -0.0025, 1e-9);
  EXPECT_NEAR(v.y(), 1.0, 1e-9);
  v = push_local_field({0.5, 0}, 0.2, kOnes);
  EXPECT_NEAR(v.x(), 0.24, 1e-9);
  EXPECT_NEAR(v.y(), 0.0, 1e-9);
}

TEST(PushLocalField, GridMatchesPolynomialOracle) {
  const std::array<double, 4> alphas{0.7, 1.3, 2.1, 0.4};
  const double m = 0.09;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double x = -1.0 + 0.1 * i, y = -1.0 + 0.1 * j;
      // Oracle written from the monomials with std::pow.
      const double vx = alphas[0] * std::pow(x, 2) - alphas[1] * std::pow(y, 2) - alphas[2] * std::pow(m / 2, 2);
      const double vy = alphas[3] * std::pow(x, 1) * std::pow(y, 1);
      const Vec2 v = push_local_field({x, y}, m, alphas);
      // Machine precision relative to the magnitude of the summed terms.
      const double eps = std::numeric_limits<double>::epsilon();
      const double scale_x = std::abs(alphas[0] * x * x) + std::abs(alphas[1] * y * y) + std::abs(alphas[2] * m * m / 4);
      EXPECT_LE(std::abs(v.x() - vx), 4 * eps * scale_x) << x << "," << y;
      EXPECT_LE(std::abs(v.y() - vy), 2 * eps * std::abs(vy)) << x << "," << y;
    }
  }
}

TEST(PushFrame, Examples) {
  const ObjectState a = disc(1, 0.05, 1.0, 2.0);
  EXPECT_EQ(push_frame(a, 0.0), (Pose2{1.0, 2.0, 0.0}));
  const ObjectState b = disc(1, 0.05, 0.0, 0.0);
  EXPECT_EQ(push_frame(b, kPi / 2), (Pose2{0.0, 0.0, kPi / 2}));
  const Vec2 rel = to_frame(Pose2{1.0, 2.0, 0.0}, Vec2(2.0, 2.0));
  EXPECT_EQ(rel, Vec2(1.0, 0.0));
}

TEST(PushFrame, RoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Pose2 f{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-kPi, kPi)};
    const Vec2 p(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vec2 back = f.position() + rotate_from_frame(f, to_frame(f, p));
    EXPECT_NEAR((back - p).norm(), 0.0, 1e-12);
  }
}

// ---- attractor ----

TEST(Attractor, Examples) {
  auto p = attractor_policy({1, 0}, {0, 0}, {1, 0}, 1.0);
  EXPECT_EQ(p.accel.norm(), 0.0);
  p = attractor_policy({0, 0}, {0, 0}, {1, 0}, 1.0);
  EXPECT_NEAR(p.accel(0), 2.0, 1e-12);
  EXPECT_NEAR(p.accel(1), 0.0, 1e-12);
  p = attractor_policy({0, 0}, {1, 0}, {1, 0}, 1.0);
  EXPECT_NEAR(p.accel.norm(), 0.0, 1e-12);
}

TEST(Attractor, SoftensNearGoalAndScalesMetric) {
  const auto p = attractor_policy({0, 0}, {0, 0}, {0.1, 0}, 3.0);
  EXPECT_NEAR(p.accel(0), 2.0 * 0.1 / 0.2, 1e-12);
  EXPECT_EQ(p.metric, Mat2(3.0 * Mat2::Identity()));
}

// ---- obstacle ----

TEST(Obstacle, InactiveWhenRecedingFarAway) {
  // d = 1.0 with the robot moving away.
  const auto p = obstacle_policy({1.1, 0}, {0.3, 0}, Vec2(0, 0), 0.05, 0.05, 1.0);
  EXPECT_NEAR(p.jacobian(0, 0), 1.0, 1e-12);
  EXPECT_EQ(p.metric(0, 0), 0.0);
  const std::vector<EvaluatedPolicy> both{attractor_policy({1.1, 0}, {0.3, 0}, {0, 1}, 1.0), p};
  const std::vector<EvaluatedPolicy> alone{both[0]};
  EXPECT_EQ(resolve(both), resolve(alone));
}

TEST(Obstacle, AccelAtMinimumClearance) {
  RmpGains g;
  // d = d_min exactly, at rest.
  const auto p = obstacle_policy({0.11, 0}, {0, 0}, Vec2(0, 0), 0.05, 0.05, 1.0, g);
  EXPECT_NEAR(p.accel(0), 500.0, 1e-6);
  EXPECT_NEAR(p.metric(0, 0), 1e4, 1e-3);
}

TEST(Obstacle, ApproachingAddsDamping) {
  // d = 0.1, ddot = -1.
  const auto p = obstacle_policy({0.2, 0}, {-1, 0}, Vec2(0, 0), 0.05, 0.05, 1.0);
  EXPECT_NEAR(p.accel(0), 9.0, 1e-9);
  EXPECT_NEAR(p.metric(0, 0), 100.0, 1e-9);
}

TEST(Obstacle, ApproachingFarAwayIsActive) {
  const auto p = obstacle_policy({1.1, 0}, {-0.3, 0}, Vec2(0, 0), 0.05, 0.05, 2.0);
  EXPECT_NEAR(p.metric(0, 0), 2.0, 1e-12);
}

TEST(Obstacle, RangeCutoff) {
  RmpGains g;
  g.obstacle_range = 0.5;
  const auto p = obstacle_policy({1.1, 0}, {-0.3, 0}, Vec2(0, 0), 0.05, 0.05, 1.0, g);
  EXPECT_EQ(p.metric(0, 0), 0.0);
}

TEST(Obstacle, BoxUsesHalfDiagonal) {
  const ObjectState b = testing::box(2, 0.06, 0.08, 0.0, 0.0);
  const auto p = obstacle_policy({0.3, 0}, {0, 0}, b, 0.05, 1.0);
  EXPECT_NEAR(p.metric(0, 0), 1.0 / std::pow(0.3 - 0.05 - 0.05, 2), 1e-9);
}

TEST(ClearanceMap, JacobianMatchesCentralDifferences) {
  Rng rng(17);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const ClearanceMap map{Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.uniform(0.0, 0.2)};
    Vec2 x;
    do {
      x = Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
    } while ((x - map.center).norm() < 0.05);
    const auto J = map.jacobian(x);
    for (int k = 0; k < 2; ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = h;
      const double fd = (map.value(x + e) - map.value(x - e)) / (2 * h);
      EXPECT_NEAR(J(k), fd, 1e-5);
    }
    const Vec2 xd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double hh = 1e-4;
    const double second = (map.value(x + hh * xd) - 2 * map.value(x) + map.value(x - hh * xd)) / (hh * hh);
    EXPECT_NEAR(map.curvature(x, xd), second, 1e-4);
  }
}

// ---- resolve ----

TEST(Resolve, Examples) {
  std::vector<EvaluatedPolicy> one{linear_policy(Mat2::Identity(), Vec2(1, 2), Mat2::Identity())};
  Vec2 q = resolve(one);
  EXPECT_NEAR(q.x(), 1.0, 1e-9);
  EXPECT_NEAR(q.y(), 2.0, 1e-9);

  std::vector<EvaluatedPolicy> two{linear_policy(Mat2::Identity(), Vec2(1, 0), 2 * Mat2::Identity()),
                                   linear_policy(Mat2::Identity(), Vec2(4, 0), Mat2::Identity())};
  q = resolve(two);
  EXPECT_NEAR(q.x(), 2.0, 1e-9);
  EXPECT_NEAR(q.y(), 0.0, 1e-9);

  Eigen::MatrixXd J(1, 2);
  J << 1, 0;
  std::vector<EvaluatedPolicy> rank1{linear_policy(J, Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Identity(1, 1)),
                                     linear_policy(Mat2::Identity(), Vec2(7, 7), Mat2::Zero())};
  q = resolve(rank1);
  EXPECT_NEAR(q.x(), 5.0, 1e-9);
  EXPECT_NEAR(q.y(), 0.0, 1e-9);
}

TEST(Resolve, RejectsBadMetrics) {
  Mat2 asym;
  asym << 1, 0.5, 0, 1;
  std::vector<EvaluatedPolicy> p{linear_policy(Mat2::Identity(), Vec2(1, 0), asym)};
  EXPECT_THROW(resolve(p), NotPsdError);
  Mat2 indefinite;
  indefinite << 1, 0, 0, -1;
  p = {linear_policy(Mat2::Identity(), Vec2(1, 0), indefinite)};
  EXPECT_THROW(resolve(p), NotPsdError);
  Eigen::MatrixXd J(1, 2);
  J << 1, 0;
  p = {linear_policy(J, Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, -0.5))};
  EXPECT_THROW(resolve(p), NotPsdError);
  EXPECT_THROW(resolve({}), InvalidArgument);
}

TEST(Resolve, ClampsToAccelerationLimit) {
  std::vector<EvaluatedPolicy> p{linear_policy(Mat2::Identity(), Vec2(30, 40), Mat2::Identity())};
  const Vec2 q = resolve(p, 2.0);
  EXPECT_NEAR(q.norm(), 2.0, 1e-12);
  EXPECT_NEAR(q.x() / q.y(), 0.75, 1e-12);
}

TEST(Resolve, CurvatureIsSubtracted) {
  EvaluatedPolicy p = linear_policy(Mat2::Identity(), Vec2(1, 1), Mat2::Identity());
  p.curvature = Vec2(0.5, -0.5);
  const Vec2 q = resolve(std::span<const EvaluatedPolicy>(&p, 1));
  EXPECT_NEAR(q.x(), 0.5, 1e-12);
  EXPECT_NEAR(q.y(), 1.5, 1e-12);
}

// Brute-force oracle: assemble the 2x2 normal equations by hand and solve
// them with Cramer's rule.
Vec2 wls_oracle(const std::vector<EvaluatedPolicy>& ps) {
  double a = 0, b = 0, d = 0, r0 = 0, r1 = 0;
  for (const auto& p : ps) {
    const int n = static_cast<int>(p.accel.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double m = p.metric(i, j);
        a += p.jacobian(i, 0) * m * p.jacobian(j, 0);
        b += p.jacobian(i, 0) * m * p.jacobian(j, 1);
        d += p.jacobian(i, 1) * m * p.jacobian(j, 1);
        r0 += p.jacobian(i, 0) * m * p.accel(j);
        r1 += p.jacobian(i, 1) * m * p.accel(j);
      }
    }
  }
  const double det = a * d - b * b;
  return {(d * r0 - b * r1) / det, (a * r1 - b * r0) / det};
}

double weighted_cost(const std::vector<EvaluatedPolicy>& ps, const Vec2& q) {
  double c = 0;
  for (const auto& p : ps) {
    const Eigen::VectorXd e = p.jacobian * q - p.accel;
    c += e.dot(p.metric * e);
  }
  return c;
}

TEST(Resolve, MatchesWeightedLeastSquaresOracle) {
  Rng rng(23);
  int checked = 0;
  for (int inst = 0; inst < 200; ++inst) {
    std::vector<EvaluatedPolicy> ps;
    const int n = rng.uniform_int(1, 4);
    for (int k = 0; k < n; ++k) {
      const int dim = rng.uniform_int(1, 2);
      Eigen::MatrixXd J(dim, 2), L(dim, dim);
      Eigen::VectorXd a(dim);
      for (int i = 0; i < dim; ++i) {
        a(i) = rng.uniform(-3, 3);
        for (int j = 0; j < 2; ++j) J(i, j) = rng.uniform(-1, 1);
        for (int j = 0; j < dim; ++j) L(i, j) = rng.uniform(-1, 1);
      }
      ps.push_back(linear_policy(J, a, L * L.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim)));
    }
    Mat2 A = Mat2::Zero();
    for (const auto& p : ps) A += p.jacobian.transpose() * p.metric * p.jacobian;
    if (A.determinant() < 1e-3) continue;  // oracle needs a well-posed system
    ++checked;
    const Vec2 q = resolve(ps);
    const Vec2 oracle = wls_oracle(ps);
    EXPECT_NEAR((q - oracle).norm(), 0.0, 1e-8) << "instance " << inst;
    // And it is a minimiser: nudging it never lowers the cost.
    for (const Vec2& e : {Vec2(1e-4, 0), Vec2(0, 1e-4), Vec2(-1e-4, 1e-4)})
      EXPECT_GE(weighted_cost(ps, q + e), weighted_cost(ps, q) - 1e-12);
  }
  EXPECT_GT(checked, 150);
}

TEST(Resolve, OrderInvariantAndScaleHomogeneous) {
  Rng rng(29);
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<EvaluatedPolicy> ps;
    for (int k = 0; k < 3; ++k) {
      Mat2 L;
      L << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
      ps.push_back(linear_policy(Mat2::Identity(), Vec2(rng.uniform(-2, 2), rng.uniform(-2, 2)),
                                 L * L.transpose() + 0.05 * Mat2::Identity()));
    }
    const Vec2 q = resolve(ps);
    std::vector<EvaluatedPolicy> rev(ps.rbegin(), ps.rend());
    EXPECT_NEAR((resolve(rev) - q).norm(), 0.0, 1e-10);
    const double s = rng.uniform(0.1, 10.0);
    for (auto& p : ps) p.metric *= s;
    EXPECT_NEAR((resolve(ps) - q).norm(), 0.0, 1e-10);
  }
}

TEST(Resolve, RaisingOneWeightPullsTowardsIt) {
  const auto target = linear_policy(Mat2::Identity(), Vec2(3, 0), Mat2::Identity());
  const auto other = linear_policy(Mat2::Identity(), Vec2(0, 1), Mat2::Identity());
  double prev = std::numeric_limits<double>::infinity();
  for (double w : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    auto t = target;
    t.metric *= w;
    const std::vector<EvaluatedPolicy> ps{t, other};
    const double gap = (resolve(ps) - Vec2(3, 0)).norm();
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

// ---- controller ----

TEST(Control, EmptySceneHeadsForApproachPoint) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  s.robot.pose = {-0.5, 0.0, 0.0};
  PhysicsConfig phys;
  RmpGains g;
  ControlTrace tr;
  const RobotAction a = control(s, task, RmpWeights::nominal(0), g, phys, {}, &tr);
  const Vec2 approach = approach_point(s.objects[0], 0.0, phys.robot_radius, g.approach_margin);
  EXPECT_EQ(tr.waypoint, approach);
  const Vec2 want = approach - s.robot.pose.position();
  EXPECT_LT(std::abs(std::atan2(a.acceleration.y(), a.acceleration.x()) - std::atan2(want.y(), want.x())), 1e-6);
  EXPECT_FALSE(tr.engaged);
}

TEST(Control, AtRestOnApproachPointIsStill) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  PhysicsConfig phys;
  RmpGains g;
  const Vec2 approach = approach_point(s.objects[0], 0.0, phys.robot_radius, g.approach_margin);
  s.robot.pose = {approach.x(), approach.y(), 0.0};
  ControlTrace tr;
  const RobotAction a = control(s, task, RmpWeights::nominal(0), g, phys, {}, &tr);
  EXPECT_LT(a.acceleration.norm(), 1e-9);
  EXPECT_TRUE(tr.engaged);
}

TEST(Control, EngagedVelocityComesFromField) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  PhysicsConfig phys;
  RmpGains g;
  const Vec2 approach = approach_point(s.objects[0], 0.0, phys.robot_radius, g.approach_margin);
  s.robot.pose = {approach.x(), approach.y() + 0.01, 0.0};
  RmpWeights w = RmpWeights::nominal(0);
  w.field_alphas = {1.0, 2.0, 0.5, 1.5};
  const RobotAction a = control(s, task, w, g, phys);
  const Pose2 frame = push_frame(s.objects[0], 0.0);
  const Vec2 field = g.field_gain * push_local_field(to_frame(frame, s.robot.pose.position()), 0.08, w.field_alphas);
  const Vec2 want = clamp_norm(rotate_from_frame(frame, field), phys.v_max);
  EXPECT_NEAR((a.velocity - want).norm(), 0.0, 1e-12);
  EXPECT_GT(a.velocity.x(), 0.0);
}

TEST(Control, WalksAroundWhenStartingOnTheWrongSide) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  s.robot.pose = {0.4, 0.0, 0.0};  // between target and goal
  PhysicsConfig phys;
  RmpGains g;
  ControlTrace tr;
  control(s, task, RmpWeights::nominal(0), g, phys, {}, &tr);
  EXPECT_NE(tr.waypoint, tr.approach);
  // The carrot keeps clear of the target.
  EXPECT_GT((tr.waypoint - s.objects[0].pose.position()).norm(), 0.04 + phys.robot_radius);
}

TEST(Control, ObstacleBetweenRobotAndApproachDeflects) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  s.robot.pose = {-0.6, 0.0, 0.0};
  s.objects.push_back(disc(2, 0.03, -0.38, 0.01));
  PhysicsConfig phys;
  RmpGains g;
  ControlTrace tr;
  const RobotAction a = control(s, task, RmpWeights::nominal(1), g, phys, {}, &tr);
  const Vec2 line = (tr.waypoint - s.robot.pose.position()).normalized();
  const double perp = std::abs(a.acceleration.x() * line.y() - a.acceleration.y() * line.x());
  EXPECT_GT(perp, 1e-3);
  const RobotAction blind = control(s, task, RmpWeights::nominal(1), g, phys, ControlOptions{.avoid_obstacles = false});
  EXPECT_LT(std::abs(blind.acceleration.x() * line.y() - blind.acceleration.y() * line.x()), 1e-9);
}

TEST(Control, RespectsLimitsAndWeightCount) {
  PhysicsConfig phys;
  RmpGains g;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = testing::generated_case(seed);
    const RobotAction a = control(c.state, c.task, RmpWeights::nominal(c.state.objects.size() - 1), g, phys);
    EXPECT_LE(a.velocity.norm(), phys.v_max + 1e-12);
    EXPECT_LE(a.acceleration.norm(), phys.a_max + 1e-12);
    EXPECT_THROW(control(c.state, c.task, RmpWeights::nominal(0), g, phys), InvalidArgument);
  }
}

TEST(GlobalDirection, FallsBackToBearing) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  task.goal = s.objects[0].pose.position();
  EXPECT_NEAR(global_policy_direction(s, task, RmpWeights::nominal(0), RmpGains{}), 0.0, 1e-12);
  task.goal = Vec2(0.0, -0.5);
  EXPECT_NEAR(global_policy_direction(s, task, RmpWeights::nominal(0), RmpGains{}), -kPi / 2, 1e-12);
}

}  // namespace
}  // namespace rmpc_push
