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

// Fixed-timestep planar rigid-body engine for pusher/object contact.
//
// One step:
//   1. the robot's velocity is set from the action (v = clamp(v_cmd + a dt));
//   2. floor friction decelerates every object by mu g dt, stopping at zero;
//   3. overlapping pairs are found at the start-of-step poses and resolved
//      with sequential impulses (zero restitution, Coulomb contact friction);
//   4. poses are integrated with the new velocities;
//   5. remaining overlap is projected out until it is within tolerance.
//
// The robot is kinematic during the velocity solve. It only yields during
// projection when an object is jammed between it and a wall or another
// object. No warm starting is carried between steps, so step() is a pure
// function of its arguments.

#ifndef RMPC_PUSH_PHYSICS_HPP_
#define RMPC_PUSH_PHYSICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpc_push/core.hpp"

namespace rmpc_push {

struct PhysicsConfig {
  double dt = 0.05;
  double floor_friction_mu = 0.6;
  double contact_restitution = 0.0;  // fixed; anything else is rejected
  double contact_friction_mu = 0.3;
  double penetration_tolerance = 0.001;
  int solver_iterations = 8;
  int position_iterations = 12;
  double robot_radius = 0.05;
  double robot_mass = 10.0;  // only used when unjamming during projection
  double v_max = 0.5;
  double a_max = 2.0;
};

inline void validate(const PhysicsConfig& c) {
  if (!(c.dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(c.floor_friction_mu >= 0.0)) throw InvalidArgument("floor_friction_mu must be >= 0");
  if (c.contact_restitution != 0.0) throw InvalidArgument("only zero restitution is supported");
  if (!(c.contact_friction_mu >= 0.0)) throw InvalidArgument("contact_friction_mu must be >= 0");
  if (!(c.penetration_tolerance > 0.0)) throw InvalidArgument("penetration_tolerance must be > 0");
  if (c.solver_iterations < 1) throw InvalidArgument("solver_iterations must be >= 1");
  if (c.position_iterations < 1) throw InvalidArgument("position_iterations must be >= 1");
  if (!(c.robot_radius > 0.0) || !(c.robot_mass > 0.0)) throw InvalidArgument("robot radius and mass must be > 0");
  if (!(c.v_max > 0.0) || !(c.a_max > 0.0)) throw InvalidArgument("v_max and a_max must be > 0");
}

/// Raised on non-finite input or a blown-up integration.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what, int step_index = -1)
      : std::runtime_error(what), step_index_(step_index) {}
  int step_index() const { return step_index_; }

 private:
  int step_index_;
};

struct ContactRecord {
  int id_a = 0;
  int id_b = 0;
  Vec2 point = Vec2::Zero();
  Vec2 normal = Vec2::Zero();  // from a towards b
  double depth = 0.0;
};

struct StepReport {
  std::vector<ContactRecord> contacts;
  std::vector<int> displaced_non_target_ids;  // sorted ascending
};

/// Which objects count as "displaced" in a StepReport.
struct DisplacementFilter {
  int target_id = 0;
  double angular_weight = 0.1;
  double epsilon = 0.002;
};

namespace detail {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 cross(double w, const Vec2& r) { return {-w * r.y(), w * r.x()}; }

inline Vec2 rotate(const Vec2& v, double c, double s) { return {c * v.x() - s * v.y(), s * v.x() + c * v.y()}; }

struct Body {
  int id = 0;
  Shape shape;
  Vec2 p = Vec2::Zero();
  double theta = 0.0;
  Vec2 v = Vec2::Zero();
  double w = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
  double bound = 0.0;
};

struct ContactPoint {
  Vec2 point;
  double depth;
};

// Manifold between body a and body b (b < 0 means a wall, indexed by
// wall = -b - 1). normal points from a to b.
struct Manifold {
  int a = 0;
  int b = 0;
  Vec2 normal = Vec2::Zero();
  int count = 0;
  std::array<ContactPoint, 2> points{};
  double max_depth() const {
    double d = 0.0;
    for (int i = 0; i < count; ++i) d = std::max(d, points[i].depth);
    return d;
  }
};

struct OrientedBox {
  Vec2 c;
  Vec2 u0, u1;
  double h0, h1;
  double half(int i) const { return i == 0 ? h0 : h1; }
  const Vec2& axis(int i) const { return i == 0 ? u0 : u1; }
  double project(const Vec2& n) const { return h0 * std::abs(u0.dot(n)) + h1 * std::abs(u1.dot(n)); }
};

inline OrientedBox make_box(const Body& b) {
  const auto& bx = std::get<Box>(b.shape);
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  return {b.p, Vec2(c, s), Vec2(-s, c), 0.5 * bx.width, 0.5 * bx.length};
}

// Contact points of a two-point manifold are ordered by x, then depth. Both
// keys survive mirroring about the x axis, so mirrored scenes are solved in
// the same order.
inline void order_points(Manifold& m) {
  if (m.count == 2) {
    const auto& p = m.points;
    if (p[1].point.x() < p[0].point.x() || (p[1].point.x() == p[0].point.x() && p[1].depth > p[0].depth))
      std::swap(m.points[0], m.points[1]);
  }
}

inline bool collide_disc_disc(const Body& a, double ra, const Body& b, double rb, Manifold& m) {
  const Vec2 d = b.p - a.p;
  const double dist = d.norm();
  const double depth = ra + rb - dist;
  if (depth <= 0.0) return false;
  m.normal = dist > 1e-12 ? Vec2(d / dist) : Vec2(1.0, 0.0);
  m.count = 1;
  m.points[0] = {a.p + m.normal * (ra - 0.5 * depth), depth};
  return true;
}

// Box a against disc b.
inline bool collide_box_disc(const OrientedBox& box, const Body& disc, double r, Manifold& m) {
  const Vec2 d = disc.p - box.c;
  const Vec2 local(d.dot(box.u0), d.dot(box.u1));
  const Vec2 clamped(std::clamp(local.x(), -box.h0, box.h0), std::clamp(local.y(), -box.h1, box.h1));
  const bool inside = clamped == local;
  if (!inside) {
    const Vec2 diff = local - clamped;
    const double dist = diff.norm();
    if (dist >= r) return false;
    const Vec2 n_local = diff / dist;
    m.normal = box.u0 * n_local.x() + box.u1 * n_local.y();
    const double depth = r - dist;
    const Vec2 surface = box.c + box.u0 * clamped.x() + box.u1 * clamped.y();
    m.count = 1;
    m.points[0] = {surface + m.normal * (-0.5 * depth), depth};
    return true;
  }
  // Centre inside the box: push out through the nearest face.
  const double dx = box.h0 - std::abs(local.x());
  const double dy = box.h1 - std::abs(local.y());
  Vec2 n_local;
  double face_dist;
  if (dx <= dy) {
    n_local = Vec2(local.x() >= 0.0 ? 1.0 : -1.0, 0.0);
    face_dist = dx;
  } else {
    n_local = Vec2(0.0, local.y() >= 0.0 ? 1.0 : -1.0);
    face_dist = dy;
  }
  m.normal = box.u0 * n_local.x() + box.u1 * n_local.y();
  const double depth = r + face_dist;
  m.count = 1;
  m.points[0] = {disc.p + m.normal * (face_dist - 0.5 * depth), depth};
  return true;
}

// Separating-axis test with reference-face clipping.
inline bool collide_box_box(const OrientedBox& A, const OrientedBox& B, Manifold& m) {
  const Vec2 d = B.c - A.c;
  double best_sep = -std::numeric_limits<double>::infinity();
  int best_axis = -1;  // 0,1 -> A's axes; 2,3 -> B's axes
  for (int i = 0; i < 4; ++i) {
    const Vec2& ax = i < 2 ? A.axis(i) : B.axis(i - 2);
    const double sep = std::abs(d.dot(ax)) - A.project(ax) - B.project(ax);
    if (sep > 0.0) return false;
    // Prefer A's faces unless B's are clearly better.
    const double bias = i < 2 ? 0.0 : 1e-9;
    if (sep > best_sep + bias) {
      best_sep = sep;
      best_axis = i;
    }
  }
  const bool ref_is_a = best_axis < 2;
  const OrientedBox& ref = ref_is_a ? A : B;
  const OrientedBox& inc = ref_is_a ? B : A;
  const int ref_i = ref_is_a ? best_axis : best_axis - 2;
  Vec2 n = ref.axis(ref_i);
  if (n.dot(inc.c - ref.c) < 0.0) n = -n;  // from ref towards inc
  const double ref_h = ref.half(ref_i);
  const Vec2 t = ref.axis(1 - ref_i);
  const double ref_t = ref.half(1 - ref_i);

  // Incident face: most anti-parallel to n.
  const double d0 = inc.u0.dot(n), d1 = inc.u1.dot(n);
  Vec2 face_n, face_t;
  double face_h, face_ht;
  if (std::abs(d0) >= std::abs(d1)) {
    face_n = d0 > 0.0 ? Vec2(-inc.u0) : inc.u0;
    face_t = inc.u1;
    face_h = inc.h0;
    face_ht = inc.h1;
  } else {
    face_n = d1 > 0.0 ? Vec2(-inc.u1) : inc.u1;
    face_t = inc.u0;
    face_h = inc.h1;
    face_ht = inc.h0;
  }
  const Vec2 fc = inc.c + face_n * face_h;
  std::array<Vec2, 2> seg = {fc - face_t * face_ht, fc + face_t * face_ht};

  // Clip the incident segment to the reference face's side planes.
  const double ct = ref.c.dot(t);
  auto clip = [&](double sign, double offset) {
    std::array<Vec2, 2> out = seg;
    const double da = sign * seg[0].dot(t) - offset;
    const double db = sign * seg[1].dot(t) - offset;
    if (da > 0.0 && db > 0.0) return false;
    if (da > 0.0) out[0] = seg[0] + (seg[1] - seg[0]) * (da / (da - db));
    if (db > 0.0) out[1] = seg[1] + (seg[0] - seg[1]) * (db / (db - da));
    seg = out;
    return true;
  };
  if (!clip(1.0, ct + ref_t)) return false;
  if (!clip(-1.0, -ct + ref_t)) return false;

  const double front = ref.c.dot(n) + ref_h;
  m.count = 0;
  for (const Vec2& v : seg) {
    const double sep = v.dot(n) - front;
    if (sep < 0.0) m.points[m.count++] = {v - n * (0.5 * sep), -sep};
  }
  if (m.count == 0) return false;
  m.normal = ref_is_a ? n : Vec2(-n);
  return true;
}

inline Vec2 wall_normal(int wall) {
  // Outward from the workspace, i.e. from a body into the wall.
  switch (wall) {
    case 0: return {-1.0, 0.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, -1.0};
    default: return {0.0, 1.0};
  }
}

inline double wall_plane(int wall, const Workspace& ws) {
  switch (wall) {
    case 0: return -ws.min_x;
    case 1: return ws.max_x;
    case 2: return -ws.min_y;
    default: return ws.max_y;
  }
}

inline int wall_report_id(int wall) { return kWallLeftId - wall; }

inline bool collide_wall(const Body& body, int wall, const Workspace& ws, Manifold& m) {
  const Vec2 n = wall_normal(wall);
  const double plane = wall_plane(wall, ws);  // n.x <= plane inside
  m.count = 0;
  m.normal = n;
  if (const auto* disc = std::get_if<Disc>(&body.shape)) {
    const double depth = body.p.dot(n) + disc->radius - plane;
    if (depth <= 0.0) return false;
    m.points[0] = {body.p + n * (disc->radius - 0.5 * depth), depth};
    m.count = 1;
    return true;
  }
  const OrientedBox box = make_box(body);
  std::array<Vec2, 4> corners = {box.c + box.u0 * box.h0 + box.u1 * box.h1, box.c - box.u0 * box.h0 + box.u1 * box.h1,
                                 box.c - box.u0 * box.h0 - box.u1 * box.h1, box.c + box.u0 * box.h0 - box.u1 * box.h1};
  std::array<ContactPoint, 4> found{};
  int nf = 0;
  for (const auto& c : corners) {
    const double depth = c.dot(n) - plane;
    if (depth > 0.0) found[nf++] = {c - n * (0.5 * depth), depth};
  }
  if (nf == 0) return false;
  // Keep the two deepest corners.
  std::sort(found.begin(), found.begin() + nf, [](const ContactPoint& a, const ContactPoint& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.point.x() < b.point.x();
  });
  m.count = std::min(nf, 2);
  for (int i = 0; i < m.count; ++i) m.points[i] = found[i];
  return true;
}

inline bool collide_pair(const Body& a, const Body& b, Manifold& m) {
  if (b.id == a.id) return false;
  // Bounding-circle rejection.
  if ((b.p - a.p).squaredNorm() >= (a.bound + b.bound) * (a.bound + b.bound)) return false;
  const auto* da = std::get_if<Disc>(&a.shape);
  const auto* db = std::get_if<Disc>(&b.shape);
  bool hit = false;
  if (da && db) {
    hit = collide_disc_disc(a, da->radius, b, db->radius, m);
  } else if (!da && db) {
    hit = collide_box_disc(make_box(a), b, db->radius, m);
  } else if (da && !db) {
    hit = collide_box_disc(make_box(b), a, da->radius, m);
    m.normal = -m.normal;
  } else {
    hit = collide_box_box(make_box(a), make_box(b), m);
  }
  return hit;
}

// Robot is always the last body.
inline std::vector<Manifold> find_contacts(std::span<const Body> bodies, const Workspace& ws) {
  std::vector<Manifold> out;
  const int n = static_cast<int>(bodies.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Manifold m;
      if (collide_pair(bodies[i], bodies[j], m)) {
        m.a = i;
        m.b = j;
        order_points(m);
        out.push_back(m);
      }
    }
    for (int w = 0; w < 4; ++w) {
      Manifold m;
      if (collide_wall(bodies[i], w, ws, m)) {
        m.a = i;
        m.b = -w - 1;
        order_points(m);
        out.push_back(m);
      }
    }
  }
  return out;
}

inline void solve_velocities(std::vector<Body>& bodies, const std::vector<Manifold>& manifolds, const PhysicsConfig& cfg) {
  struct Row {
    int a, b;
    Vec2 n, t, ra, rb;
    double mass_n, mass_t;
    double lambda_n = 0.0, lambda_t = 0.0;
  };
  std::vector<Row> rows;
  rows.reserve(manifolds.size() * 2);
  Body wall;  // static: zero inverse mass
  for (const auto& m : manifolds) {
    const Body& A = bodies[m.a];
    const Body& B = m.b >= 0 ? bodies[m.b] : wall;
    for (int k = 0; k < m.count; ++k) {
      Row r;
      r.a = m.a;
      r.b = m.b;
      r.n = m.normal;
      r.t = Vec2(-m.normal.y(), m.normal.x());
      r.ra = m.points[k].point - A.p;
      r.rb = m.b >= 0 ? Vec2(m.points[k].point - B.p) : Vec2::Zero();
      const double rna = cross(r.ra, r.n), rnb = cross(r.rb, r.n);
      const double rta = cross(r.ra, r.t), rtb = cross(r.rb, r.t);
      const double kn = A.inv_mass + B.inv_mass + A.inv_inertia * rna * rna + B.inv_inertia * rnb * rnb;
      const double kt = A.inv_mass + B.inv_mass + A.inv_inertia * rta * rta + B.inv_inertia * rtb * rtb;
      if (kn <= 0.0) continue;  // two immovable bodies
      r.mass_n = 1.0 / kn;
      r.mass_t = kt > 0.0 ? 1.0 / kt : 0.0;
      rows.push_back(r);
    }
  }
  auto velocity_at = [&](int idx, const Vec2& r) -> Vec2 {
    if (idx < 0) return Vec2::Zero();
    const Body& b = bodies[idx];
    return b.v + cross(b.w, r);
  };
  auto apply = [&](int idx, const Vec2& r, const Vec2& impulse) {
    if (idx < 0) return;
    Body& b = bodies[idx];
    b.v += b.inv_mass * impulse;
    b.w += b.inv_inertia * cross(r, impulse);
  };
  for (int it = 0; it < cfg.solver_iterations; ++it) {
    for (auto& r : rows) {
      // Tangential first so the normal row has the last word.
      {
        const Vec2 dv = velocity_at(r.b, r.rb) - velocity_at(r.a, r.ra);
        const double vt = dv.dot(r.t);
        const double limit = cfg.contact_friction_mu * r.lambda_n;
        const double new_lambda = std::clamp(r.lambda_t - vt * r.mass_t, -limit, limit);
        const double dl = new_lambda - r.lambda_t;
        r.lambda_t = new_lambda;
        const Vec2 P = dl * r.t;
        apply(r.a, r.ra, -P);
        apply(r.b, r.rb, P);
      }
      {
        const Vec2 dv = velocity_at(r.b, r.rb) - velocity_at(r.a, r.ra);
        const double vn = dv.dot(r.n);  // < 0 means approaching
        const double new_lambda = std::max(0.0, r.lambda_n - vn * r.mass_n);
        const double dl = new_lambda - r.lambda_n;
        r.lambda_n = new_lambda;
        const Vec2 P = dl * r.n;
        apply(r.a, r.ra, -P);
        apply(r.b, r.rb, P);
      }
    }
  }
}

// Projects out overlap beyond half the tolerance. Linear correction only.
inline void project_positions(std::vector<Body>& bodies, const Workspace& ws, const PhysicsConfig& cfg) {
  const double slop = 0.5 * cfg.penetration_tolerance;
  const int robot = static_cast<int>(bodies.size()) - 1;
  auto pass = [&](double robot_inv_mass) {
    const auto manifolds = find_contacts(bodies, ws);
    double worst = 0.0;
    for (const auto& m : manifolds) {
      Body& A = bodies[m.a];
      // Recompute with current poses since earlier corrections in this
      // pass may already have separated the pair.
      Manifold fresh;
      bool hit;
      if (m.b >= 0) {
        hit = collide_pair(A, bodies[m.b], fresh);
      } else {
        hit = collide_wall(A, -m.b - 1, ws, fresh);
      }
      if (!hit) continue;
      const double depth = fresh.max_depth();
      worst = std::max(worst, depth);
      if (depth <= slop) continue;
      const double ia = m.a == robot ? robot_inv_mass : A.inv_mass;
      const double ib = m.b < 0 ? 0.0 : (m.b == robot ? robot_inv_mass : bodies[m.b].inv_mass);
      const double sum = ia + ib;
      if (sum <= 0.0) continue;
      const Vec2 corr = fresh.normal * (depth - slop) / sum;
      A.p -= ia * corr;
      if (m.b >= 0) bodies[m.b].p += ib * corr;
    }
    return worst;
  };
  double worst = 0.0;
  for (int i = 0; i < cfg.position_iterations; ++i) {
    worst = pass(0.0);
    if (worst <= slop) return;
  }
  // Jammed against something immovable: let the robot give way.
  const double robot_inv = 1.0 / cfg.robot_mass;
  for (int i = 0; i < 4 * cfg.position_iterations; ++i) {
    worst = pass(robot_inv);
    if (worst <= slop) return;
  }
}

// The robot stops at the walls: its centre is clamped to the workspace
// inset by its radius and the velocity component into the wall is dropped.
inline void confine_robot(Body& robot, const Workspace& ws, double radius) {
  const double lo_x = ws.min_x + radius, hi_x = ws.max_x - radius;
  const double lo_y = ws.min_y + radius, hi_y = ws.max_y - radius;
  if (robot.p.x() < lo_x) {
    robot.p.x() = lo_x;
    robot.v.x() = std::max(robot.v.x(), 0.0);
  } else if (robot.p.x() > hi_x) {
    robot.p.x() = hi_x;
    robot.v.x() = std::min(robot.v.x(), 0.0);
  }
  if (robot.p.y() < lo_y) {
    robot.p.y() = lo_y;
    robot.v.y() = std::max(robot.v.y(), 0.0);
  } else if (robot.p.y() > hi_y) {
    robot.p.y() = hi_y;
    robot.v.y() = std::min(robot.v.y(), 0.0);
  }
}

inline void check_finite(const SceneState& s, const RobotAction& u) {
  if (!u.velocity.allFinite() || !u.acceleration.allFinite()) throw SimulationError("non-finite action");
  if (!is_finite(s.robot.pose) || !s.robot.velocity.allFinite() || !std::isfinite(s.time))
    throw SimulationError("non-finite robot state");
  for (const auto& o : s.objects)
    if (!is_finite(o.pose) || !o.linear_velocity.allFinite() || !std::isfinite(o.angular_velocity))
      throw SimulationError("non-finite state for object " + std::to_string(o.id));
}

inline std::vector<Body> make_bodies(const SceneState& s, const PhysicsConfig& cfg) {
  std::vector<Body> bodies;
  bodies.reserve(s.objects.size() + 1);
  for (const auto& o : s.objects) {
    Body b;
    b.id = o.id;
    b.shape = o.shape;
    b.p = o.pose.position();
    b.theta = o.pose.theta;
    b.v = o.linear_velocity;
    b.w = o.angular_velocity;
    b.inv_mass = 1.0 / o.mass;
    b.inv_inertia = 1.0 / shape_inertia(o.shape, o.mass);
    b.bound = bounding_radius(o.shape);
    bodies.push_back(b);
  }
  Body robot;
  robot.id = kRobotId;
  robot.shape = Disc{cfg.robot_radius};
  robot.p = s.robot.pose.position();
  robot.theta = s.robot.pose.theta;
  robot.v = s.robot.velocity;
  robot.bound = cfg.robot_radius;
  bodies.push_back(robot);
  return bodies;
}

inline int report_id(const std::vector<Body>& bodies, int idx) {
  return idx >= 0 ? bodies[idx].id : wall_report_id(-idx - 1);
}

}  // namespace detail

inline Vec2 clamp_norm(const Vec2& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec2(v * (limit / n)) : v;
}

/// Advances the world by one control step.
inline std::pair<SceneState, StepReport> step(const SceneState& state, const RobotAction& action,
                                              const PhysicsConfig& cfg,
                                              const std::optional<DisplacementFilter>& filter = std::nullopt) {
  detail::check_finite(state, action);
  const double dt = cfg.dt;

  auto bodies = detail::make_bodies(state, cfg);
  detail::Body& robot = bodies.back();
  robot.v = clamp_norm(action.velocity + action.acceleration * dt, cfg.v_max);
  robot.w = 0.0;

  const double decel = cfg.floor_friction_mu * kGravity * dt;
  for (std::size_t i = 0; i + 1 < bodies.size(); ++i) {
    auto& b = bodies[i];
    const double speed = b.v.norm();
    b.v = speed > 0.0 ? Vec2(b.v * std::max(0.0, 1.0 - decel / speed)) : Vec2::Zero();
    // Spin decays as if the friction acted at half the bounding radius.
    const double spin = std::abs(b.w) * 0.5 * b.bound;
    b.w = spin > 0.0 ? b.w * std::max(0.0, 1.0 - decel / spin) : 0.0;
  }

  const auto manifolds = detail::find_contacts(bodies, state.workspace);
  detail::solve_velocities(bodies, manifolds, cfg);

  for (auto& b : bodies) {
    b.p += b.v * dt;
    b.theta = wrap_angle(b.theta + b.w * dt);
  }
  detail::confine_robot(robot, state.workspace, cfg.robot_radius);
  detail::project_positions(bodies, state.workspace, cfg);

  SceneState next = state;
  next.time = state.time + dt;
  for (std::size_t i = 0; i < next.objects.size(); ++i) {
    auto& o = next.objects[i];
    const auto& b = bodies[i];
    o.pose = {b.p.x(), b.p.y(), b.theta};
    o.linear_velocity = b.v;
    o.angular_velocity = b.w;
  }
  next.robot.pose = {robot.p.x(), robot.p.y(), state.robot.pose.theta};
  next.robot.velocity = robot.v;
  detail::check_finite(next, action);

  StepReport report;
  report.contacts.reserve(manifolds.size());
  for (const auto& m : manifolds)
    for (int k = 0; k < m.count; ++k)
      report.contacts.push_back({detail::report_id(bodies, m.a), detail::report_id(bodies, m.b), m.points[k].point,
                                 m.normal, m.points[k].depth});
  if (filter) {
    for (std::size_t i = 0; i < next.objects.size(); ++i) {
      const auto& o = next.objects[i];
      if (o.id == filter->target_id) continue;
      if (pose_distance(o.pose, state.objects[i].pose, filter->angular_weight) > filter->epsilon)
        report.displaced_non_target_ids.push_back(o.id);
    }
    std::sort(report.displaced_non_target_ids.begin(), report.displaced_non_target_ids.end());
  }
  return {std::move(next), std::move(report)};
}

/// Deep copy; SceneState owns all of its data.
inline SceneState clone_state(const SceneState& state) { return state; }

struct Rollout {
  std::vector<SceneState> states;
  std::vector<StepReport> reports;
};

/// Folds step() over an action sequence. The failing step index is
/// attached to any SimulationError.
inline Rollout rollout(const SceneState& state, std::span<const RobotAction> actions, const PhysicsConfig& cfg,
                       const std::optional<DisplacementFilter>& filter = std::nullopt) {
  if (actions.empty()) throw InvalidArgument("rollout needs at least one action");
  Rollout out;
  out.states.reserve(actions.size());
  out.reports.reserve(actions.size());
  const SceneState* cur = &state;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    try {
      auto [next, report] = step(*cur, actions[k], cfg, filter);
      out.states.push_back(std::move(next));
      out.reports.push_back(std::move(report));
    } catch (const SimulationError& e) {
      throw SimulationError(std::string(e.what()) + " at rollout step " + std::to_string(k), static_cast<int>(k));
    }
    cur = &out.states.back();
  }
  return out;
}

inline double kinetic_energy(const SceneState& s) {
  double e = 0.0;
  for (const auto& o : s.objects)
    e += 0.5 * o.mass * o.linear_velocity.squaredNorm() +
         0.5 * shape_inertia(o.shape, o.mass) * o.angular_velocity * o.angular_velocity;
  return e;
}

/// Deepest overlap among all body pairs and walls, robot included.
inline double max_penetration(const SceneState& s, const PhysicsConfig& cfg) {
  const auto bodies = detail::make_bodies(s, cfg);
  double worst = 0.0;
  for (const auto& m : detail::find_contacts(bodies, s.workspace)) worst = std::max(worst, m.max_depth());
  return worst;
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_PHYSICS_HPP_
