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

#ifndef RMPC_PUSH_SCENEGEN_HPP_
#define RMPC_PUSH_SCENEGEN_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmpc_push/core.hpp"
#include "rmpc_push/random.hpp"
#include "rmpc_push/scene_io.hpp"

namespace rmpc_push {

struct ShapeSpec {
  Shape shape;
  double mass = 0.0;
};

/// Tabletop-object footprints between 4 and 12 cm.
inline std::vector<ShapeSpec> default_shape_catalog() {
  return {
      {Disc{0.020}, 0.15}, {Disc{0.035}, 0.30},     {Disc{0.050}, 0.50},     {Disc{0.060}, 0.70},
      {Box{0.04, 0.08}, 0.20}, {Box{0.06, 0.10}, 0.35}, {Box{0.08, 0.12}, 0.55}, {Box{0.12, 0.12}, 0.80},
  };
}

struct SceneGenConfig {
  int min_objects = 8;
  int max_objects = 14;
  std::vector<ShapeSpec> catalog = default_shape_catalog();
  Workspace workspace = Workspace::centered(2.0, 2.0);
  double min_clearance = 0.05;
  std::uint64_t seed = 0;
  double goal_tolerance = 0.05;
  double min_goal_distance = 0.3;
  double robot_radius = 0.05;
  int attempt_budget = 10000;
};

inline void validate(const SceneGenConfig& c) {
  if (c.min_objects < 2) throw InvalidArgument("scenes need at least 2 objects");
  if (c.max_objects < c.min_objects) throw InvalidArgument("max_objects < min_objects");
  if (c.catalog.empty()) throw InvalidArgument("shape catalog is empty");
  if (!(c.min_clearance >= 0.0)) throw InvalidArgument("min_clearance must be >= 0");
}

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedScene {
  SceneState state;
  PushTask task;
  std::vector<int> catalog_index;  // per object, scene order
};

/// Rejection-sampled scene. Clearances are measured between bounding
/// circles, so they are conservative for boxes. All numbers are rounded to
/// 9 significant digits so the scene file reproduces it exactly.
inline GeneratedScene generate_scene(const SceneGenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  GeneratedScene g;
  SceneState& s = g.state;
  s.workspace = cfg.workspace;
  const Workspace& ws = cfg.workspace;
  int attempts = 0;
  auto spend = [&]() {
    if (++attempts > cfg.attempt_budget)
      throw PlacementError("scene placement failed after " + std::to_string(cfg.attempt_budget) +
                           " attempts (seed " + std::to_string(cfg.seed) + ")");
  };
  auto wall_gap = [&](const Vec2& p, double r) {
    return std::min({p.x() - r - ws.min_x, ws.max_x - p.x() - r, p.y() - r - ws.min_y, ws.max_y - p.y() - r});
  };

  const int n = rng.uniform_int(cfg.min_objects, cfg.max_objects);
  for (int i = 0; i < n; ++i) {
    const int ci = rng.uniform_int(0, static_cast<int>(cfg.catalog.size()) - 1);
    const auto& spec = cfg.catalog[ci];
    const double r = bounding_radius(spec.shape);
    while (true) {
      spend();
      ObjectState o;
      o.id = i + 1;
      o.shape = spec.shape;
      o.mass = spec.mass;
      o.pose = {quantize9(rng.uniform(ws.min_x, ws.max_x)), quantize9(rng.uniform(ws.min_y, ws.max_y)),
                quantize9(rng.uniform(-3.14159, 3.14159))};
      const Vec2 p = o.pose.position();
      if (wall_gap(p, r) < cfg.min_clearance) continue;
      bool ok = true;
      for (const auto& other : s.objects)
        if ((p - other.pose.position()).norm() - r - bounding_radius(other.shape) < cfg.min_clearance) {
          ok = false;
          break;
        }
      if (!ok) continue;
      s.objects.push_back(o);
      g.catalog_index.push_back(ci);
      break;
    }
  }

  while (true) {
    spend();
    const Vec2 p(quantize9(rng.uniform(ws.min_x, ws.max_x)), quantize9(rng.uniform(ws.min_y, ws.max_y)));
    if (wall_gap(p, cfg.robot_radius) < cfg.min_clearance) continue;
    bool ok = true;
    for (const auto& o : s.objects)
      if ((p - o.pose.position()).norm() - cfg.robot_radius - bounding_radius(o.shape) < cfg.min_clearance) {
        ok = false;
        break;
      }
    if (!ok) continue;
    s.robot.pose = {p.x(), p.y(), 0.0};
    break;
  }

  const int ti = rng.uniform_int(0, n - 1);
  const ObjectState& target = s.objects[ti];
  g.task.target_id = target.id;
  g.task.goal_tolerance = cfg.goal_tolerance;
  const double half = 0.5 * mean_extent(target);
  while (true) {
    spend();
    const Vec2 goal(quantize9(rng.uniform(ws.min_x, ws.max_x)), quantize9(rng.uniform(ws.min_y, ws.max_y)));
    if (wall_gap(goal, half) < 0.0) continue;
    if ((goal - target.pose.position()).norm() < cfg.min_goal_distance) continue;
    bool ok = true;
    for (const auto& o : s.objects) {
      if (o.id == target.id) continue;
      if ((goal - o.pose.position()).norm() - bounding_radius(o.shape) < half) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    g.task.goal = goal;
    break;
  }
  return g;
}

/// Scene i of a batch uses seed base_seed + i.
inline SceneGenConfig batch_member(SceneGenConfig cfg, std::uint64_t base_seed, int i) {
  cfg.seed = base_seed + static_cast<std::uint64_t>(i);
  return cfg;
}

struct ManifestEntry {
  std::string path;
  std::uint64_t seed = 0;
};

inline std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.path + " " + std::to_string(e.seed) + "\n";
  return out;
}

/// "path seed" per line; relative paths are kept as written.
inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const auto toks = detail::tokenize(line);
    if (toks.empty() || toks[0].text.front() == '#') continue;
    if (toks.size() != 2) throw ParseError(line_no, toks[0].column, "manifest lines are '<path> <seed>'");
    std::uint64_t seed = 0;
    const auto* first = toks[1].text.data();
    const auto* last = first + toks[1].text.size();
    auto [ptr, ec] = std::from_chars(first, last, seed);
    if (ec != std::errc() || ptr != last) throw ParseError(line_no, toks[1].column, "bad seed");
    out.push_back({std::string(toks[0].text), seed});
  }
  return out;
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_SCENEGEN_HPP_
