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

// Line-oriented scene files.
//
//   # comment                       (blank lines and '#' lines are ignored)
//   workspace <w> <h>               rectangle of size w x h centred on the origin
//   robot <x> <y> <theta>
//   task <target_id> <gx> <gy> <tol>
//   <id> disc <radius> <x> <y> <theta> <mass>
//   <id> box <width> <length> <x> <y> <theta> <mass>
//
// workspace, robot and task must each appear exactly once; object records
// follow in scene order. Numbers are written with 9 significant digits, so
// a scene whose values already have at most 9 significant digits survives
// save/load bit-exactly. Loaded scenes start at rest at time 0.

#ifndef RMPC_PUSH_SCENE_IO_HPP_
#define RMPC_PUSH_SCENE_IO_HPP_

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmpc_push/core.hpp"

namespace rmpc_push {

/// Malformed input; carries 1-based line and column.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed input describing an invalid scene.
class SceneSemanticError : public std::runtime_error {
 public:
  enum class Kind { kDuplicateId, kOutsideWorkspace, kMissingTarget, kInvalidValue };
  SceneSemanticError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline std::string format_g9(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
  return {buf, static_cast<std::size_t>(n)};
}

inline std::string format_g17(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(n)};
}

/// Rounds to the nearest value representable with 9 significant digits.
inline double quantize9(double v) { return std::stod(format_g9(v)); }

struct SceneFile {
  SceneState state;
  PushTask task;
  bool operator==(const SceneFile&) const = default;
};

inline std::string serialize_scene(const SceneState& s, const PushTask& task) {
  std::string out;
  auto num = [&](double v) {
    out += ' ';
    out += format_g9(v);
  };
  out += "# rmpc_push scene\n";
  out += "workspace";
  num(s.workspace.width());
  num(s.workspace.height());
  out += "\nrobot";
  num(s.robot.pose.x);
  num(s.robot.pose.y);
  num(s.robot.pose.theta);
  out += "\ntask " + std::to_string(task.target_id);
  num(task.goal.x());
  num(task.goal.y());
  num(task.goal_tolerance);
  out += '\n';
  for (const auto& o : s.objects) {
    out += std::to_string(o.id);
    if (const auto* d = std::get_if<Disc>(&o.shape)) {
      out += " disc";
      num(d->radius);
    } else {
      const auto& b = std::get<Box>(o.shape);
      out += " box";
      num(b.width);
      num(b.length);
    }
    num(o.pose.x);
    num(o.pose.y);
    num(o.pose.theta);
    num(o.mass);
    out += '\n';
  }
  return out;
}

namespace detail {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

inline double parse_number(const Token& t, int line) {
  double v = 0.0;
  const auto* first = t.text.data();
  const auto* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, t.column, "expected a number, got '" + std::string(t.text) + "'");
  if (!std::isfinite(v)) throw ParseError(line, t.column, "non-finite number");
  return v;
}

inline int parse_int(const Token& t, int line) {
  int v = 0;
  const auto* first = t.text.data();
  const auto* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, t.column, "expected an integer, got '" + std::string(t.text) + "'");
  return v;
}

inline void expect_count(const std::vector<Token>& toks, std::size_t n, int line, std::string_view what) {
  if (toks.size() < n) {
    const int col = toks.empty() ? 1 : toks.back().column + static_cast<int>(toks.back().text.size());
    throw ParseError(line, col, std::string(what) + " record needs " + std::to_string(n - 1) + " fields");
  }
  if (toks.size() > n) throw ParseError(line, toks[n].column, "unexpected trailing field in " + std::string(what) + " record");
}

}  // namespace detail

inline SceneFile parse_scene(std::string_view text) {
  SceneFile f;
  bool have_ws = false, have_robot = false, have_task = false;
  int line_no = 0;
  int last_line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    const auto toks = detail::tokenize(line);
    if (toks.empty() || toks[0].text.front() == '#') continue;
    last_line = line_no;
    const auto& head = toks[0];
    if (head.text == "workspace") {
      if (have_ws) throw ParseError(line_no, head.column, "duplicate workspace record");
      detail::expect_count(toks, 3, line_no, "workspace");
      const double w = detail::parse_number(toks[1], line_no), h = detail::parse_number(toks[2], line_no);
      if (!(w > 0.0)) throw ParseError(line_no, toks[1].column, "workspace width must be positive");
      if (!(h > 0.0)) throw ParseError(line_no, toks[2].column, "workspace height must be positive");
      f.state.workspace = Workspace::centered(w, h);
      have_ws = true;
    } else if (head.text == "robot") {
      if (have_robot) throw ParseError(line_no, head.column, "duplicate robot record");
      detail::expect_count(toks, 4, line_no, "robot");
      f.state.robot.pose = {detail::parse_number(toks[1], line_no), detail::parse_number(toks[2], line_no),
                            detail::parse_number(toks[3], line_no)};
      have_robot = true;
    } else if (head.text == "task") {
      if (have_task) throw ParseError(line_no, head.column, "duplicate task record");
      detail::expect_count(toks, 5, line_no, "task");
      f.task.target_id = detail::parse_int(toks[1], line_no);
      f.task.goal = {detail::parse_number(toks[2], line_no), detail::parse_number(toks[3], line_no)};
      f.task.goal_tolerance = detail::parse_number(toks[4], line_no);
      if (!(f.task.goal_tolerance > 0.0)) throw ParseError(line_no, toks[4].column, "goal tolerance must be positive");
      have_task = true;
    } else {
      ObjectState o;
      o.id = detail::parse_int(head, line_no);
      if (toks.size() < 2) throw ParseError(line_no, head.column + static_cast<int>(head.text.size()), "missing shape kind");
      std::size_t i = 2;
      if (toks[1].text == "disc") {
        detail::expect_count(toks, 7, line_no, "disc");
        const double r = detail::parse_number(toks[i++], line_no);
        if (!(r > 0.0)) throw ParseError(line_no, toks[2].column, "radius must be positive");
        o.shape = Disc{r};
      } else if (toks[1].text == "box") {
        detail::expect_count(toks, 8, line_no, "box");
        const double w = detail::parse_number(toks[i++], line_no);
        const double l = detail::parse_number(toks[i++], line_no);
        if (!(w > 0.0)) throw ParseError(line_no, toks[2].column, "width must be positive");
        if (!(l > 0.0)) throw ParseError(line_no, toks[3].column, "length must be positive");
        o.shape = Box{w, l};
      } else {
        throw ParseError(line_no, toks[1].column, "unknown shape kind '" + std::string(toks[1].text) + "'");
      }
      o.pose.x = detail::parse_number(toks[i], line_no);
      o.pose.y = detail::parse_number(toks[i + 1], line_no);
      o.pose.theta = detail::parse_number(toks[i + 2], line_no);
      o.mass = detail::parse_number(toks[i + 3], line_no);
      if (!(o.mass > 0.0)) throw ParseError(line_no, toks[i + 3].column, "mass must be positive");
      f.state.objects.push_back(o);
    }
  }
  const int end_line = std::max(1, last_line + (last_line > 0 ? 1 : 0));
  if (!have_ws) throw ParseError(last_line == 0 ? 1 : end_line, 1, "missing workspace record");
  if (!have_robot) throw ParseError(end_line, 1, "missing robot record");
  if (!have_task) throw ParseError(end_line, 1, "missing task record");

  const auto& s = f.state;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (s.objects[j].id == s.objects[i].id)
        throw SceneSemanticError(SceneSemanticError::Kind::kDuplicateId,
                                 "duplicate object id " + std::to_string(s.objects[i].id));
    if (!s.workspace.contains(s.objects[i].pose.position()))
      throw SceneSemanticError(SceneSemanticError::Kind::kOutsideWorkspace,
                               "object " + std::to_string(s.objects[i].id) + " lies outside the workspace");
  }
  if (!s.workspace.contains(s.robot.pose.position()))
    throw SceneSemanticError(SceneSemanticError::Kind::kOutsideWorkspace, "robot lies outside the workspace");
  if (s.find(f.task.target_id) == nullptr)
    throw SceneSemanticError(SceneSemanticError::Kind::kMissingTarget,
                             "task target " + std::to_string(f.task.target_id) + " is not an object in the scene");
  if (!s.workspace.contains(f.task.goal))
    throw SceneSemanticError(SceneSemanticError::Kind::kOutsideWorkspace, "goal lies outside the workspace");
  return f;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing '" + path + "'");
}

inline SceneFile load_scene(const std::string& path) { return parse_scene(read_text_file(path)); }

inline void save_scene(const SceneState& s, const PushTask& task, const std::string& path) {
  write_text_file(path, serialize_scene(s, task));
}

}  // namespace rmpc_push

#endif  // RMPC_PUSH_SCENE_IO_HPP_
