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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rmpc_push/eval.hpp"
#include "test_scenes.hpp"

namespace rmpc_push {
namespace {

std::vector<double> ratios_of(std::initializer_list<double> r) { return r; }

TEST(Recall, CountingExamples) {
  const auto r = ratios_of({0.0, 0.1, 0.5});
  EXPECT_DOUBLE_EQ(recall_at_k(std::span<const double>(r), 0.2), 2.0 / 3.0);
  const auto zeros = ratios_of({0.0, 0.0, 0.0});
  for (double k : {0.0, 0.3, 1.0}) EXPECT_EQ(recall_at_k(std::span<const double>(zeros), k), 1.0);
  const std::vector<double> empty;
  EXPECT_THROW(recall_at_k(std::span<const double>(empty), 0.5), InvalidArgument);
}

TEST(Recall, CurveExampleAndGridOrder) {
  const auto r = ratios_of({0.3});
  const std::vector<double> grid{0.1, 0.3, 0.5};
  const auto c = recall_curve(std::span<const double>(r), grid);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].recall, 0.0);
  EXPECT_EQ(c[1].recall, 1.0);
  EXPECT_EQ(c[2].recall, 1.0);
  const std::vector<double> unsorted{0.5, 0.1};
  EXPECT_THROW(recall_curve(std::span<const double>(r), unsorted), InvalidArgument);
}

TEST(Recall, MonotoneAndOneAtFullRatio) {
  Rng rng(5);
  const auto grid = default_k_grid();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(rng.uniform_int(1, 40));
    for (auto& x : r) x = rng.uniform(0.0, 1.0) < 0.2 ? 0.0 : rng.uniform(0.0, 1.0);
    const auto c = recall_curve(std::span<const double>(r), grid);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i].recall, c[i - 1].recall);
    EXPECT_EQ(recall_at_k(std::span<const double>(r), 1.0), 1.0);

    // Dropping an episode above k never lowers recall at k.
    const double k = rng.uniform(0.0, 1.0);
    const auto above = std::find_if(r.begin(), r.end(), [k](double x) { return x > k; });
    if (above != r.end() && r.size() > 1) {
      const double before = recall_at_k(std::span<const double>(r), k);
      r.erase(above);
      EXPECT_GE(recall_at_k(std::span<const double>(r), k), before);
    }
  }
}

TEST(Recall, SkipsEpisodesWithoutSteps) {
  std::vector<EpisodeLog> logs(3);
  logs[0].steps_taken = 10;
  logs[0].collision_ratio = 0.0;
  logs[0].success = true;
  logs[1].steps_taken = 10;
  logs[1].collision_ratio = 0.5;
  logs[2].steps_taken = 0;  // failed before acting
  logs[2].failed = true;
  EXPECT_EQ(collision_ratios(logs).size(), 2u);
  EXPECT_DOUBLE_EQ(recall_at_k(std::span<const EpisodeLog>(logs), 0.1), 0.5);
  EXPECT_EQ(collision_ratios(logs, true), std::vector<double>{0.0});
}

Settings fast_settings() {
  Settings s;
  s.planner.samples_K = 4;
  s.planner.horizon_H = 8;
  s.eval.max_steps = 60;
  return s;
}

TEST(RunEpisode, StartAtGoalTakesOneStep) {
  PushTask task;
  SceneState s = testing::target_only_scene(&task);
  task.goal = s.objects[0].pose.position() + Vec2(0.01, 0.0);
  for (auto kind : {PlannerKind::kRmpc, PlannerKind::kRmp, PlannerKind::kMpc, PlannerKind::kDirect}) {
    Settings settings = fast_settings();
    settings.planner.kind = kind;
    const EpisodeLog log = run_episode({"at_goal", s, task, 3}, settings, 400);
    EXPECT_TRUE(log.success) << to_string(kind);
    EXPECT_EQ(log.steps_taken, 1);
    EXPECT_EQ(log.collision_ratio, static_cast<double>(log.collision_events));
  }
  EXPECT_THROW(run_episode({"at_goal", s, task, 3}, fast_settings(), 0), InvalidArgument);
}

TEST(RunEpisode, LogInvariants) {
  const Settings settings = fast_settings();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = testing::generated_case(seed);
    const EpisodeLog log = run_episode(c, settings, settings.eval.max_steps);
    ASSERT_FALSE(log.failed) << log.failure_reason;
    ASSERT_GE(log.steps_taken, 1);
    EXPECT_EQ(log.steps_taken, static_cast<int>(log.steps.size()));
    int events = 0;
    for (const auto& r : log.steps) events += r.reward.collision_event;
    EXPECT_EQ(log.collision_events, events);
    EXPECT_DOUBLE_EQ(log.collision_ratio, static_cast<double>(events) / log.steps_taken);
    EXPECT_EQ(log.success, log.final_distance <= c.task.goal_tolerance);
    EXPECT_EQ(log.final_distance, target_goal_distance(log.steps.back().state, c.task));
    EXPECT_EQ(log.config_hash, config_hash(settings));
    if (!log.success) {
      EXPECT_EQ(log.steps_taken, settings.eval.max_steps);
    }
  }
}

TEST(RunEpisode, DirectCollidesInCorridor) {
  PushTask task;
  const SceneState s = testing::corridor_scene(&task);
  Settings settings;
  settings.planner.kind = PlannerKind::kDirect;
  const EpisodeLog log = run_episode({"corridor", s, task, 1}, settings, 200);
  EXPECT_GE(log.collision_events, 1);
}

TEST(RunEpisode, IdenticalInputsGiveIdenticalLogs) {
  const auto c = testing::generated_case(21);
  for (auto kind : {PlannerKind::kRmpc, PlannerKind::kMpc}) {
    Settings settings = fast_settings();
    settings.planner.kind = kind;
    const EpisodeLog a = run_episode(c, settings, 40), b = run_episode(c, settings, 40);
    EXPECT_EQ(trajectory_csv(a, c.state, settings), trajectory_csv(b, c.state, settings));
  }
}

TEST(RunEpisode, PlannerFailureIsRecorded) {
  PushTask task;
  const SceneState s = testing::target_only_scene(&task);
  Settings settings;
  settings.planner.kind = PlannerKind::kOpenLoop;
  const EpisodeLog log = run_episode({"short", s, task, 1}, settings, 3);
  EXPECT_TRUE(log.failed);
  EXPECT_FALSE(log.failure_reason.empty());
  EXPECT_EQ(log.steps_taken, 0);
  EXPECT_FALSE(log.success);
  EXPECT_FALSE(log.has_trajectory());
}

TEST(Summarize, UnscoredPlannerKeepsItsRows) {
  std::vector<EpisodeLog> logs(2);
  for (auto& l : logs) l.failed = true;
  const auto grid = default_k_grid();
  const PlannerSummary s = summarize(PlannerKind::kOpenLoop, logs, grid);
  EXPECT_EQ(s.scored, 0);
  ASSERT_EQ(s.recall.size(), grid.size());
  EXPECT_TRUE(std::isnan(s.recall[0].recall));
  EXPECT_TRUE(s.recall_success.empty());
}

TEST(Replay, InMemoryAndCsvRoundTrip) {
  const Settings settings = fast_settings();
  const auto c = testing::generated_case(8);
  const EpisodeLog log = run_episode(c, settings, 40);
  EXPECT_TRUE(replay(c.state, log, settings.physics).match);
  const std::string csv = trajectory_csv(log, c.state, settings);
  const TrajectoryFile f = parse_trajectory_csv(csv);
  EXPECT_EQ(f.scene_id, c.id);
  EXPECT_EQ(echo(f.settings), echo(settings));
  EXPECT_EQ(f.actions.size(), log.steps.size());
  for (std::size_t k = 0; k < f.actions.size(); ++k) EXPECT_EQ(f.actions[k], log.steps[k].action);
  EXPECT_TRUE(replay(c.state, f).match);
}

TEST(Replay, DetectsEditsAndWrongScenes) {
  const Settings settings = fast_settings();
  const auto c = testing::generated_case(8);
  const EpisodeLog log = run_episode(c, settings, 40);
  TrajectoryFile f = parse_trajectory_csv(trajectory_csv(log, c.state, settings));
  TrajectoryFile edited = f;
  edited.actions[5].velocity.x() += 1e-3;
  const ReplayResult r = replay(c.state, edited);
  EXPECT_FALSE(r.match);
  EXPECT_EQ(r.first_divergent_step, 6);

  EpisodeLog bad = log;
  bad.steps[2].state.robot.pose.x += 1e-12;
  EXPECT_EQ(replay(c.state, bad, settings.physics).first_divergent_step, 3);

  const auto other = testing::generated_case(9);
  const ReplayResult w = replay(other.state, f);
  EXPECT_FALSE(w.match);
  EXPECT_EQ(w.first_divergent_step, 1);
}

TEST(Replay, PerturbedWorldRoundTrips) {
  const Settings settings = fast_settings();
  const auto c = testing::generated_case(8);
  const WorldPerturbation heavy{2.0};
  const EpisodeLog log = run_episode(c, settings, 40, heavy);
  const TrajectoryFile f = parse_trajectory_csv(trajectory_csv(log, c.state, settings, c.task, heavy));
  EXPECT_EQ(f.perturb.target_mass_scale, 2.0);
  EXPECT_TRUE(replay(c.state, f).match);
}

TEST(Replay, MalformedFiles) {
  EXPECT_THROW(parse_trajectory_csv(""), ParseError);
  EXPECT_THROW(parse_trajectory_csv("# only comments\n"), ParseError);
  const Settings settings = fast_settings();
  const auto c = testing::generated_case(8);
  std::string csv = trajectory_csv(run_episode(c, settings, 5), c.state, settings);
  csv += "99,1,2\n";
  EXPECT_THROW(parse_trajectory_csv(csv), ParseError);
}

TEST(ComparePlanners, SharedScenesAndDeterministicOutput) {
  Settings settings = fast_settings();
  settings.eval.max_steps = 30;
  std::vector<SceneCase> scenes;
  for (std::uint64_t seed = 0; seed < 6; ++seed) scenes.push_back(testing::generated_case(seed));
  const std::vector<PlannerKind> planners{PlannerKind::kRmp, PlannerKind::kRmp, PlannerKind::kRmpc};
  const Comparison a = compare_planners(scenes, planners, settings, 1);
  const Comparison b = compare_planners(scenes, planners, settings, 4);
  EXPECT_EQ(episodes_csv(a), episodes_csv(b));
  EXPECT_EQ(recall_csv(a), recall_csv(b));
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  ASSERT_EQ(a.summaries.size(), 3u);
  EXPECT_EQ(a.summaries[0].mean_collision_ratio, a.summaries[1].mean_collision_ratio);
  EXPECT_EQ(a.summaries[0].success_rate, a.summaries[1].success_rate);
  for (std::size_t i = 0; i < scenes.size(); ++i)
    EXPECT_EQ(a.logs_for(0)[i].steps_taken, a.logs_for(1)[i].steps_taken);
  EXPECT_EQ(a.summaries[0].recall.size(), default_k_grid().size());
  const std::string summary = summary_csv(a);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 4);
}

TEST(ComparePlanners, EmptyInputsAreErrors) {
  const std::vector<SceneCase> none;
  const std::vector<PlannerKind> planners{PlannerKind::kRmp};
  EXPECT_THROW(compare_planners(none, planners, Settings{}), InvalidArgument);
  const std::vector<SceneCase> one{testing::generated_case(0)};
  EXPECT_THROW(compare_planners(one, std::vector<PlannerKind>{}, Settings{}), InvalidArgument);
}

TEST(ComparePlanners, ProgressReachesTotal) {
  Settings settings = fast_settings();
  settings.eval.max_steps = 5;
  const std::vector<SceneCase> scenes{testing::generated_case(0), testing::generated_case(1)};
  const std::vector<PlannerKind> planners{PlannerKind::kRmp, PlannerKind::kDirect};
  std::size_t last = 0, calls = 0;
  compare_planners(scenes, planners, settings, 2, {}, [&](std::size_t done, std::size_t total) {
    EXPECT_EQ(total, 4u);
    last = std::max(last, done);
    ++calls;
  });
  EXPECT_EQ(last, 4u);
  EXPECT_EQ(calls, 4u);
}

}  // namespace
}  // namespace rmpc_push
