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

// rmpc_push command-line tool: gen, run, eval, replay.
//
// Settings are layered: built-in defaults, then the file named by
// RMPC_PUSH_CONFIG, then --config, then individual flags and --set.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmpc_push/rmpc_push.hpp"

namespace fs = std::filesystem;
using namespace rmpc_push;

namespace {

struct SettingFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> planner;
  std::optional<int> samples_K;
  std::optional<int> horizon_H;
  std::optional<double> gamma;
  std::optional<double> dt;
  std::vector<double> weight_range;
  std::vector<std::string> sets;
};

void add_setting_flags(CLI::App* app, SettingFlags& f, bool with_planner) {
  app->add_option("--config", f.config_path, "key=value settings file");
  app->add_option("--seed", f.seed, "base seed");
  if (with_planner) {
    app->add_option("--planner", f.planner, "rmpc, rmp, mpc, open_loop or direct");
    app->add_option("--samples-K", f.samples_K, "sampled candidates per plan")->check(CLI::PositiveNumber);
    app->add_option("--horizon-H", f.horizon_H, "rollout horizon in steps")->check(CLI::PositiveNumber);
    app->add_option("--gamma", f.gamma, "reward discount");
    app->add_option("--weight-range", f.weight_range, "node weight range lo,hi")->delimiter(',')->expected(2);
  }
  app->add_option("--dt", f.dt, "control period in seconds");
  app->add_option("--set", f.sets, "override one setting, key=value (repeatable)");
}

Settings resolve_settings(const SettingFlags& f) {
  Settings s;
  if (const char* env = std::getenv("RMPC_PUSH_CONFIG"); env != nullptr && *env != '\0')
    apply_config_text(s, read_text_file(env), env);
  if (!f.config_path.empty()) apply_config_text(s, read_text_file(f.config_path), f.config_path);
  if (f.seed) s.planner.seed = *f.seed;
  if (f.planner) set_value(s, "planner.kind", *f.planner);
  if (f.samples_K) s.planner.samples_K = *f.samples_K;
  if (f.horizon_H) s.planner.horizon_H = *f.horizon_H;
  if (f.gamma) s.reward.gamma = *f.gamma;
  if (f.dt) s.physics.dt = *f.dt;
  if (!f.weight_range.empty()) {
    s.planner.weight_low = f.weight_range[0];
    s.planner.weight_high = f.weight_range[1];
  }
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_value(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate(s);
  return s;
}

std::string scene_id_of(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_gen(const Settings& s, std::uint64_t base_seed, int n, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<ManifestEntry> manifest;
  const SceneGenConfig cfg = s.scenegen_config();
  char name[64];
  for (int i = 0; i < n; ++i) {
    const SceneGenConfig member = batch_member(cfg, base_seed, i);
    const auto g = generate_scene(member);
    std::snprintf(name, sizeof name, "scene_%05d.txt", i);
    save_scene(g.state, g.task, (fs::path(out_dir) / name).string());
    manifest.push_back({name, member.seed});
  }
  write_text_file((fs::path(out_dir) / "manifest.txt").string(), serialize_manifest(manifest));
  std::cerr << "wrote " << n << " scenes to " << out_dir << "\n";
  return 0;
}

int cmd_run(const Settings& s, const std::string& scene_path, std::uint64_t scene_seed, const std::string& traj_out,
            double mass_scale) {
  const SceneFile f = load_scene(scene_path);
  const SceneCase sc{scene_id_of(scene_path), f.state, f.task, scene_seed};
  const EpisodeLog log = run_episode(sc, s, s.eval.max_steps, {mass_scale});
  if (!traj_out.empty()) write_text_file(traj_out, trajectory_csv(log, f.state, s, f.task, {mass_scale}));
  if (log.failed) std::cerr << "planner failure: " << log.failure_reason << "\n";
  std::printf("success=%s steps=%d collision_ratio=%s\n", log.success ? "true" : "false", log.steps_taken,
              format_g9(log.collision_ratio).c_str());
  return log.failed ? 1 : 0;
}

int cmd_eval(const Settings& s, const std::string& manifest_path, const std::vector<std::string>& planner_names,
             const std::string& out_dir, int workers, double mass_scale, const std::string& traj_dir) {
  const auto entries = parse_manifest(read_text_file(manifest_path));
  if (entries.empty()) throw InvalidArgument("manifest lists no scenes");
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<SceneCase> scenes;
  for (const auto& e : entries) {
    const fs::path p = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
    const SceneFile f = load_scene(p.string());
    scenes.push_back({scene_id_of(e.path), f.state, f.task, e.seed});
  }
  std::vector<PlannerKind> planners;
  for (const auto& n : planner_names) planners.push_back(parse_planner_kind(n));

  const auto progress = [](std::size_t done, std::size_t total) {
    std::fprintf(stderr, "\repisodes %zu/%zu", done, total);
    if (done == total) std::fputc('\n', stderr);
  };
  const Comparison c = compare_planners(scenes, planners, s, workers, {mass_scale}, progress);

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "episodes.csv").string(), episodes_csv(c));
  write_text_file((fs::path(out_dir) / "recall.csv").string(), recall_csv(c));
  write_text_file((fs::path(out_dir) / "summary.csv").string(), summary_csv(c));
  if (!traj_dir.empty()) {
    fs::create_directories(traj_dir);
    for (std::size_t p = 0; p < planners.size(); ++p) {
      Settings ps = s;
      ps.planner.kind = planners[p];
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto& log = c.logs[p * scenes.size() + i];
        const std::string name = std::string(to_string(planners[p])) + "_" + scenes[i].id + ".csv";
        write_text_file((fs::path(traj_dir) / name).string(), trajectory_csv(log, scenes[i].state, ps, scenes[i].task, {mass_scale}));
      }
    }
  }

  int ok = 0, failed = 0;
  for (const auto& log : c.logs) (log.failed ? failed : ok)++;
  for (const auto& sm : c.summaries)
    std::fprintf(stderr, "%-10s mean_ratio=%s success_rate=%s\n", std::string(to_string(sm.planner)).c_str(),
                 format_g9(sm.mean_collision_ratio).c_str(), format_g9(sm.success_rate).c_str());
  if (failed > 0) std::fprintf(stderr, "%d of %zu episodes failed\n", failed, c.logs.size());
  return ok > 0 ? 0 : 1;
}

int cmd_replay(const std::string& traj_path, const std::string& scene_path) {
  const TrajectoryFile traj = parse_trajectory_csv(read_text_file(traj_path));
  const SceneFile f = load_scene(scene_path);
  const ReplayResult r = replay(f.state, traj);
  if (r.match) {
    std::printf("match\n");
    return 0;
  }
  std::printf("diverged at step %d: %s\n", r.first_divergent_step, r.detail.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar pushing with Riemannian motion predictive control"};
  app.require_subcommand(1);

  SettingFlags gen_flags, run_flags, eval_flags;

  auto* gen = app.add_subcommand("gen", "generate a seeded scene batch and manifest");
  int gen_n = 0;
  std::string gen_out;
  gen->add_option("-n,--count", gen_n, "number of scenes")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  add_setting_flags(gen, gen_flags, false);

  auto* run = app.add_subcommand("run", "run one episode");
  std::string run_scene, run_traj;
  std::uint64_t run_scene_seed = 0;
  double run_mass_scale = 1.0;
  run->add_option("scene", run_scene, "scene file")->required();
  run->add_option("-t,--trajectory-out", run_traj, "step-level trajectory CSV");
  run->add_option("--scene-seed", run_scene_seed, "per-scene seed mixed into the planner seed");
  run->add_option("--target-mass-scale", run_mass_scale, "scales the executing world's target mass")
      ->check(CLI::PositiveNumber);
  add_setting_flags(run, run_flags, true);

  auto* eval = app.add_subcommand("eval", "evaluate planners on a manifest");
  std::string eval_manifest, eval_out, eval_traj;
  std::vector<std::string> eval_planners{"rmpc", "rmp", "mpc", "open_loop", "direct"};
  int workers = 0;
  double eval_mass_scale = 1.0;
  eval->add_option("manifest", eval_manifest, "manifest file")->required();
  eval->add_option("-o,--out", eval_out, "output directory")->required();
  eval->add_option("--planners", eval_planners, "comma-separated planner list")->delimiter(',');
  eval->add_option("--workers", workers, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  eval->add_option("--target-mass-scale", eval_mass_scale, "scales the executing world's target mass")
      ->check(CLI::PositiveNumber);
  eval->add_option("--trajectory-dir", eval_traj, "also write one trajectory CSV per episode");
  add_setting_flags(eval, eval_flags, true);

  auto* rep = app.add_subcommand("replay", "re-simulate a trajectory CSV against its scene");
  std::string rep_traj, rep_scene;
  rep->add_option("trajectory", rep_traj, "trajectory CSV")->required();
  rep->add_option("scene", rep_scene, "scene file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Settings s = resolve_settings(gen_flags);
      return cmd_gen(s, gen_flags.seed.value_or(0), gen_n, gen_out);
    }
    if (*run) return cmd_run(resolve_settings(run_flags), run_scene, run_scene_seed, run_traj, run_mass_scale);
    if (*eval)
      return cmd_eval(resolve_settings(eval_flags), eval_manifest, eval_planners, eval_out, workers, eval_mass_scale,
                      eval_traj);
    if (*rep) return cmd_replay(rep_traj, rep_scene);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
