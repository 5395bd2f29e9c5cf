// Command-line front end: dataset generation, retargeting, training,
// evaluation, rollouts, and the scripted experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mimic/ams.hpp"
#include "mimic/clip_io.hpp"
#include "mimic/experiment.hpp"
#include "mimic/retarget.hpp"
#include "mimic/synthesize.hpp"
#include "mimic/trainer.hpp"

namespace fs = std::filesystem;
using namespace mimic;

namespace {

RobotModel load_model_or_default(const std::string& path) {
  return path.empty() ? RobotModel() : RobotModel::from_file(path);
}
SimConfig load_sim_or_default(const std::string& path) {
  return path.empty() ? SimConfig() : SimConfig::from_file(path);
}
EnvConfig load_env_or_default(const std::string& path) {
  return path.empty() ? EnvConfig() : EnvConfig::from_file(path);
}
PPOConfig load_ppo_or_default(const std::string& path) {
  return path.empty() ? PPOConfig() : PPOConfig::from_file(path);
}

// Dataset spec file: one line per clip group,
//   <type> <count> [speed=V] [yaw_rate=V] [duration=V] [fps=V]
//   [frequency=V] [step_height=V] [duty=V] [heading=V]
// Counts above one get a deterministic per-clip speed/heading jitter.
int cmd_gen_dataset(const std::string& spec_path, const std::string& out_dir, uint64_t seed,
                    bool binary, const std::string& model_path) {
  const RobotModel model = load_model_or_default(model_path);
  std::ifstream in(spec_path);
  if (!in) throw std::runtime_error("cannot open spec " + spec_path);

  Dataset dataset;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string type_name;
    int count = 0;
    if (!(ls >> type_name >> count)) {
      if (type_name.empty()) continue;  // blank line
      throw std::runtime_error("spec line " + std::to_string(lineno) +
                               ": expected <type> <count>");
    }
    GaitSpec base;
    base.type = motion_type_from_string(type_name);
    std::string kv;
    while (ls >> kv) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("spec line " + std::to_string(lineno) + ": bad token " + kv);
      const std::string key = kv.substr(0, eq);
      const double value = std::stod(kv.substr(eq + 1));
      if (key == "speed") base.speed = value;
      else if (key == "yaw_rate") base.yaw_rate = value;
      else if (key == "duration") base.duration = value;
      else if (key == "fps") base.fps = value;
      else if (key == "frequency") base.step_frequency = value;
      else if (key == "step_height") base.step_height = value;
      else if (key == "duty") base.duty_factor = value;
      else if (key == "heading") base.initial_heading = value;
      else throw std::runtime_error("spec line " + std::to_string(lineno) + ": unknown key " + key);
    }
    for (int i = 0; i < count; ++i) {
      GaitSpec gs = base;
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%03d", i);
      gs.name = type_name + "_" + idx;
      if (count > 1) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(lineno), static_cast<uint64_t>(i));
        gs.speed *= 1.0 + 0.2 * (rng.uniform() - 0.5);
        gs.yaw_rate *= 1.0 + 0.2 * (rng.uniform() - 0.5);
        gs.initial_heading += 0.3 * (rng.uniform() - 0.5);
      }
      dataset.add(synthesize_clip(gs, model));
    }
  }
  write_dataset(dataset, out_dir, binary);
  std::cout << "wrote " << dataset.size() << " clips to " << out_dir << "\n";
  return 0;
}

int cmd_validate(const std::string& dir) {
  const Dataset dataset = load_dataset(dir);
  validate_dataset(dataset);
  for (const auto& [id, clip] : dataset.clips)
    std::cout << "OK " << id << " (" << to_string(clip.type) << ", " << clip.frames.size()
              << " frames @ " << clip.fps << " Hz)\n";
  std::cout << dataset.size() << " clips valid\n";
  return 0;
}

int cmd_retarget(const std::string& src_path, const std::string& model_path, double scale,
                 int knee_hints, const std::string& out_path, const std::string& report_path) {
  const RobotModel model = load_model_or_default(model_path);
  const SourceMotion src = load_source_motion(src_path);
  RetargetConfig cfg = RetargetConfig::for_type(src.type);
  cfg.scale = scale;
  if (knee_hints >= 0) cfg.use_knee_hint = knee_hints > 0;

  const RetargetResult result = retarget_motion(src, model, cfg);
  const double pen_before = max_ground_penetration(result.clip, model, cfg.ground_height);
  const double skate_before = foot_skate_metric(result.clip, model, cfg);
  MotionClip clip = remove_ground_penetration(result.clip, model, cfg.ground_height);
  clip = cleanup(clip, model, cfg);
  const double pen_after = max_ground_penetration(clip, model, cfg.ground_height);
  const double skate_after = foot_skate_metric(clip, model, cfg);

  save_clip_text(clip, out_path);
  std::cout << "retargeted '" << src.name << "' (" << clip.frames.size()
            << " frames), clamp fraction "
            << format_double_short(result.stats.clamped_fraction) << "\n";
  if (!report_path.empty()) {
    std::ofstream report(report_path);
    report << "clip,clamp_fraction,front_calf_clamp_fraction,projected_fraction,"
              "max_penetration_before,max_penetration_after,skate_before,skate_after\n";
    report << clip.name << ',' << format_double(result.stats.clamped_fraction) << ','
           << format_double(result.stats.front_calf_clamped_fraction) << ','
           << format_double(result.stats.projected_fraction) << ',' << format_double(pen_before)
           << ',' << format_double(pen_after) << ',' << format_double(skate_before) << ','
           << format_double(skate_after) << "\n";
  }
  return 0;
}

int cmd_train(const std::string& dataset_dir, const std::string& model_path,
              const std::string& sim_path, const std::string& env_path,
              const std::string& ppo_path, bool no_ams, bool obs_current_only, bool action_prior,
              int iters, uint64_t seed, const std::string& out_dir, int threads,
              int eval_period) {
  const Dataset dataset = load_dataset(dataset_dir);
  const RobotModel model = load_model_or_default(model_path);
  const SimConfig sim_cfg = load_sim_or_default(sim_path);
  EnvConfig env_cfg = load_env_or_default(env_path);
  const PPOConfig ppo_cfg = load_ppo_or_default(ppo_path);

  if (obs_current_only) {
    env_cfg.window_offsets.clear();
    env_cfg.include_current_frame = true;
  }
  if (action_prior) env_cfg.action_prior_reference = true;

  TrainOptions opts;
  opts.iterations = iters;
  opts.seed = seed;
  opts.threads = threads;
  opts.use_ams = !no_ams;
  opts.eval_period = eval_period;
  opts.out_dir = out_dir;

  fs::create_directories(out_dir);
  model.to_config().write_file((fs::path(out_dir) / "resolved.model.cfg").string());
  sim_cfg.to_config().write_file((fs::path(out_dir) / "resolved.sim.cfg").string());
  env_cfg.to_config().write_file((fs::path(out_dir) / "resolved.env.cfg").string());
  ppo_cfg.to_config().write_file((fs::path(out_dir) / "resolved.ppo.cfg").string());
  opts.to_config().write_file((fs::path(out_dir) / "resolved.train.cfg").string());

  const TrainResult result = train(dataset, model, sim_cfg, env_cfg, ppo_cfg, opts);
  std::cout << "trained " << iters << " iterations ("
            << (opts.use_ams ? "adaptive" : "uniform") << " sampling), final failed count "
            << result.last_failed_count << "/" << dataset.size() << "\n";
  return 0;
}

int cmd_eval(const std::string& dataset_dir, const std::string& checkpoint_path,
             const std::string& model_path, const std::string& sim_path,
             const std::string& env_path, double friction, uint64_t seed,
             const std::string& out_path, int threads) {
  const Dataset dataset = load_dataset(dataset_dir);
  const RobotModel model = load_model_or_default(model_path);
  SimConfig sim_cfg = load_sim_or_default(sim_path);
  const EnvConfig env_cfg = load_env_or_default(env_path);
  if (friction >= 0.0) sim_cfg.friction = friction;
  const PolicyParams params = load_checkpoint(checkpoint_path);

  const EvalReport report =
      evaluate_policy_on_dataset(dataset, params, env_cfg, sim_cfg, model, seed, threads);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << "clip,success,episode_return,steps_survived\n";
  for (const ClipEvalResult& r : report.per_clip)
    out << r.id << ',' << (r.success ? 1 : 0) << ',' << format_double(r.episode_return) << ','
        << r.steps_survived << "\n";
  std::cout << "evaluated " << report.per_clip.size() << " clips, failed " << report.failed_count
            << ", mean return " << format_double_short(report.mean_return) << "\n";
  return 0;
}

int cmd_rollout(const std::string& clip_ref, const std::string& dataset_dir,
                const std::string& checkpoint_path, const std::string& model_path,
                const std::string& sim_path, const std::string& env_path, double friction,
                uint64_t seed, const std::string& out_path, const std::string& state_out) {
  const RobotModel model = load_model_or_default(model_path);
  SimConfig sim_cfg = load_sim_or_default(sim_path);
  const EnvConfig env_cfg = load_env_or_default(env_path);
  if (friction >= 0.0) sim_cfg.friction = friction;

  MotionClip clip;
  if (!dataset_dir.empty())
    clip = load_dataset(dataset_dir).at(clip_ref);
  else
    clip = load_clip(clip_ref);

  const PolicyParams params = load_checkpoint(checkpoint_path);
  const PolicyFn mean_policy = [&params](const VecX& obs, Rng&) {
    return Vec12(policy_forward(params, obs).mean);
  };
  const EpisodeResult ep =
      run_episode(clip, mean_policy, env_cfg, sim_cfg, model, seed, /*record_trajectory=*/true);
  write_trajectory_csv(ep, out_path);

  if (!state_out.empty()) {
    // Re-run the loop dumping full simulator states.
    std::ofstream out(state_out);
    out << state_csv_header() << "\n";
    RobotState state = sim_reset(model, sim_cfg, clip);
    out << state_csv_row(0.0, state) << "\n";
    Vec12 prev_raw = Vec12::Zero();
    Rng rng(seed);
    const int steps = episode_steps(clip, env_cfg);
    for (int k = 0; k < steps; ++k) {
      const double t = k * env_cfg.control_dt;
      const Vec12 raw = mean_policy(observe(state, clip, t, env_cfg), rng);
      const Vec12 target = process_action(raw, prev_raw, env_cfg, model, &clip, t);
      prev_raw = raw;
      try {
        state = sim_step(model, sim_cfg, state, target);
      } catch (const SimDiverged&) {
        break;
      }
      out << state_csv_row((k + 1) * env_cfg.control_dt, state) << "\n";
      if (terminated(state, sim_cfg)) break;
    }
  }

  std::cout << "rollout '" << clip.name << "': " << ep.steps_survived << "/" << ep.max_steps
            << " steps, return " << format_double_short(ep.total_return)
            << (ep.success ? " (success)" : " (terminated)") << "\n";
  return 0;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir) {
  const ExperimentSpec spec = ExperimentSpec::from_file(spec_path);
  const Report report = run_experiment(spec, out_dir);
  int failed_cells = 0;
  for (const ExperimentCell& c : report.cells)
    if (c.failed) ++failed_cells;
  std::cout << "experiment '" << report.name << "': " << report.cells.size() << " cells, "
            << failed_cells << " failed; report in " << out_dir << "\n";
  return 0;
}

// Rebuild plots from the CSV logs of a train/experiment output directory.
int cmd_report(const std::string& in_dir, const std::string& out_dir) {
  Report report;
  report.name = fs::path(in_dir).filename().string();
  std::vector<fs::path> logs;
  if (fs::exists(fs::path(in_dir) / "training_log.csv"))
    logs.push_back(fs::path(in_dir) / "training_log.csv");
  if (fs::is_directory(in_dir))
    for (const auto& entry : fs::directory_iterator(in_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "training_log.csv"))
        logs.push_back(entry.path() / "training_log.csv");
  std::sort(logs.begin(), logs.end());
  if (logs.empty()) throw std::runtime_error("no training_log.csv under " + in_dir);

  for (const fs::path& log : logs) {
    PlotSeries reward, failed;
    const std::string label = log.parent_path().filename().string();
    reward.label = label;
    failed.label = label;
    std::ifstream in(log);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ls, field, ',')) fields.push_back(field);
      if (fields.size() < 6) continue;
      const double iter = std::stod(fields[0]);
      reward.xs.push_back(iter);
      reward.ys.push_back(std::stod(fields[1]));
      const int failed_count = std::stoi(fields[3]);
      if (failed_count >= 0) {
        failed.xs.push_back(iter);
        failed.ys.push_back(failed_count);
      }
    }
    report.reward_curves.push_back(std::move(reward));
    report.failed_curves.push_back(std::move(failed));
  }
  emit_plots(&report, out_dir);
  std::ofstream manifest(fs::path(out_dir) / "report_manifest.txt");
  for (const std::string& line : report.manifest) manifest << line << "\n";
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped motion imitation toolkit"};
  app.require_subcommand(1);

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "synthesize a clip dataset from a type-count spec");
  std::string gen_out, gen_spec, gen_model;
  uint64_t gen_seed = 0;
  bool gen_binary = false;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--spec", gen_spec, "dataset spec file")->required();
  gen->add_option("--seed", gen_seed, "jitter seed");
  gen->add_option("--model", gen_model, "robot model config");
  gen->add_flag("--binary", gen_binary, "write binary clip files");

  // retarget
  auto* ret = app.add_subcommand("retarget", "retarget a source motion onto the robot");
  std::string ret_src, ret_model, ret_out, ret_report;
  double ret_scale = 1.0;
  int ret_knee = -1;
  ret->add_option("--src", ret_src, "source motion file")->required();
  ret->add_option("--model", ret_model, "robot model config");
  ret->add_option("--scale", ret_scale, "coordinate scale factor");
  ret->add_flag_function("--knee-hints", [&ret_knee](int64_t) { ret_knee = 1; },
                         "force knee-hinted IK");
  ret->add_flag_function("--no-knee-hints", [&ret_knee](int64_t) { ret_knee = 0; },
                         "force plain IK");
  ret->add_option("--out", ret_out, "output clip file")->required();
  ret->add_option("--report", ret_report, "retargeting report CSV");

  // validate
  auto* val = app.add_subcommand("validate", "validate a dataset directory");
  std::string val_dir;
  val->add_option("dir", val_dir, "dataset directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a tracking policy");
  std::string tr_dataset, tr_model, tr_sim, tr_env, tr_ppo, tr_out;
  bool tr_no_ams = false, tr_obs_current = false, tr_action_prior = false;
  int tr_iters = 200, tr_threads = 2, tr_eval_period = 200;
  uint64_t tr_seed = 0;
  tr->add_option("--dataset", tr_dataset, "dataset directory")->required();
  tr->add_option("--model", tr_model, "robot model config");
  tr->add_option("--sim", tr_sim, "simulator config");
  tr->add_option("--env", tr_env, "environment config");
  tr->add_option("--ppo", tr_ppo, "ppo config");
  tr->add_flag("--no-ams", tr_no_ams, "uniform clip sampling instead of AMS");
  tr->add_flag("--obs-current-only", tr_obs_current, "observation ablation: current frame only");
  tr->add_flag("--action-prior", tr_action_prior, "action ablation: residual about the reference");
  tr->add_option("--iters", tr_iters, "training iterations")->required();
  tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--threads", tr_threads, "rollout worker threads");
  tr->add_option("--eval-period", tr_eval_period, "iterations between repartition evaluations");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint over a dataset");
  std::string ev_dataset, ev_checkpoint, ev_model, ev_sim, ev_env, ev_out;
  double ev_friction = -1.0;
  uint64_t ev_seed = 0;
  int ev_threads = 2;
  ev->add_option("--dataset", ev_dataset, "dataset directory")->required();
  ev->add_option("--checkpoint", ev_checkpoint, "policy checkpoint")->required();
  ev->add_option("--model", ev_model, "robot model config");
  ev->add_option("--sim", ev_sim, "simulator config");
  ev->add_option("--env", ev_env, "environment config");
  ev->add_option("--friction", ev_friction, "override ground friction");
  ev->add_option("--seed", ev_seed, "evaluation seed");
  ev->add_option("--out", ev_out, "per-clip results CSV")->required();
  ev->add_option("--threads", ev_threads, "worker threads");

  // rollout
  auto* ro = app.add_subcommand("rollout", "roll out a checkpoint on one clip");
  std::string ro_clip, ro_dataset, ro_checkpoint, ro_model, ro_sim, ro_env, ro_out, ro_state_out;
  double ro_friction = -1.0;
  uint64_t ro_seed = 0;
  ro->add_option("--clip", ro_clip, "clip id (with --dataset) or clip file path")->required();
  ro->add_option("--dataset", ro_dataset, "dataset directory");
  ro->add_option("--checkpoint", ro_checkpoint, "policy checkpoint")->required();
  ro->add_option("--model", ro_model, "robot model config");
  ro->add_option("--sim", ro_sim, "simulator config");
  ro->add_option("--env", ro_env, "environment config");
  ro->add_option("--friction", ro_friction, "override ground friction");
  ro->add_option("--seed", ro_seed, "rollout seed");
  ro->add_option("--out", ro_out, "trajectory CSV")->required();
  ro->add_option("--state-out", ro_state_out, "full simulator state CSV");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run a scripted variant-axis experiment");
  std::string ex_spec, ex_out;
  ex->add_option("--spec", ex_spec, "experiment spec file")->required();
  ex->add_option("--out", ex_out, "output directory")->required();

  // report
  auto* re = app.add_subcommand("report", "render plots from training/experiment logs");
  std::string re_in, re_out;
  re->add_option("--in", re_in, "input directory")->required();
  re->add_option("--out", re_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_dataset(gen_spec, gen_out, gen_seed, gen_binary, gen_model);
    if (ret->parsed())
      return cmd_retarget(ret_src, ret_model, ret_scale, ret_knee, ret_out, ret_report);
    if (val->parsed()) return cmd_validate(val_dir);
    if (tr->parsed())
      return cmd_train(tr_dataset, tr_model, tr_sim, tr_env, tr_ppo, tr_no_ams, tr_obs_current,
                       tr_action_prior, tr_iters, tr_seed, tr_out, tr_threads, tr_eval_period);
    if (ev->parsed())
      return cmd_eval(ev_dataset, ev_checkpoint, ev_model, ev_sim, ev_env, ev_friction, ev_seed,
                      ev_out, ev_threads);
    if (ro->parsed())
      return cmd_rollout(ro_clip, ro_dataset, ro_checkpoint, ro_model, ro_sim, ro_env,
                         ro_friction, ro_seed, ro_out, ro_state_out);
    if (ex->parsed()) return cmd_experiment(ex_spec, ex_out);
    if (re->parsed()) return cmd_report(re_in, re_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
