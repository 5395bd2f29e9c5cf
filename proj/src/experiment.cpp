#include "mimic/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mimic/clip_io.hpp"

namespace fs = std::filesystem;

namespace mimic {

ExperimentAxis experiment_axis_from_string(const std::string& name) {
  if (name == "sampling") return ExperimentAxis::kSampling;
  if (name == "obs-window") return ExperimentAxis::kObsWindow;
  if (name == "action-prior") return ExperimentAxis::kActionPrior;
  if (name == "friction") return ExperimentAxis::kFriction;
  throw ValidationError("unknown experiment axis: " + name);
}

const char* to_string(ExperimentAxis axis) {
  switch (axis) {
    case ExperimentAxis::kSampling: return "sampling";
    case ExperimentAxis::kObsWindow: return "obs-window";
    case ExperimentAxis::kActionPrior: return "action-prior";
    default: return "friction";
  }
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& kv) {
  ExperimentSpec s;
  s.name = kv.get_string("name", s.name);
  s.axis = experiment_axis_from_string(kv.get_string("axis"));
  s.dataset_dir = kv.get_string("dataset");
  if (kv.has("seeds")) {
    s.seeds.clear();
    for (double v : kv.get_doubles("seeds")) s.seeds.push_back(static_cast<uint64_t>(v));
  }
  s.iterations = static_cast<int>(kv.get_int("iterations", s.iterations));
  if (kv.has("eval_frictions")) s.eval_frictions = kv.get_doubles("eval_frictions");
  s.rollout_clip = kv.get_string("rollout_clip", s.rollout_clip);
  s.model_file = kv.get_string("model", s.model_file);
  s.sim_file = kv.get_string("sim", s.sim_file);
  s.env_file = kv.get_string("env", s.env_file);
  s.ppo_file = kv.get_string("ppo", s.ppo_file);
  s.threads = static_cast<int>(kv.get_int("threads", s.threads));
  s.eval_period = static_cast<int>(kv.get_int("eval_period", s.eval_period));
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
  return from_config(KeyValueConfig::from_file(path));
}

KeyValueConfig ExperimentSpec::to_config() const {
  KeyValueConfig kv;
  kv.set("name", name);
  kv.set("axis", to_string(axis));
  kv.set("dataset", dataset_dir);
  std::vector<double> sd;
  for (uint64_t s : seeds) sd.push_back(static_cast<double>(s));
  kv.set_doubles("seeds", sd);
  kv.set_int("iterations", iterations);
  kv.set_doubles("eval_frictions", eval_frictions);
  kv.set("rollout_clip", rollout_clip);
  kv.set("model", model_file);
  kv.set("sim", sim_file);
  kv.set("env", env_file);
  kv.set("ppo", ppo_file);
  kv.set_int("threads", threads);
  kv.set_int("eval_period", eval_period);
  return kv;
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ValidationError("experiment: needs at least one seed");
  if (iterations <= 0) throw ValidationError("experiment: iterations must be > 0");
  if (dataset_dir.empty()) throw ValidationError("experiment: dataset is required");
}

namespace {

struct LoadedConfigs {
  RobotModel model;
  SimConfig sim;
  EnvConfig env;
  PPOConfig ppo;
};

LoadedConfigs load_configs(const ExperimentSpec& spec) {
  LoadedConfigs c;
  c.model = spec.model_file.empty() ? RobotModel() : RobotModel::from_file(spec.model_file);
  c.sim = spec.sim_file.empty() ? SimConfig() : SimConfig::from_file(spec.sim_file);
  c.env = spec.env_file.empty() ? EnvConfig() : EnvConfig::from_file(spec.env_file);
  c.ppo = spec.ppo_file.empty() ? PPOConfig() : PPOConfig::from_file(spec.ppo_file);
  return c;
}

std::vector<std::string> variants_for(const ExperimentSpec& spec) {
  switch (spec.axis) {
    case ExperimentAxis::kSampling: return {"ams", "uniform"};
    case ExperimentAxis::kObsWindow: return {"past-future", "current-only"};
    case ExperimentAxis::kActionPrior: return {"nominal", "reference"};
    default: return {"train-friction"};
  }
}

void apply_variant(ExperimentAxis axis, const std::string& variant, EnvConfig* env,
                   TrainOptions* train) {
  if (axis == ExperimentAxis::kSampling) {
    train->use_ams = (variant == "ams");
  } else if (axis == ExperimentAxis::kObsWindow) {
    if (variant == "current-only") {
      env->window_offsets.clear();
      env->include_current_frame = true;
    }
  } else if (axis == ExperimentAxis::kActionPrior) {
    env->action_prior_reference = (variant == "reference");
  }
}

uint64_t combined_hash(const RobotModel& model, const SimConfig& sim, const EnvConfig& env,
                       const PPOConfig& ppo, const TrainOptions& train) {
  KeyValueConfig all;
  const auto merge = [&all](const std::string& prefix, const KeyValueConfig& cfg) {
    for (const auto& [k, v] : cfg.entries()) all.set(prefix + "." + k, v);
  };
  merge("model", model.to_config());
  merge("sim", sim.to_config());
  merge("env", env.to_config());
  merge("ppo", ppo.to_config());
  merge("train", train.to_config());
  return all.hash();
}

void write_resolved(const fs::path& dir, const RobotModel& model, const SimConfig& sim,
                    const EnvConfig& env, const PPOConfig& ppo, const TrainOptions& train) {
  model.to_config().write_file((dir / "resolved.model.cfg").string());
  sim.to_config().write_file((dir / "resolved.sim.cfg").string());
  env.to_config().write_file((dir / "resolved.env.cfg").string());
  ppo.to_config().write_file((dir / "resolved.ppo.cfg").string());
  train.to_config().write_file((dir / "resolved.train.cfg").string());
}

// Height-tracking rollout with the deterministic mean policy.
struct TrackingResult {
  PlotSeries heights;       // t vs base z
  PlotSeries ref_heights;   // t vs reference z
  double mean_com_error = 0.0;
  int termination_step = -1;  // -1 when the episode survived
};

TrackingResult tracking_rollout(const MotionClip& clip, const PolicyParams& params,
                                const EnvConfig& env, const SimConfig& sim,
                                const RobotModel& model, uint64_t seed) {
  const PolicyFn mean_policy = [&params](const VecX& obs, Rng&) {
    return Vec12(policy_forward(params, obs).mean);
  };
  const EpisodeResult ep =
      run_episode(clip, mean_policy, env, sim, model, seed, /*record_trajectory=*/true);
  TrackingResult out;
  double err = 0.0;
  for (const TrajectoryRow& row : ep.trajectory) {
    out.heights.xs.push_back(row.t);
    out.heights.ys.push_back(row.com.z());
    out.ref_heights.xs.push_back(row.t);
    out.ref_heights.ys.push_back(row.ref_com.z());
    err += (row.com - row.ref_com).norm();
  }
  out.mean_com_error = ep.trajectory.empty() ? 0.0 : err / ep.trajectory.size();
  out.termination_step = ep.success ? -1 : ep.steps_survived;
  return out;
}

}  // namespace

Report run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
  spec.validate();
  const Dataset dataset = load_dataset(spec.dataset_dir);
  if (dataset.size() == 0) throw ValidationError("experiment: dataset is empty");
  const LoadedConfigs base = load_configs(spec);
  const std::string rollout_id =
      spec.rollout_clip.empty() ? dataset.ids().front() : spec.rollout_clip;

  Report report;
  report.name = spec.name;
  report.axis = spec.axis;

  fs::create_directories(out_dir);
  spec.to_config().write_file((fs::path(out_dir) / "resolved_spec.cfg").string());

  bool reference_heights_added = false;
  for (const std::string& variant : variants_for(spec)) {
    for (uint64_t seed : spec.seeds) {
      ExperimentCell cell;
      cell.variant = variant;
      cell.seed = seed;
      const std::string cell_name = variant + "_s" + std::to_string(seed);
      const fs::path cell_dir = fs::path(out_dir) / cell_name;
      fs::create_directories(cell_dir);

      EnvConfig env = base.env;
      TrainOptions topts;
      topts.iterations = spec.iterations;
      topts.seed = seed;
      topts.threads = spec.threads;
      topts.eval_period = spec.eval_period;
      topts.out_dir = cell_dir.string();
      apply_variant(spec.axis, variant, &env, &topts);
      cell.config_hash = combined_hash(base.model, base.sim, env, base.ppo, topts);
      write_resolved(cell_dir, base.model, base.sim, env, base.ppo, topts);

      try {
        const TrainResult trained = train(dataset, base.model, base.sim, env, base.ppo, topts);
        cell.final_failed_count = trained.last_failed_count;
        cell.final_mean_return =
            trained.log.empty() ? 0.0 : trained.log.back().mean_episode_return;

        PlotSeries reward_curve, failed_curve;
        reward_curve.label = cell_name;
        failed_curve.label = cell_name;
        for (const TrainLogRow& row : trained.log) {
          reward_curve.xs.push_back(row.iteration);
          reward_curve.ys.push_back(row.mean_episode_return);
          if (row.failed_count >= 0) {
            failed_curve.xs.push_back(row.iteration);
            failed_curve.ys.push_back(row.failed_count);
          }
        }
        report.reward_curves.push_back(std::move(reward_curve));
        report.failed_curves.push_back(std::move(failed_curve));

        if (spec.axis == ExperimentAxis::kFriction) {
          // Evaluate the one trained policy across the friction sweep.
          std::vector<double> mus = {base.sim.friction};
          mus.insert(mus.end(), spec.eval_frictions.begin(), spec.eval_frictions.end());
          for (double mu : mus) {
            SimConfig sim_mu = base.sim;
            sim_mu.friction = mu;
            TrackingResult tr = tracking_rollout(dataset.at(rollout_id), trained.params, env,
                                                 sim_mu, base.model, seed);
            ExperimentCell mu_cell = cell;
            mu_cell.variant = "mu" + format_double_short(mu);
            mu_cell.mean_tracking_error = tr.mean_com_error;
            mu_cell.termination_step = tr.termination_step;
            report.cells.push_back(mu_cell);
            tr.heights.label = mu_cell.variant + "_s" + std::to_string(seed);
            if (!reference_heights_added) {
              tr.ref_heights.label = "reference";
              tr.ref_heights.dashed = true;
              report.height_curves.push_back(std::move(tr.ref_heights));
              reference_heights_added = true;
            }
            report.height_curves.push_back(std::move(tr.heights));
          }
          continue;  // per-mu cells already recorded
        }

        TrackingResult tr = tracking_rollout(dataset.at(rollout_id), trained.params, env,
                                             base.sim, base.model, seed);
        cell.mean_tracking_error = tr.mean_com_error;
        cell.termination_step = tr.termination_step;
        if (!reference_heights_added) {
          tr.ref_heights.label = "reference";
          tr.ref_heights.dashed = true;
          report.height_curves.push_back(std::move(tr.ref_heights));
          reference_heights_added = true;
        }
        tr.heights.label = cell_name;
        report.height_curves.push_back(std::move(tr.heights));
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        std::cerr << "experiment cell " << cell_name << " failed: " << e.what() << "\n";
      }
      report.cells.push_back(cell);
    }
  }

  write_report_summary(report, (fs::path(out_dir) / "summary.csv").string());
  emit_plots(&report, (fs::path(out_dir) / "plots").string());
  std::ofstream manifest(fs::path(out_dir) / "report_manifest.txt");
  for (const std::string& line : report.manifest) manifest << line << "\n";
  return report;
}

void write_report_summary(const Report& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "variant,seed,config_hash,final_failed_count,final_mean_return,"
         "mean_tracking_error,termination_step,failed,error\n";
  for (const ExperimentCell& c : report.cells) {
    out << c.variant << ',' << c.seed << ',' << c.config_hash << ',' << c.final_failed_count
        << ',' << format_double(c.final_mean_return) << ','
        << format_double(c.mean_tracking_error) << ',' << c.termination_step << ','
        << (c.failed ? 1 : 0) << ',' << c.error << "\n";
  }
}

void emit_plots(Report* report, const std::string& dir) {
  fs::create_directories(dir);
  const auto emit = [&](const std::vector<PlotSeries>& series, const std::string& stem,
                        const std::string& title, const std::string& xl, const std::string& yl) {
    bool any = false;
    for (const PlotSeries& s : series)
      if (!s.xs.empty()) any = true;
    if (!any) {
      report->manifest.push_back("omitted " + stem + " (empty series)");
      return;
    }
    const std::string svg = svg_line_chart(title, xl, yl, series);
    std::ofstream out(fs::path(dir) / (stem + ".svg"));
    out << svg;
    write_series_csv(series, (fs::path(dir) / (stem + ".csv")).string());
    report->manifest.push_back("emitted " + stem + ".svg");
    report->manifest.push_back("emitted " + stem + ".csv");
  };
  emit(report->reward_curves, "reward", report->name + ": mean episodic reward", "iteration",
       "mean episode return");
  emit(report->failed_curves, "failed_count", report->name + ": failed trajectories", "iteration",
       "failed clips");
  emit(report->height_curves, "height_tracking", report->name + ": CoM height tracking",
       "time (s)", "base height (m)");
}

}  // namespace mimic
