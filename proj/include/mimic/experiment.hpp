#pragma once

#include <string>
#include <vector>

#include "mimic/plots.hpp"
#include "mimic/trainer.hpp"

namespace mimic {

enum class ExperimentAxis {
  kSampling,     // AMS vs uniform
  kObsWindow,    // past+future window vs current frame only
  kActionPrior,  // nominal-pose residual vs reference residual
  kFriction,     // one training friction, several evaluation frictions
};

ExperimentAxis experiment_axis_from_string(const std::string& name);
const char* to_string(ExperimentAxis axis);

struct ExperimentSpec {
  std::string name = "experiment";
  ExperimentAxis axis = ExperimentAxis::kSampling;
  std::string dataset_dir;
  std::vector<uint64_t> seeds = {1};
  int iterations = 100;
  std::vector<double> eval_frictions = {0.3, 1.5};  // friction axis
  std::string rollout_clip;  // clip id for tracking plots; first id if empty
  // Base configs; when paths are empty the shipped defaults apply.
  std::string model_file, sim_file, env_file, ppo_file;
  int threads = 2;
  int eval_period = 25;  // repartition/checkpoint cadence during training

  static ExperimentSpec from_config(const KeyValueConfig& kv);
  static ExperimentSpec from_file(const std::string& path);
  KeyValueConfig to_config() const;
  void validate() const;
};

struct ExperimentCell {
  std::string variant;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  int final_failed_count = -1;
  double final_mean_return = 0.0;
  int termination_step = -1;          // friction axis rollouts
  double mean_tracking_error = 0.0;   // friction axis rollouts
  bool failed = false;                // training blew up; experiment continues
  std::string error;
};

struct Report {
  std::string name;
  ExperimentAxis axis = ExperimentAxis::kSampling;
  std::vector<ExperimentCell> cells;
  // Metric curves per variant/seed for plotting.
  std::vector<PlotSeries> reward_curves;
  std::vector<PlotSeries> failed_curves;
  std::vector<PlotSeries> height_curves;  // reference dashed + per-variant
  std::vector<std::string> manifest;      // emitted/omitted file notes
};

// Trains every variant x seed (same seeds across variants), runs the
// evaluation battery, writes per-cell artifacts under out_dir and returns
// the in-memory report.
Report run_experiment(const ExperimentSpec& spec, const std::string& out_dir);

// Renders the report's curves as SVG + CSV files under dir. Empty series
// are skipped and noted in the manifest.
void emit_plots(Report* report, const std::string& dir);

void write_report_summary(const Report& report, const std::string& path);

}  // namespace mimic
