#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mimic/ams.hpp"
#include "mimic/clip_io.hpp"
#include "mimic/experiment.hpp"
#include "mimic/retarget.hpp"
#include "mimic/synthesize.hpp"
#include "mimic/trainer.hpp"

using namespace mimic;
namespace fs = std::filesystem;

#ifndef MIMIC_CLI_PATH
#define MIMIC_CLI_PATH "mimic"
#endif

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mimic_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIMIC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tiny_dataset(const fs::path& dir, int stands = 2) {
  RobotModel model;
  Dataset ds;
  for (int i = 0; i < stands; ++i) {
    GaitSpec spec;
    spec.type = MotionType::kStand;
    spec.duration = 1.0;
    spec.name = "stand_" + std::to_string(i);
    ds.add(synthesize_clip(spec, model));
  }
  write_dataset(ds, dir.string());
}

}  // namespace

TEST_CASE("key-value config parses, writes back canonically, and hashes") {
  const KeyValueConfig cfg = KeyValueConfig::from_string(
      "# comment\n"
      "alpha = 1.5\n"
      "name = pace_a   # trailing comment\n"
      "list = 1,2,3.5\n");
  CHECK(cfg.get_double("alpha") == 1.5);
  CHECK(cfg.get_string("name") == "pace_a");
  CHECK(cfg.get_doubles("list") == std::vector<double>{1.0, 2.0, 3.5});
  CHECK_THROWS(cfg.get_double("missing"));
  CHECK_THROWS(KeyValueConfig::from_string("novalue\n"));

  KeyValueConfig other = cfg;
  CHECK(other.hash() == cfg.hash());
  other.set_double("alpha", 1.50000001);
  CHECK(other.hash() != cfg.hash());
}

TEST_CASE("cli: gen-dataset then validate succeeds") {
  TempDir tmp;
  std::ofstream spec(tmp.path / "spec.txt");
  spec << "stand 1\npace 2 speed=0.4 duration=2\n";
  spec.close();
  CHECK(run_cli("gen-dataset --out " + (tmp.path / "data").string() + " --spec " +
                (tmp.path / "spec.txt").string() + " --seed 3") == 0);
  CHECK(run_cli("validate " + (tmp.path / "data").string()) == 0);
  const Dataset ds = load_dataset((tmp.path / "data").string());
  CHECK(ds.size() == 3);
  CHECK(ds.type_counts.at(MotionType::kPace) == 2);
}

TEST_CASE("cli: train without --dataset is a usage error") {
  CHECK(run_cli("train --iters 1 --out /tmp/nowhere") != 0);
  CHECK(run_cli("definitely-not-a-subcommand") != 0);
}

TEST_CASE("cli: rollout on a 10 s stand clip writes 500 rows plus header") {
  TempDir tmp;
  RobotModel model;
  Dataset ds;
  GaitSpec spec;
  spec.type = MotionType::kStand;
  spec.name = "stand";
  ds.add(synthesize_clip(spec, model));
  write_dataset(ds, (tmp.path / "data").string());

  // A freshly initialized policy is enough to stand.
  PolicyInit init;
  EnvConfig env_cfg;
  init.obs_dim = observation_dim(env_cfg);
  init.hidden = {16, 16};
  init.seed = 2;
  save_checkpoint(make_policy(init), (tmp.path / "ckpt.bin").string());

  CHECK(run_cli("rollout --dataset " + (tmp.path / "data").string() +
                " --clip stand --checkpoint " + (tmp.path / "ckpt.bin").string() + " --out " +
                (tmp.path / "traj.csv").string() + " --state-out " +
                (tmp.path / "states.csv").string()) == 0);

  std::ifstream traj(tmp.path / "traj.csv");
  int lines = 0;
  std::string line, first;
  while (std::getline(traj, line)) {
    if (lines == 0) first = line;
    ++lines;
  }
  CHECK(lines == 501);
  CHECK(first == trajectory_csv_header());
  CHECK(fs::exists(tmp.path / "states.csv"));
}

TEST_CASE("cli: retarget emits a clip and a report") {
  TempDir tmp;
  RobotModel model;
  GaitSpec spec;
  spec.type = MotionType::kTrot;
  spec.speed = 0.3;
  spec.duration = 1.5;
  spec.name = "trot_src";
  const SourceMotion src = make_source_from_clip(synthesize_clip(spec, model), model);
  save_source_motion(src, (tmp.path / "src.txt").string());

  CHECK(run_cli("retarget --src " + (tmp.path / "src.txt").string() + " --out " +
                (tmp.path / "out.clip.txt").string() + " --report " +
                (tmp.path / "report.csv").string()) == 0);
  const MotionClip clip = load_clip((tmp.path / "out.clip.txt").string());
  CHECK(clip.frames.size() == src.frames.size());
  const std::string report = slurp(tmp.path / "report.csv");
  CHECK(report.find("clamp_fraction") != std::string::npos);
}

TEST_CASE("eval success flags equal the AMS repartition on the same seed") {
  TempDir tmp;
  write_tiny_dataset(tmp.path / "data", 3);
  const Dataset ds = load_dataset((tmp.path / "data").string());
  RobotModel model;
  SimConfig sim_cfg;
  EnvConfig env_cfg;
  PolicyInit init;
  init.obs_dim = observation_dim(env_cfg);
  init.hidden = {16, 16};
  init.seed = 7;
  const PolicyParams params = make_policy(init);

  const EvalReport direct =
      evaluate_policy_on_dataset(ds, params, env_cfg, sim_cfg, model, 42, 2);
  SampleSets sets = ams_init(ds, 1);
  const EvalReport via_ams =
      ams_evaluate_and_repartition(&sets, ds, params, env_cfg, sim_cfg, model, 42, 2);
  REQUIRE(direct.per_clip.size() == via_ams.per_clip.size());
  for (size_t i = 0; i < direct.per_clip.size(); ++i) {
    CHECK(direct.per_clip[i].id == via_ams.per_clip[i].id);
    CHECK(direct.per_clip[i].success == via_ams.per_clip[i].success);
  }
}

TEST_CASE("svg plot output is deterministic and labeled") {
  std::vector<PlotSeries> series(2);
  series[0].label = "reference";
  series[0].dashed = true;
  series[1].label = "policy";
  for (int i = 0; i < 50; ++i) {
    series[0].xs.push_back(i * 0.02);
    series[0].ys.push_back(0.3 + 0.01 * std::sin(i * 0.3));
    series[1].xs.push_back(i * 0.02);
    series[1].ys.push_back(0.3 + 0.01 * std::sin(i * 0.3 + 0.4));
  }
  const std::string a = svg_line_chart("height tracking", "time (s)", "height (m)", series);
  const std::string b = svg_line_chart("height tracking", "time (s)", "height (m)", series);
  CHECK(a == b);
  CHECK(a.find("reference") != std::string::npos);
  CHECK(a.find("policy") != std::string::npos);
  CHECK(a.find("stroke-dasharray") != std::string::npos);
}

TEST_CASE("training runs are bit-deterministic for a fixed seed") {
  TempDir tmp;
  write_tiny_dataset(tmp.path / "data", 2);
  const Dataset ds = load_dataset((tmp.path / "data").string());
  RobotModel model;
  SimConfig sim_cfg;
  EnvConfig env_cfg;
  PPOConfig ppo_cfg;
  ppo_cfg.hidden = {16, 16};
  ppo_cfg.num_envs = 4;
  ppo_cfg.minibatch_size = 256;

  for (const std::string run : {"a", "b"}) {
    TrainOptions opts;
    opts.iterations = 3;
    opts.seed = 7;
    opts.threads = 2;
    opts.eval_period = 3;
    opts.out_dir = (tmp.path / run).string();
    train(ds, model, sim_cfg, env_cfg, ppo_cfg, opts);
  }
  CHECK(slurp(tmp.path / "a" / "training_log.csv") == slurp(tmp.path / "b" / "training_log.csv"));
  CHECK(slurp(tmp.path / "a" / "checkpoint_final.bin") ==
        slurp(tmp.path / "b" / "checkpoint_final.bin"));
  CHECK(!slurp(tmp.path / "a" / "checkpoint_final.bin").empty());
}

TEST_CASE("experiment: single-variant friction axis degenerates to eval") {
  TempDir tmp;
  write_tiny_dataset(tmp.path / "data", 1);

  ExperimentSpec spec;
  spec.name = "mini_friction";
  spec.axis = ExperimentAxis::kFriction;
  spec.dataset_dir = (tmp.path / "data").string();
  spec.seeds = {5};
  spec.iterations = 2;
  spec.eval_period = 2;
  spec.eval_frictions = {0.3};
  // Shrink the run: write a tiny ppo config.
  {
    PPOConfig ppo;
    ppo.hidden = {16, 16};
    ppo.num_envs = 2;
    ppo.to_config().write_file((tmp.path / "tiny.ppo").string());
  }
  spec.ppo_file = (tmp.path / "tiny.ppo").string();

  const Report report = run_experiment(spec, (tmp.path / "out").string());
  // One cell per evaluated friction (train mu + one unseen).
  CHECK(report.cells.size() == 2);
  for (const ExperimentCell& c : report.cells) {
    CHECK_FALSE(c.failed);
    CHECK(c.termination_step != 0);
  }
  CHECK(fs::exists(tmp.path / "out" / "summary.csv"));
  CHECK(fs::exists(tmp.path / "out" / "resolved_spec.cfg"));
  CHECK(fs::exists(tmp.path / "out" / "plots" / "height_tracking.svg"));

  // Config hash changes when a config field changes.
  const ExperimentCell& c0 = report.cells.front();
  ExperimentSpec spec2 = spec;
  spec2.iterations = 3;
  const Report report2 = run_experiment(spec2, (tmp.path / "out2").string());
  CHECK(report2.cells.front().config_hash != c0.config_hash);
}
