#pragma once

#include <string>
#include <vector>

#include "mimic/env.hpp"
#include "mimic/policy.hpp"

namespace mimic {

// Adaptive motion sampling state: the partition of clip ids into the
// unsuccessful set U and successful set S, with per-set epoch permutations
// so draws are uniform and without replacement until a set is exhausted.
struct SampleSets {
  std::vector<std::string> unsuccessful;  // sorted ids
  std::vector<std::string> successful;    // sorted ids
  std::vector<uint32_t> perm_u, perm_s;
  size_t cursor_u = 0, cursor_s = 0;
  int eval_period = 200;   // iterations between repartitions
  double mix = 0.7;        // fraction of each batch drawn from U
  Rng rng;

  void check_invariants() const;  // throws on a broken partition
};

// All clips start unsuccessful; S is empty.
SampleSets ams_init(const Dataset& dataset, uint64_t seed, int eval_period = 200,
                    double mix = 0.7);

// round(mix*n) ids from U and the rest from S, each via its epoch
// permutation (reshuffled on exhaustion). An empty set's quota transfers to
// the other set.
std::vector<std::string> ams_draw_batch(SampleSets* sets, int n);

struct ClipEvalResult {
  std::string id;
  bool success = false;
  double episode_return = 0.0;
  int steps_survived = 0;
};

struct EvalReport {
  std::vector<ClipEvalResult> per_clip;  // sorted by id
  int failed_count = 0;
  double mean_return = 0.0;
};

// One deterministic evaluation episode (policy mean action) per clip,
// fanned out over `threads` workers; results come back in id order.
EvalReport evaluate_policy_on_dataset(const Dataset& dataset, const PolicyParams& params,
                                      const EnvConfig& env_cfg, const SimConfig& sim_cfg,
                                      const RobotModel& model, uint64_t seed, int threads);

// Move every clip to S or U according to its result; both directions.
// Permutations reshuffle and cursors reset.
void ams_repartition(SampleSets* sets, const std::vector<ClipEvalResult>& results);

// The full spec operation: evaluate, then repartition.
EvalReport ams_evaluate_and_repartition(SampleSets* sets, const Dataset& dataset,
                                        const PolicyParams& params, const EnvConfig& env_cfg,
                                        const SimConfig& sim_cfg, const RobotModel& model,
                                        uint64_t seed, int threads);

}  // namespace mimic
