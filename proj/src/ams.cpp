#include "mimic/ams.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace mimic {

namespace {

std::vector<uint32_t> fresh_permutation(size_t n, Rng* rng) {
  std::vector<uint32_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
  rng->shuffle(perm);
  return perm;
}

std::string draw_from(std::vector<std::string>& ids, std::vector<uint32_t>* perm, size_t* cursor,
                      Rng* rng) {
  if (*cursor >= perm->size()) {
    *perm = fresh_permutation(ids.size(), rng);
    *cursor = 0;
  }
  return ids[(*perm)[(*cursor)++]];
}

}  // namespace

void SampleSets::check_invariants() const {
  std::set<std::string> seen;
  for (const auto& id : unsuccessful)
    if (!seen.insert(id).second) throw ValidationError("ams: duplicate id '" + id + "' in U");
  for (const auto& id : successful)
    if (!seen.insert(id).second)
      throw ValidationError("ams: id '" + id + "' present in both U and S");
  if (perm_u.size() != unsuccessful.size() || perm_s.size() != successful.size())
    throw ValidationError("ams: permutation size mismatch");
  if (cursor_u > perm_u.size() || cursor_s > perm_s.size())
    throw ValidationError("ams: cursor out of range");
}

SampleSets ams_init(const Dataset& dataset, uint64_t seed, int eval_period, double mix) {
  if (dataset.size() == 0) throw ValidationError("ams_init: dataset is empty");
  SampleSets sets;
  sets.unsuccessful = dataset.ids();  // sorted by map order
  sets.eval_period = eval_period;
  sets.mix = mix;
  sets.rng = Rng::derive(seed, 0xA5);
  sets.perm_u = fresh_permutation(sets.unsuccessful.size(), &sets.rng);
  sets.perm_s = {};
  return sets;
}

std::vector<std::string> ams_draw_batch(SampleSets* sets, int n) {
  if (n < 1) throw ValidationError("ams_draw_batch: n must be >= 1");
  const bool u_empty = sets->unsuccessful.empty();
  const bool s_empty = sets->successful.empty();
  if (u_empty && s_empty) throw ValidationError("ams_draw_batch: both sets empty");

  int n_u;
  if (u_empty)
    n_u = 0;
  else if (s_empty)
    n_u = n;
  else
    n_u = static_cast<int>(std::llround(sets->mix * n));

  std::vector<std::string> batch;
  batch.reserve(n);
  for (int i = 0; i < n_u; ++i)
    batch.push_back(draw_from(sets->unsuccessful, &sets->perm_u, &sets->cursor_u, &sets->rng));
  for (int i = n_u; i < n; ++i)
    batch.push_back(draw_from(sets->successful, &sets->perm_s, &sets->cursor_s, &sets->rng));
  return batch;
}

EvalReport evaluate_policy_on_dataset(const Dataset& dataset, const PolicyParams& params,
                                      const EnvConfig& env_cfg, const SimConfig& sim_cfg,
                                      const RobotModel& model, uint64_t seed, int threads) {
  const std::vector<std::string> ids = dataset.ids();
  EvalReport report;
  report.per_clip.resize(ids.size());

  const PolicyFn mean_policy = [&params](const VecX& obs, Rng&) {
    return Vec12(policy_forward(params, obs).mean);
  };

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= ids.size()) break;
      const MotionClip& clip = dataset.at(ids[i]);
      ClipEvalResult r;
      r.id = ids[i];
      try {
        const EpisodeResult ep = run_episode(clip, mean_policy, env_cfg, sim_cfg, model,
                                             Rng::derive(seed, 0xE7A1, i).next());
        r.success = ep.success;
        r.episode_return = ep.total_return;
        r.steps_survived = ep.steps_survived;
      } catch (const InvalidStart&) {
        r.success = false;  // unstartable clip counts as failed
      }
      report.per_clip[i] = r;
    }
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(ids.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nthreads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  double sum_return = 0.0;
  for (const ClipEvalResult& r : report.per_clip) {
    if (!r.success) ++report.failed_count;
    sum_return += r.episode_return;
  }
  report.mean_return = ids.empty() ? 0.0 : sum_return / static_cast<double>(ids.size());
  return report;
}

void ams_repartition(SampleSets* sets, const std::vector<ClipEvalResult>& results) {
  std::vector<std::string> u, s;
  for (const ClipEvalResult& r : results) (r.success ? s : u).push_back(r.id);
  std::sort(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  sets->unsuccessful = std::move(u);
  sets->successful = std::move(s);
  sets->perm_u = fresh_permutation(sets->unsuccessful.size(), &sets->rng);
  sets->perm_s = fresh_permutation(sets->successful.size(), &sets->rng);
  sets->cursor_u = 0;
  sets->cursor_s = 0;
  sets->check_invariants();
}

EvalReport ams_evaluate_and_repartition(SampleSets* sets, const Dataset& dataset,
                                        const PolicyParams& params, const EnvConfig& env_cfg,
                                        const SimConfig& sim_cfg, const RobotModel& model,
                                        uint64_t seed, int threads) {
  const EvalReport report =
      evaluate_policy_on_dataset(dataset, params, env_cfg, sim_cfg, model, seed, threads);
  ams_repartition(sets, report.per_clip);
  return report;
}

}  // namespace mimic
