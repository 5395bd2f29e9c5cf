#pragma once

#include "mimic/rotation.hpp"

namespace mimic {

// Running mean/std observation normalizer (Welford). Updated once per
// training iteration from the merged rollout buffer, in a fixed order, so
// training stays bit-deterministic; frozen during evaluation.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim)
      : count_(0.0), mean_(VecX::Zero(dim)), m2_(VecX::Zero(dim)) {}

  void update(const VecX& x);
  void update_batch(const MatX& rows);

  VecX normalize(const VecX& x) const;
  MatX normalize_batch(const MatX& rows) const;

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const VecX& mean() const { return mean_; }
  VecX stddev() const;

  void set_state(double count, const VecX& mean, const VecX& m2);
  const VecX& m2() const { return m2_; }

  static constexpr double kClip = 10.0;  // normalized values clip to +-10

 private:
  double count_ = 0.0;
  VecX mean_;
  VecX m2_;
};

}  // namespace mimic
