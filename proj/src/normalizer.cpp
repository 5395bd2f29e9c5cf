#include "mimic/normalizer.hpp"

#include <algorithm>
#include <cmath>

namespace mimic {

void RunningNormalizer::update(const VecX& x) {
  count_ += 1.0;
  const VecX delta = x - mean_;
  mean_ += delta / count_;
  m2_ += delta.cwiseProduct(x - mean_);
}

void RunningNormalizer::update_batch(const MatX& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) update(rows.row(i).transpose());
}

VecX RunningNormalizer::stddev() const {
  if (count_ < 2.0) return VecX::Ones(mean_.size());
  return (m2_ / count_).cwiseMax(1e-12).cwiseSqrt();
}

VecX RunningNormalizer::normalize(const VecX& x) const {
  if (count_ < 2.0) return x;
  const VecX sd = stddev();
  VecX out = (x - mean_).cwiseQuotient(sd);
  return out.cwiseMax(-kClip).cwiseMin(kClip);
}

MatX RunningNormalizer::normalize_batch(const MatX& rows) const {
  if (count_ < 2.0) return rows;
  const VecX sd = stddev();
  MatX out = rows;
  out.rowwise() -= mean_.transpose();
  out.array().rowwise() /= sd.transpose().array();
  return out.cwiseMax(-kClip).cwiseMin(kClip);
}

void RunningNormalizer::set_state(double count, const VecX& mean, const VecX& m2) {
  count_ = count;
  mean_ = mean;
  m2_ = m2;
}

}  // namespace mimic
