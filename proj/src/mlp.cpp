#include "mimic/mlp.hpp"

#include <stdexcept>

namespace mimic {

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim, double leaky_slope)
    : input_dim_(input_dim), output_dim_(output_dim), leaky_slope_(leaky_slope) {
  int in = input_dim;
  for (int h : hidden) {
    weights_.emplace_back(MatX::Zero(h, in));
    biases_.emplace_back(VecX::Zero(h));
    in = h;
  }
  weights_.emplace_back(MatX::Zero(output_dim, in));
  biases_.emplace_back(VecX::Zero(output_dim));
}

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
  for (size_t l = 0; l < weights_.size(); ++l) {
    MatX& w = weights_[l];
    const int rows = static_cast<int>(w.rows());
    const int cols = static_cast<int>(w.cols());
    const int n = std::max(rows, cols);
    MatX g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<MatX> qr(g);
    MatX q = qr.householderQ();
    // Sign-correct with the diagonal of R so the distribution is uniform.
    const MatX r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    const double gain = (l + 1 == weights_.size()) ? output_gain : hidden_gain;
    w = gain * q.topLeftCorner(rows, cols);
    biases_[l].setZero();
  }
}

MatX Mlp::forward(const MatX& x) const {
  Workspace ws;
  return forward(x, ws);
}

MatX Mlp::forward(const MatX& x, Workspace& ws) const {
  if (x.cols() != input_dim_)
    throw std::invalid_argument("mlp: expected input width " + std::to_string(input_dim_) +
                                ", got " + std::to_string(x.cols()));
  ws.activations.clear();
  ws.preacts.clear();
  ws.activations.push_back(x);
  MatX a = x;
  for (size_t l = 0; l < weights_.size(); ++l) {
    MatX z = a * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    ws.preacts.push_back(z);
    if (l + 1 < weights_.size()) {
      a = z.unaryExpr([s = leaky_slope_](double v) { return v > 0.0 ? v : s * v; });
    } else {
      a = z;
    }
    ws.activations.push_back(a);
  }
  return a;
}

void Mlp::backward(const MatX& dy, const Workspace& ws, std::vector<MatX>* dw,
                   std::vector<VecX>* db) const {
  MatX delta = dy;
  for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
    (*dw)[l].noalias() += delta.transpose() * ws.activations[l];
    (*db)[l] += delta.colwise().sum().transpose();
    if (l > 0) {
      delta = delta * weights_[l];
      const MatX& z = ws.preacts[l - 1];
      delta = delta.cwiseProduct(
          z.unaryExpr([s = leaky_slope_](double v) { return v > 0.0 ? 1.0 : s; }));
    }
  }
}

int Mlp::param_count() const {
  int n = 0;
  for (size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<int>(weights_[l].size() + biases_[l].size());
  return n;
}

std::vector<MatX> Mlp::zero_weight_grads() const {
  std::vector<MatX> out;
  for (const MatX& w : weights_) out.push_back(MatX::Zero(w.rows(), w.cols()));
  return out;
}

std::vector<VecX> Mlp::zero_bias_grads() const {
  std::vector<VecX> out;
  for (const VecX& b : biases_) out.push_back(VecX::Zero(b.size()));
  return out;
}

}  // namespace mimic
