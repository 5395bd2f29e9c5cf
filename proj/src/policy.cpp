#include "mimic/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace mimic {

namespace {

constexpr char kMagic[4] = {'Q', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return v;
}

void put_vec(std::ostream& out, const VecX& v) {
  put<uint64_t>(out, static_cast<uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

VecX take_vec(std::istream& in, const std::string& path) {
  const uint64_t n = take<uint64_t>(in, path);
  VecX v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return v;
}

void put_mlp(std::ostream& out, const Mlp& net) {
  put<uint32_t>(out, static_cast<uint32_t>(net.layer_count()));
  put<double>(out, net.leaky_slope());
  for (int l = 0; l < net.layer_count(); ++l) {
    const MatX& w = net.weights()[l];
    put<uint32_t>(out, static_cast<uint32_t>(w.rows()));
    put<uint32_t>(out, static_cast<uint32_t>(w.cols()));
    // Row-major on disk.
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) put<double>(out, w(i, j));
    put_vec(out, net.biases()[l]);
  }
}

Mlp take_mlp(std::istream& in, const std::string& path) {
  const uint32_t layers = take<uint32_t>(in, path);
  const double slope = take<double>(in, path);
  std::vector<MatX> ws;
  std::vector<VecX> bs;
  for (uint32_t l = 0; l < layers; ++l) {
    const uint32_t rows = take<uint32_t>(in, path);
    const uint32_t cols = take<uint32_t>(in, path);
    MatX w(rows, cols);
    for (uint32_t i = 0; i < rows; ++i)
      for (uint32_t j = 0; j < cols; ++j) w(i, j) = take<double>(in, path);
    ws.push_back(std::move(w));
    bs.push_back(take_vec(in, path));
  }
  std::vector<int> hidden;
  for (size_t l = 0; l + 1 < ws.size(); ++l) hidden.push_back(static_cast<int>(ws[l].rows()));
  Mlp net(static_cast<int>(ws.front().cols()), hidden, static_cast<int>(ws.back().rows()), slope);
  net.weights() = std::move(ws);
  net.biases() = std::move(bs);
  return net;
}

}  // namespace

int PolicyParams::param_count() const {
  return actor.param_count() + critic.param_count() + static_cast<int>(log_std.size());
}

VecX PolicyParams::flatten() const {
  VecX theta(param_count());
  Eigen::Index at = 0;
  for (const Mlp* net : {&actor, &critic}) {
    for (int l = 0; l < net->layer_count(); ++l) {
      const MatX& w = net->weights()[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) theta[at++] = w(i, j);
      const VecX& b = net->biases()[l];
      theta.segment(at, b.size()) = b;
      at += b.size();
    }
  }
  theta.segment(at, log_std.size()) = log_std;
  return theta;
}

void PolicyParams::set_from_flat(const VecX& theta) {
  if (theta.size() != param_count())
    throw std::invalid_argument("policy: flat parameter size mismatch");
  Eigen::Index at = 0;
  for (Mlp* net : {&actor, &critic}) {
    for (int l = 0; l < net->layer_count(); ++l) {
      MatX& w = net->weights()[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = theta[at++];
      VecX& b = net->biases()[l];
      b = theta.segment(at, b.size());
      at += b.size();
    }
  }
  log_std = theta.segment(at, log_std.size());
}

PolicyParams make_policy(const PolicyInit& init) {
  PolicyParams p;
  p.actor = Mlp(init.obs_dim, init.hidden, init.act_dim, init.leaky_slope);
  p.critic = Mlp(init.obs_dim, init.hidden, 1, init.leaky_slope);
  Rng rng = Rng::derive(init.seed, 0x9011C7);
  const double hidden_gain = std::sqrt(2.0 / (1.0 + init.leaky_slope * init.leaky_slope));
  p.actor.init_orthogonal(rng, hidden_gain, 0.01);
  p.critic.init_orthogonal(rng, hidden_gain, 1.0);
  p.log_std = VecX::Constant(init.act_dim, init.init_log_std);
  p.obs_norm = RunningNormalizer(init.obs_dim);
  return p;
}

PolicyOutput policy_forward(const PolicyParams& params, const VecX& obs) {
  if (obs.size() != params.obs_dim())
    throw std::invalid_argument("policy_forward: observation width " + std::to_string(obs.size()) +
                                " != " + std::to_string(params.obs_dim()));
  const VecX x = params.obs_norm.normalize(obs);
  PolicyOutput out;
  out.mean = params.actor.forward(x.transpose()).row(0).transpose();
  out.value = params.critic.forward(x.transpose())(0, 0);
  out.log_std = params.log_std;
  return out;
}

VecX sample_action(const PolicyParams& params, const VecX& mean, Rng& rng) {
  VecX a(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    a[i] = mean[i] + std::exp(params.log_std[i]) * rng.gaussian();
  return a;
}

double gaussian_log_prob(const VecX& mean, const VecX& log_std, const VecX& action) {
  double lp = -0.5 * static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i];
  }
  return lp;
}

double gaussian_entropy(const VecX& log_std) {
  return log_std.sum() +
         0.5 * static_cast<double>(log_std.size()) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

void save_checkpoint(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put_mlp(out, params.actor);
  put_mlp(out, params.critic);
  put_vec(out, params.log_std);
  put<double>(out, params.obs_norm.count());
  put_vec(out, params.obs_norm.mean());
  put_vec(out, params.obs_norm.m2());
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a checkpoint file");
  const uint32_t version = take<uint32_t>(in, path);
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
  PolicyParams p;
  p.actor = take_mlp(in, path);
  p.critic = take_mlp(in, path);
  p.log_std = take_vec(in, path);
  const double count = take<double>(in, path);
  const VecX mean = take_vec(in, path);
  const VecX m2 = take_vec(in, path);
  p.obs_norm = RunningNormalizer(static_cast<int>(mean.size()));
  p.obs_norm.set_state(count, mean, m2);
  return p;
}

}  // namespace mimic
