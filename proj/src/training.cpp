#include "scenegen/nn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace scenegen::nn {

void sgd_step(ParameterSet<double>& params, const Gradients<double>& grads, double lr) {
  if (static_cast<int>(grads.size()) != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient count differs from parameter count");
  }
  for (int i = 0; i < params.size(); ++i) params.value(i) -= lr * grads[i];
}

void MomentumSgd::step(ParameterSet<double>& params, const Gradients<double>& grads) {
  if (velocity_.empty()) velocity_ = params.zeros_like();
  for (int i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grads[i];
    params.value(i) -= lr_ * velocity_[i];
  }
}

void Adam::step(ParameterSet<double>& params, const Gradients<double>& grads) {
  if (m_.empty()) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (int i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
    params.value(i).array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

double clip_global_norm(Gradients<double>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    for (auto& g : grads) g *= max_norm / norm;
  }
  return norm;
}

namespace {

// Shared minibatch loop. record(g, example, rng, info) builds one example's
// forward pass on g and returns its loss.
template <typename Net, typename Example, typename Record>
TrainLog run_training(const std::vector<Example>& data, Net& net, const TrainConfig& cfg,
                      const StepHook& hook, Record&& record) {
  if (data.empty()) throw Error(ErrorCode::kInvalidConfig, "training set is empty");
  Rng rng(cfg.seed);
  MomentumSgd momentum(cfg.lr, cfg.optimizer == OptimizerKind::kSgd ? 0.0 : cfg.momentum);
  Adam adam(cfg.lr, cfg.momentum, cfg.beta2);
  TrainLog log;
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));
  const double total_steps =
      static_cast<double>(cfg.epochs) * static_cast<double>((order.size() + batch - 1) / batch);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double weight = 1.0 / static_cast<double>(end - start);
      Gradients<double> grads = net.params().zeros_like();
      for (std::size_t b = start; b < end; ++b) {
        Graph<double> g(&net.params());
        StepInfo info;
        info.epoch = epoch;
        info.step = log.steps;
        info.example = order[b];
        const Var loss = record(g, data[order[b]], rng, info);
        info.loss = g.value(loss)(0, 0);
        epoch_sum += info.loss;
        const Gradients<double> gb = g.backward(loss, weight);
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += gb[i];
        if (hook) hook(info);
      }
      clip_global_norm(grads, cfg.grad_clip);
      if (cfg.cosine_decay) {
        const double lr = 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * log.steps / total_steps));
        momentum.set_lr(lr);
        adam.set_lr(lr);
      }
      if (cfg.optimizer == OptimizerKind::kAdam) {
        adam.step(net.params(), grads);
      } else {
        momentum.step(net.params(), grads);
      }
      ++log.steps;
    }
    log.epoch_loss.push_back(epoch_sum / static_cast<double>(data.size()));
  }
  return log;
}

int sample_step(const NoiseSchedule& sched, Rng& rng) {
  std::uniform_int_distribution<int> dist(1, sched.t_max);
  return dist(rng);
}

}  // namespace

TrainLog train_init(const std::vector<InitExample>& data, const NoiseSchedule& sched,
                    InitDenoiser<double>& net, const TrainConfig& cfg, const StepHook& hook) {
  const double radius = net.config().m2a_radius;
  return run_training(
      data, net, cfg, hook,
      [&](Graph<double>& g, const InitExample& ex, Rng& rng, StepInfo& info) {
        info.t = sample_step(sched, rng);
        const Eigen::MatrixXd eps = randn(ex.x0.rows(), ex.x0.cols(), rng);
        std::bernoulli_distribution decentralized(cfg.p_decentralized);
        info.mode = decentralized(rng) ? CdbMode::kDecentralized : CdbMode::kCentralized;
        InitInput in;
        in.x_t = forward_sample(ex.x0, info.t, eps, sched);
        in.types = ex.types;
        in.t = info.t;
        in.map = ex.map.get();
        in.a2a = cdb_mask(info.mode, static_cast<int>(ex.x0.rows()));
        in.m2a = m2a_mask(in.x_t.leftCols(2), *ex.map, radius);
        return g.mse(net.forward(g, in), eps);
      });
}

TrainLog train_traj(const std::vector<TrajExample>& data, const NoiseSchedule& sched,
                    TrajDenoiser<double>& net, const TrainConfig& cfg, const StepHook& hook) {
  return run_training(
      data, net, cfg, hook,
      [&](Graph<double>& g, const TrajExample& ex, Rng& rng, StepInfo& info) {
        info.t = sample_step(sched, rng);
        const Eigen::MatrixXd eps = randn(ex.tau_z0.rows(), ex.tau_z0.cols(), rng);
        TrajInput in;
        in.tau_z = forward_sample(ex.tau_z0, info.t, eps, sched);
        in.init_features = ex.init_features;
        in.types = ex.types;
        in.t = info.t;
        in.map = ex.map.get();
        in.candidates = ex.candidates;
        in.a2a = cdb_mask(CdbMode::kCentralized, static_cast<int>(ex.tau_z0.rows()));
        in.m2a = ex.m2a;
        return g.mse(net.forward(g, in), eps);
      });
}

}  // namespace scenegen::nn
