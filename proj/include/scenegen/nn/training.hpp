#ifndef SCENEGEN_NN_TRAINING_HPP_
#define SCENEGEN_NN_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "scenegen/diffusion.hpp"
#include "scenegen/nn/denoiser.hpp"

namespace scenegen::nn {

enum class OptimizerKind { kSgd, kMomentum, kAdam };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kMomentum;
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3;
  double momentum = 0.9;  // also Adam's beta1
  double beta2 = 0.999;
  bool cosine_decay = false;  // lr * (1 + cos(pi * step / total)) / 2
  double grad_clip = 1.0;  // global norm; <= 0 disables
  double p_decentralized = 0.5;
  std::uint64_t seed = 0;
};

struct StepInfo {
  int epoch = 0;
  int step = 0;
  int example = 0;
  int t = 0;
  CdbMode mode = CdbMode::kCentralized;
  double loss = 0.0;
};

using StepHook = std::function<void(const StepInfo&)>;

struct TrainLog {
  std::vector<double> epoch_loss;
  int steps = 0;
};

// One scene for the initialization model, already normalized and in
// canonical agent order.
struct InitExample {
  Eigen::MatrixXd x0;  // N x 4
  std::vector<int> types;
  std::shared_ptr<const MapTokens> map;
};

struct TrajExample {
  Eigen::MatrixXd tau_z0;  // N x latent_dim, whitened PCA codes
  Eigen::MatrixXd init_features;
  std::vector<int> types;
  std::shared_ptr<const MapTokens> map;
  std::vector<Eigen::MatrixXd> candidates;
  Mask m2a;
};

// Plain gradient descent: p <- p - lr * g.
void sgd_step(ParameterSet<double>& params, const Gradients<double>& grads, double lr);

// Heavy-ball momentum: v <- mu v + g; p <- p - lr v.
class MomentumSgd {
 public:
  MomentumSgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(ParameterSet<double>& params, const Gradients<double>& grads);
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  Gradients<double> velocity_;
};

class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParameterSet<double>& params, const Gradients<double>& grads);
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  int t_ = 0;
  Gradients<double> m_;
  Gradients<double> v_;
};

// Scales grads in place so their global norm is at most max_norm; returns the
// norm before clipping.
double clip_global_norm(Gradients<double>& grads, double max_norm);

TrainLog train_init(const std::vector<InitExample>& data, const NoiseSchedule& sched,
                    InitDenoiser<double>& net, const TrainConfig& cfg,
                    const StepHook& hook = nullptr);

TrainLog train_traj(const std::vector<TrajExample>& data, const NoiseSchedule& sched,
                    TrajDenoiser<double>& net, const TrainConfig& cfg,
                    const StepHook& hook = nullptr);

}  // namespace scenegen::nn

#endif  // SCENEGEN_NN_TRAINING_HPP_
