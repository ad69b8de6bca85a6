#ifndef SCENEGEN_DIFFUSION_HPP_
#define SCENEGEN_DIFFUSION_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "scenegen/types.hpp"

namespace scenegen {

using Rng = std::mt19937_64;

enum class ScheduleKind { kLinear };

// Per-step arrays are stored 0-based; the accessors take the 1-based step t.
struct NoiseSchedule {
  int t_max = 0;
  ScheduleKind kind = ScheduleKind::kLinear;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_bar;
  Eigen::VectorXd sigma2;

  double beta_at(int t) const { return beta[t - 1]; }
  double alpha_at(int t) const { return alpha[t - 1]; }
  double alpha_bar_at(int t) const { return alpha_bar[t - 1]; }
  double sigma2_at(int t) const { return sigma2[t - 1]; }
};

NoiseSchedule make_schedule(int t_max, double beta_start, double beta_end,
                            ScheduleKind kind = ScheduleKind::kLinear);

// Builds a schedule from the explicit beta sequence (same derived arrays).
NoiseSchedule schedule_from_betas(const Eigen::VectorXd& beta);

inline Eigen::MatrixXd randn(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

namespace detail {

inline void check_step(const NoiseSchedule& sched, int t) {
  if (t < 1 || t > sched.t_max) {
    throw Error(ErrorCode::kShapeMismatch,
                "diffusion step " + std::to_string(t) + " outside [1, t_max]");
  }
}

template <typename A, typename B>
void check_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                      const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, what);
  }
}

}  // namespace detail

/// Closed-form marginal sample sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
template <typename Dx, typename De>
Eigen::MatrixXd forward_sample(const Eigen::MatrixBase<Dx>& x0, int t,
                               const Eigen::MatrixBase<De>& eps,
                               const NoiseSchedule& sched) {
  detail::check_same_shape(x0, eps, "forward_sample: eps shape differs from x0");
  detail::check_step(sched, t);
  const double ab = sched.alpha_bar_at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

/// One ancestral reverse step. The mean is
///   (x_t - beta_t / sqrt(1 - abar_t) * eps_pred) / sqrt(alpha_t)
/// and sigma_t * noise is added for t > 1 only.
template <typename Dx, typename De, typename Dn>
Eigen::MatrixXd posterior_step(const Eigen::MatrixBase<Dx>& x_t,
                               const Eigen::MatrixBase<De>& eps_pred, int t,
                               const NoiseSchedule& sched,
                               const Eigen::MatrixBase<Dn>& noise) {
  detail::check_same_shape(x_t, eps_pred, "posterior_step: eps_pred shape");
  detail::check_same_shape(x_t, noise, "posterior_step: noise shape");
  detail::check_step(sched, t);
  const double beta = sched.beta_at(t);
  const double ab = sched.alpha_bar_at(t);
  Eigen::MatrixXd mean =
      (x_t - (beta / std::sqrt(1.0 - ab)) * eps_pred) / std::sqrt(sched.alpha_at(t));
  if (t > 1) mean += std::sqrt(sched.sigma2_at(t)) * noise;
  return mean;
}

template <typename Da, typename Db>
double ddpm_loss(const Eigen::MatrixBase<Da>& eps, const Eigen::MatrixBase<Db>& eps_pred) {
  detail::check_same_shape(eps, eps_pred, "ddpm_loss: shape mismatch");
  if (eps.size() == 0) return 0.0;
  return (eps - eps_pred).squaredNorm() / static_cast<double>(eps.size());
}

// eps_pred = denoiser(x_t, t); conditioning context is captured by the callable.
using Denoiser = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, int)>;
// Applied to the iterate after every reverse step: x <- guidance(x, t).
using Guidance = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, int)>;

/// Ancestral sampling from N(0, I) of shape rows x cols down to t = 1.
/// Throws kNumeric once the state or the denoiser output is not finite.
Eigen::MatrixXd sample_loop(const Denoiser& denoiser, Eigen::Index rows,
                            Eigen::Index cols, const NoiseSchedule& sched, Rng& rng,
                            const Guidance& guidance = nullptr);

/// Exact E[eps | x_t] for data x0 ~ N(mu, diag(s2)), broadcast per column.
/// mu and s2 must have one entry per column of x_t (or a single entry).
Denoiser analytic_gaussian_denoiser(const Eigen::VectorXd& mu, const Eigen::VectorXd& s2,
                                    const NoiseSchedule& sched);
Denoiser analytic_gaussian_denoiser(double mu, double s2, const NoiseSchedule& sched);

/// Pulls each row of x towards its nearest candidate (Euclidean, ties to the
/// lowest index): x_i - strength * (x_i - c*_i). candidates[i] holds agent i's
/// candidate latents as rows.
Eigen::MatrixXd guided_step(const Eigen::MatrixXd& x,
                            const std::vector<Eigen::MatrixXd>& candidates,
                            double strength);

// Index of the candidate row nearest to `row`; ties resolve to the lowest index.
int nearest_candidate(const Eigen::RowVectorXd& row, const Eigen::MatrixXd& candidates);

}  // namespace scenegen

#endif  // SCENEGEN_DIFFUSION_HPP_
