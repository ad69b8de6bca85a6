#include "scenegen/diffusion.hpp"

#include <limits>

namespace scenegen {

NoiseSchedule schedule_from_betas(const Eigen::VectorXd& beta) {
  NoiseSchedule s;
  s.t_max = static_cast<int>(beta.size());
  s.beta = beta;
  s.alpha = 1.0 - beta.array();
  s.alpha_bar.resize(s.t_max);
  s.sigma2.resize(s.t_max);
  double prod = 1.0;
  for (int i = 0; i < s.t_max; ++i) {
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
  }
  s.sigma2[0] = beta[0];
  for (int i = 1; i < s.t_max; ++i) {
    s.sigma2[i] = beta[i] * (1.0 - s.alpha_bar[i - 1]) / (1.0 - s.alpha_bar[i]);
  }
  return s;
}

NoiseSchedule make_schedule(int t_max, double beta_start, double beta_end,
                            ScheduleKind kind) {
  if (t_max < 1 || !(beta_start > 0.0) || !(beta_start <= beta_end) ||
      !(beta_end < 1.0)) {
    throw Error(ErrorCode::kInvalidScheduleParams,
                "need t_max >= 1 and 0 < beta_start <= beta_end < 1");
  }
  Eigen::VectorXd beta(t_max);
  if (t_max == 1) {
    beta[0] = beta_start;
  } else {
    for (int i = 0; i < t_max; ++i) {
      beta[i] = beta_start + (beta_end - beta_start) * i / (t_max - 1);
    }
  }
  NoiseSchedule s = schedule_from_betas(beta);
  s.kind = kind;
  return s;
}

Eigen::MatrixXd sample_loop(const Denoiser& denoiser, Eigen::Index rows,
                            Eigen::Index cols, const NoiseSchedule& sched, Rng& rng,
                            const Guidance& guidance) {
  Eigen::MatrixXd x = randn(rows, cols, rng);
  for (int t = sched.t_max; t >= 1; --t) {
    const Eigen::MatrixXd eps_pred = denoiser(x, t);
    if (!eps_pred.allFinite()) throw Error(ErrorCode::kNumeric, "denoiser output is not finite");
    const Eigen::MatrixXd noise =
        t > 1 ? randn(rows, cols, rng) : Eigen::MatrixXd::Zero(rows, cols);
    x = posterior_step(x, eps_pred, t, sched, noise);
    if (guidance) x = guidance(x, t);
    if (!x.allFinite()) throw Error(ErrorCode::kNumeric, "sampler state is not finite");
  }
  return x;
}

Denoiser analytic_gaussian_denoiser(const Eigen::VectorXd& mu, const Eigen::VectorXd& s2,
                                    const NoiseSchedule& sched) {
  if (mu.size() != s2.size() || mu.size() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "mu and s2 must have equal, non-zero size");
  }
  if ((s2.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidConfig, "target variance must be positive");
  }
  return [mu, s2, sched](const Eigen::MatrixXd& x_t, int t) {
    const double ab = sched.alpha_bar_at(t);
    Eigen::MatrixXd eps(x_t.rows(), x_t.cols());
    for (Eigen::Index j = 0; j < x_t.cols(); ++j) {
      const Eigen::Index c = mu.size() == 1 ? 0 : j;
      const double denom = ab * s2[c] + 1.0 - ab;
      eps.col(j) = std::sqrt(1.0 - ab) *
                   (x_t.col(j).array() - std::sqrt(ab) * mu[c]).matrix() / denom;
    }
    return eps;
  };
}

Denoiser analytic_gaussian_denoiser(double mu, double s2, const NoiseSchedule& sched) {
  return analytic_gaussian_denoiser(Eigen::VectorXd::Constant(1, mu),
                                    Eigen::VectorXd::Constant(1, s2), sched);
}

int nearest_candidate(const Eigen::RowVectorXd& row, const Eigen::MatrixXd& candidates) {
  if (candidates.rows() == 0) {
    throw Error(ErrorCode::kEmptyCandidates, "candidate set is empty");
  }
  if (candidates.cols() != row.size()) {
    throw Error(ErrorCode::kShapeMismatch, "candidate latent width differs from x");
  }
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < candidates.rows(); ++k) {
    const double d2 = (candidates.row(k) - row).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(k);
    }
  }
  return best;
}

Eigen::MatrixXd guided_step(const Eigen::MatrixXd& x,
                            const std::vector<Eigen::MatrixXd>& candidates,
                            double strength) {
  if (static_cast<Eigen::Index>(candidates.size()) != x.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "one candidate set per row of x required");
  }
  Eigen::MatrixXd out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    const int k = nearest_candidate(row, candidates[i]);
    out.row(i) = row - strength * (row - candidates[i].row(k));
  }
  return out;
}

}  // namespace scenegen
