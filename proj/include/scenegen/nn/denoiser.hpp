#ifndef SCENEGEN_NN_DENOISER_HPP_
#define SCENEGEN_NN_DENOISER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scenegen/geometry.hpp"
#include "scenegen/nn/attention.hpp"
#include "scenegen/nn/graph.hpp"

namespace scenegen::nn {

enum class AttentionKind { kDifferential, kStandard };

struct DenoiserConfig {
  int width = 32;
  int layers = 2;
  double lambda_init = 0.5;
  double m2a_radius = 2.0;
  int agent_types = 4;
  int ff_mult = 2;
  int latent_dim = 10;  // trajectory denoiser only
  AttentionKind attention = AttentionKind::kDifferential;
};

// Map points resampled along each lane. Features per token:
// x, y, cos(heading), sin(heading), curvature (all in the normalized frame).
struct MapTokens {
  Eigen::MatrixXd features;
  std::vector<int> lane;

  int size() const { return static_cast<int>(features.rows()); }
  Eigen::MatrixXd positions() const { return features.leftCols(2); }
  // Tokens attend only to tokens of the same lane.
  Mask lane_mask() const;
};

inline constexpr int kMapFeatures = 5;

MapTokens make_map_tokens(const VectorMap& normalized_map, double spacing);

// Agent i sees map tokens within `radius` of its position; an empty row
// falls back to the single nearest token (lowest index on ties).
Mask m2a_mask(const Eigen::MatrixXd& agent_xy, const MapTokens& map, double radius);

// Agent i sees only its own block of rows in the stacked candidate matrix.
Mask candidate_owner_mask(const std::vector<int>& counts);

// Fixed sinusoidal embedding of an integer position into `width` channels.
Eigen::RowVectorXd sinusoidal_embedding(double position, int width);

// One effective attention matrix per block, in forward order.
struct AttentionTrace {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> scores;
};

namespace detail {

template <typename Scalar>
void add_linear(ParameterSet<Scalar>& ps, const std::string& prefix, int in, int out,
                std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  MatrixT<Scalar> w(in, out);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
  ps.add(prefix + ".w", std::move(w));
  ps.add(prefix + ".b", MatrixT<Scalar>::Zero(1, out));
}

template <typename Scalar>
void add_attention(ParameterSet<Scalar>& ps, const std::string& prefix, int width,
                   double lambda_init, bool differential, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto square = [&]() {
    MatrixT<Scalar> w(width, width);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
    return w;
  };
  ps.add(prefix + ".wq1", square());
  ps.add(prefix + ".wk1", square());
  if (differential) {
    ps.add(prefix + ".wq2", square());
    ps.add(prefix + ".wk2", square());
    ps.add(prefix + ".lambda", MatrixT<Scalar>::Constant(1, 1, static_cast<Scalar>(lambda_init)));
  }
  ps.add(prefix + ".wv", square());
  ps.add(prefix + ".wo", square());
}

template <typename Scalar>
Var linear(Graph<Scalar>& g, Var x, const std::string& prefix) {
  return g.add_row(g.matmul(x, g.param(prefix + ".w")), g.param(prefix + ".b"));
}

// Attention from query tokens onto key/value tokens, followed by an output
// projection. Uses the differential form when the block owns a lambda.
template <typename Scalar>
Var attention_block(Graph<Scalar>& g, const ParameterSet<Scalar>& ps, Var query, Var kv,
                    const Mask& mask, const std::string& prefix, AttentionTrace* trace) {
  const Scalar inv = Scalar(1) / std::sqrt(static_cast<Scalar>(g.value(query).cols()));
  auto probs = [&](const char* qn, const char* kn) {
    Var q = g.matmul(query, g.param(prefix + qn));
    Var k = g.matmul(kv, g.param(prefix + kn));
    return g.masked_softmax(g.scale(g.matmul_nt(q, k), inv), mask);
  };
  Var p = probs(".wq1", ".wk1");
  if (ps.contains(prefix + ".lambda")) {
    Var p2 = probs(".wq2", ".wk2");
    p = g.sub(p, g.scale_by(p2, g.param(prefix + ".lambda")));
  }
  if (trace != nullptr) {
    trace->names.push_back(prefix);
    trace->scores.push_back(g.value(p).template cast<double>());
  }
  Var v = g.matmul(kv, g.param(prefix + ".wv"));
  return g.matmul(g.matmul(p, v), g.param(prefix + ".wo"));
}

template <typename Scalar>
Var feed_forward(Graph<Scalar>& g, Var x, const std::string& prefix) {
  return linear(g, g.silu(linear(g, x, prefix + ".ff1")), prefix + ".ff2");
}

template <typename Scalar>
void add_map_encoder(ParameterSet<Scalar>& ps, const DenoiserConfig& cfg,
                     std::mt19937_64& rng) {
  add_linear(ps, "map.in", kMapFeatures, cfg.width, rng);
  add_attention(ps, "map.self", cfg.width, cfg.lambda_init,
                cfg.attention == AttentionKind::kDifferential, rng);
}

// Per-point projection followed by one lane-local self-attention layer.
template <typename Scalar>
Var encode_map(Graph<Scalar>& g, const ParameterSet<Scalar>& ps, const MapTokens& map,
               AttentionTrace* trace) {
  Var feats = g.constant(map.features.template cast<Scalar>());
  Var h = g.silu(linear(g, feats, "map.in"));
  return g.add(h, attention_block(g, ps, h, h, map.lane_mask(), "map.self", trace));
}

template <typename Scalar>
Var step_embedding(Graph<Scalar>& g, int t, int width) {
  return linear(g, g.constant(sinusoidal_embedding(t, width).template cast<Scalar>()),
                "step.proj");
}

template <typename Scalar>
MatrixT<Scalar> positional_rows(int n, int width) {
  MatrixT<Scalar> pos(n, width);
  for (int i = 0; i < n; ++i) pos.row(i) = sinusoidal_embedding(i, width).cast<Scalar>();
  return pos;
}

}  // namespace detail

// Inputs for the initialization denoiser. Agents must already be in canonical
// order; x_t carries the noisy continuous channels (x, y, theta / pi, v).
struct InitInput {
  Eigen::MatrixXd x_t;
  std::vector<int> types;
  int t = 1;
  const MapTokens* map = nullptr;
  Mask a2a;
  Mask m2a;
};

template <typename Scalar = double>
class InitDenoiser {
 public:
  static constexpr int kChannels = 4;

  InitDenoiser(const DenoiserConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    std::mt19937_64 rng(seed);
    const bool diff = cfg.attention == AttentionKind::kDifferential;
    detail::add_map_encoder(params_, cfg, rng);
    detail::add_linear(params_, "agent.in", kChannels, cfg.width, rng);
    add_type_table(rng);
    detail::add_linear(params_, "step.proj", cfg.width, cfg.width, rng);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "layer" + std::to_string(l);
      detail::add_attention(params_, p + ".a2a", cfg.width, cfg.lambda_init, diff, rng);
      detail::add_attention(params_, p + ".m2a", cfg.width, cfg.lambda_init, diff, rng);
      detail::add_linear(params_, p + ".ff1", cfg.width, cfg.ff_mult * cfg.width, rng);
      detail::add_linear(params_, p + ".ff2", cfg.ff_mult * cfg.width, cfg.width, rng);
    }
    detail::add_linear(params_, "out", cfg.width, kChannels, rng);
  }

  const DenoiserConfig& config() const { return cfg_; }
  ParameterSet<Scalar>& params() { return params_; }
  const ParameterSet<Scalar>& params() const { return params_; }

  // Records the forward pass on g (which must be bound to params()).
  Var forward(Graph<Scalar>& g, const InitInput& in, AttentionTrace* trace = nullptr) const {
    check(in);
    const int n = static_cast<int>(in.x_t.rows());
    Var mapv = detail::encode_map(g, params_, *in.map, trace);
    Var h = detail::linear(g, g.constant(in.x_t.template cast<Scalar>()), "agent.in");
    h = g.add(h, g.gather_rows(g.param("agent.type_emb"), clamp_types(in.types)));
    h = g.add(h, g.constant(detail::positional_rows<Scalar>(n, cfg_.width)));
    h = g.add_row(h, detail::step_embedding(g, in.t, cfg_.width));
    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "layer" + std::to_string(l);
      h = g.add(h, detail::attention_block(g, params_, h, h, in.a2a, p + ".a2a", trace));
      h = g.add(h, detail::attention_block(g, params_, h, mapv, in.m2a, p + ".m2a", trace));
      h = g.add(h, detail::feed_forward(g, h, p));
    }
    return detail::linear(g, h, "out");
  }

  Eigen::MatrixXd predict(const InitInput& in, AttentionTrace* trace = nullptr) const {
    Graph<Scalar> g(&params_);
    return g.value(forward(g, in, trace)).template cast<double>();
  }

 private:
  void add_type_table(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.width));
    std::uniform_real_distribution<double> dist(-bound, bound);
    MatrixT<Scalar> table(cfg_.agent_types, cfg_.width);
    for (Eigen::Index j = 0; j < table.cols(); ++j)
      for (Eigen::Index i = 0; i < table.rows(); ++i)
        table(i, j) = static_cast<Scalar>(dist(rng));
    params_.add("agent.type_emb", std::move(table));
  }

  std::vector<int> clamp_types(const std::vector<int>& types) const {
    std::vector<int> out(types);
    for (int& c : out) c = std::clamp(c, 0, cfg_.agent_types - 1);
    return out;
  }

  void check(const InitInput& in) const {
    const auto n = in.x_t.rows();
    if (in.map == nullptr || in.map->size() == 0) {
      throw Error(ErrorCode::kShapeMismatch, "init denoiser needs map tokens");
    }
    if (in.x_t.cols() != kChannels || static_cast<Eigen::Index>(in.types.size()) != n ||
        in.a2a.rows() != n || in.a2a.cols() != n || in.m2a.rows() != n ||
        in.m2a.cols() != in.map->size()) {
      throw Error(ErrorCode::kShapeMismatch, "init denoiser input shapes");
    }
  }

  DenoiserConfig cfg_;
  ParameterSet<Scalar> params_;
};

// Inputs for the trajectory denoiser. init_features holds per agent
// (x, y, cos theta, sin theta, v) in the normalized scene frame.
struct TrajInput {
  Eigen::MatrixXd tau_z;
  Eigen::MatrixXd init_features;
  std::vector<int> types;
  int t = 1;
  const MapTokens* map = nullptr;
  std::vector<Eigen::MatrixXd> candidates;  // per agent, K_i x latent_dim
  Mask a2a;
  Mask m2a;
};

inline constexpr int kInitFeatures = 5;

template <typename Scalar = double>
class TrajDenoiser {
 public:
  TrajDenoiser(const DenoiserConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    std::mt19937_64 rng(seed);
    const bool diff = cfg.attention == AttentionKind::kDifferential;
    detail::add_map_encoder(params_, cfg, rng);
    detail::add_linear(params_, "agent.in", cfg.latent_dim, cfg.width, rng);
    detail::add_linear(params_, "agent.init", kInitFeatures, cfg.width, rng);
    add_type_table(rng);
    detail::add_linear(params_, "step.proj", cfg.width, cfg.width, rng);
    detail::add_linear(params_, "cand.in", cfg.latent_dim, cfg.width, rng);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "layer" + std::to_string(l);
      detail::add_attention(params_, p + ".cand", cfg.width, cfg.lambda_init, false, rng);
      detail::add_attention(params_, p + ".a2a", cfg.width, cfg.lambda_init, diff, rng);
      detail::add_attention(params_, p + ".m2a", cfg.width, cfg.lambda_init, diff, rng);
      detail::add_linear(params_, p + ".ff1", cfg.width, cfg.ff_mult * cfg.width, rng);
      detail::add_linear(params_, p + ".ff2", cfg.ff_mult * cfg.width, cfg.width, rng);
    }
    detail::add_linear(params_, "out", cfg.width, cfg.latent_dim, rng);
  }

  const DenoiserConfig& config() const { return cfg_; }
  ParameterSet<Scalar>& params() { return params_; }
  const ParameterSet<Scalar>& params() const { return params_; }

  // Each layer: candidate cross-attention (own candidates only), agent
  // self-attention, map cross-attention, feed-forward.
  Var forward(Graph<Scalar>& g, const TrajInput& in, AttentionTrace* trace = nullptr) const {
    check(in);
    Var mapv = detail::encode_map(g, params_, *in.map, trace);

    std::vector<int> counts;
    Eigen::Index total = 0;
    for (const auto& c : in.candidates) {
      counts.push_back(static_cast<int>(c.rows()));
      total += c.rows();
    }
    MatrixT<Scalar> stacked(total, cfg_.latent_dim);
    Eigen::Index row = 0;
    for (const auto& c : in.candidates) {
      stacked.middleRows(row, c.rows()) = c.template cast<Scalar>();
      row += c.rows();
    }
    const Mask owner = candidate_owner_mask(counts);
    Var cand = g.silu(detail::linear(g, g.constant(std::move(stacked)), "cand.in"));

    Var h = detail::linear(g, g.constant(in.tau_z.template cast<Scalar>()), "agent.in");
    h = g.add(h, detail::linear(g, g.constant(in.init_features.template cast<Scalar>()),
                                "agent.init"));
    h = g.add(h, g.gather_rows(g.param("agent.type_emb"), clamp_types(in.types)));
    h = g.add_row(h, detail::step_embedding(g, in.t, cfg_.width));
    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "layer" + std::to_string(l);
      h = g.add(h, detail::attention_block(g, params_, h, cand, owner, p + ".cand", trace));
      h = g.add(h, detail::attention_block(g, params_, h, h, in.a2a, p + ".a2a", trace));
      h = g.add(h, detail::attention_block(g, params_, h, mapv, in.m2a, p + ".m2a", trace));
      h = g.add(h, detail::feed_forward(g, h, p));
    }
    return detail::linear(g, h, "out");
  }

  Eigen::MatrixXd predict(const TrajInput& in, AttentionTrace* trace = nullptr) const {
    Graph<Scalar> g(&params_);
    return g.value(forward(g, in, trace)).template cast<double>();
  }

 private:
  void add_type_table(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.width));
    std::uniform_real_distribution<double> dist(-bound, bound);
    MatrixT<Scalar> table(cfg_.agent_types, cfg_.width);
    for (Eigen::Index j = 0; j < table.cols(); ++j)
      for (Eigen::Index i = 0; i < table.rows(); ++i)
        table(i, j) = static_cast<Scalar>(dist(rng));
    params_.add("agent.type_emb", std::move(table));
  }

  std::vector<int> clamp_types(const std::vector<int>& types) const {
    std::vector<int> out(types);
    for (int& c : out) c = std::clamp(c, 0, cfg_.agent_types - 1);
    return out;
  }

  void check(const TrajInput& in) const {
    const auto n = in.tau_z.rows();
    if (in.map == nullptr || in.map->size() == 0) {
      throw Error(ErrorCode::kShapeMismatch, "trajectory denoiser needs map tokens");
    }
    if (static_cast<Eigen::Index>(in.candidates.size()) != n) {
      throw Error(ErrorCode::kShapeMismatch, "one candidate set per agent required");
    }
    for (const auto& c : in.candidates) {
      if (c.rows() == 0) throw Error(ErrorCode::kEmptyCandidates, "agent has no candidates");
      if (c.cols() != cfg_.latent_dim) {
        throw Error(ErrorCode::kShapeMismatch, "candidate latent width");
      }
    }
    if (in.tau_z.cols() != cfg_.latent_dim || in.init_features.rows() != n ||
        in.init_features.cols() != kInitFeatures ||
        static_cast<Eigen::Index>(in.types.size()) != n || in.a2a.rows() != n ||
        in.a2a.cols() != n || in.m2a.rows() != n || in.m2a.cols() != in.map->size()) {
      throw Error(ErrorCode::kShapeMismatch, "trajectory denoiser input shapes");
    }
  }

  DenoiserConfig cfg_;
  ParameterSet<Scalar> params_;
};

// Per-block variance across diffusion steps of the effective attention
// scores, averaged over entries.
struct AttentionVariance {
  std::string block;
  double mean_variance = 0.0;
};

std::vector<AttentionVariance> attention_variance(const std::vector<AttentionTrace>& per_step);

}  // namespace scenegen::nn

#endif  // SCENEGEN_NN_DENOISER_HPP_
