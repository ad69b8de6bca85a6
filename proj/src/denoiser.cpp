#include "scenegen/nn/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scenegen::nn {

Mask cdb_mask(CdbMode mode, int n) {
  if (mode == CdbMode::kCentralized) return Mask::Constant(n, n, true);
  Mask m = Mask::Constant(n, n, false);
  for (int i = 0; i < n; ++i) m(i, i) = true;
  return m;
}

std::vector<int> canonical_order(const std::vector<AgentInit>& agents) {
  std::vector<int> order(agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (agents[a].x != agents[b].x) return agents[a].x < agents[b].x;
    return agents[a].y > agents[b].y;
  });
  return order;
}

Mask MapTokens::lane_mask() const {
  const int p = size();
  Mask m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = lane[i] == lane[j];
  return m;
}

MapTokens make_map_tokens(const VectorMap& normalized_map, double spacing) {
  std::vector<Eigen::Matrix<double, 1, kMapFeatures>> rows;
  MapTokens tokens;
  for (std::size_t li = 0; li < normalized_map.lanes.size(); ++li) {
    const Lane& lane = normalized_map.lanes[li];
    std::vector<double> stations;
    if (spacing > 0.0) {
      const int n = static_cast<int>(std::floor(lane.length() / spacing));
      for (int k = 0; k <= n; ++k) stations.push_back(k * spacing);
      if (lane.length() - stations.back() > 1e-9) stations.push_back(lane.length());
    } else {
      for (int k = 0; k < lane.size(); ++k) stations.push_back(lane.cum_s[k]);
    }
    for (double s : stations) {
      const Vec2 p = centerline_at(lane, s);
      const double h = heading_at(lane, s);
      const auto* begin = lane.cum_s.data();
      const auto k = std::lower_bound(begin, begin + lane.cum_s.size(), s) - begin;
      const double kappa = lane.curvature[std::min<Eigen::Index>(k, lane.size() - 1)];
      Eigen::Matrix<double, 1, kMapFeatures> f;
      f << p.x(), p.y(), std::cos(h), std::sin(h), std::clamp(kappa, -10.0, 10.0);
      rows.push_back(f);
      tokens.lane.push_back(static_cast<int>(li));
    }
  }
  tokens.features.resize(static_cast<Eigen::Index>(rows.size()), kMapFeatures);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    tokens.features.row(static_cast<Eigen::Index>(i)) = rows[i];
  }
  return tokens;
}

Mask m2a_mask(const Eigen::MatrixXd& agent_xy, const MapTokens& map, double radius) {
  const Eigen::Index n = agent_xy.rows();
  const int p = map.size();
  Mask m = Mask::Constant(n, p, false);
  const double r2 = radius * radius;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    bool any = false;
    for (int j = 0; j < p; ++j) {
      const double d2 = (map.features.block<1, 2>(j, 0) - agent_xy.row(i).head<2>()).squaredNorm();
      if (d2 <= r2) {
        m(i, j) = true;
        any = true;
      }
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    if (!any && p > 0) m(i, best_j) = true;
  }
  return m;
}

Mask candidate_owner_mask(const std::vector<int>& counts) {
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  Mask m = Mask::Constant(static_cast<Eigen::Index>(counts.size()), total, false);
  int col = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) m(static_cast<Eigen::Index>(i), col + k) = true;
    col += counts[i];
  }
  return m;
}

Eigen::RowVectorXd sinusoidal_embedding(double position, int width) {
  Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(width);
  const int half = width / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / std::max(half, 1));
    e[2 * i] = std::sin(position * freq);
    e[2 * i + 1] = std::cos(position * freq);
  }
  return e;
}

std::vector<AttentionVariance> attention_variance(const std::vector<AttentionTrace>& per_step) {
  std::vector<AttentionVariance> out;
  if (per_step.empty()) return out;
  const std::size_t blocks = per_step.front().scores.size();
  const double steps = static_cast<double>(per_step.size());
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto& first = per_step.front().scores[b];
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(first.rows(), first.cols());
    Eigen::ArrayXXd sq = sum;
    for (const auto& trace : per_step) {
      const Eigen::ArrayXXd s = trace.scores[b].array();
      sum += s;
      sq += s * s;
    }
    const Eigen::ArrayXXd mean = sum / steps;
    const Eigen::ArrayXXd var = (sq / steps - mean * mean).max(0.0);
    out.push_back({per_step.front().names[b], var.mean()});
  }
  return out;
}

}  // namespace scenegen::nn
