#ifndef SCENEGEN_NN_ATTENTION_HPP_
#define SCENEGEN_NN_ATTENTION_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "scenegen/nn/graph.hpp"
#include "scenegen/types.hpp"

namespace scenegen::nn {

enum class CdbMode { kCentralized, kDecentralized };

// Centralized: every agent sees every agent. Decentralized: self only.
Mask cdb_mask(CdbMode mode, int n);

// Stable order by x ascending, then y descending, then original index.
std::vector<int> canonical_order(const std::vector<AgentInit>& agents);

inline std::vector<AgentInit> apply_order(const std::vector<AgentInit>& agents,
                                          const std::vector<int>& order) {
  std::vector<AgentInit> out;
  out.reserve(order.size());
  for (int i : order) out.push_back(agents[i]);
  return out;
}

/// Softmax attention probabilities for queries q against keys k, scaled by
/// 1/sqrt(d_k).
template <typename Dq, typename Dk>
MatrixT<typename Dq::Scalar> attention_probs(const Eigen::MatrixBase<Dq>& q,
                                             const Eigen::MatrixBase<Dk>& k,
                                             const Mask& mask) {
  using Scalar = typename Dq::Scalar;
  if (q.cols() != k.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "query and key widths differ");
  }
  const Scalar inv = Scalar(1) / std::sqrt(static_cast<Scalar>(q.cols()));
  MatrixT<Scalar> logits = q * k.transpose();
  logits = logits * inv;
  return masked_softmax(logits, mask);
}

template <typename Dq, typename Dk, typename Dv>
MatrixT<typename Dq::Scalar> attention(const Eigen::MatrixBase<Dq>& q,
                                       const Eigen::MatrixBase<Dk>& k,
                                       const Eigen::MatrixBase<Dv>& v, const Mask& mask) {
  if (k.rows() != v.rows()) throw Error(ErrorCode::kShapeMismatch, "key/value counts differ");
  return attention_probs(q, k, mask) * v;
}

/// (softmax(q1 k1^T / sqrt(d)) - lambda * softmax(q2 k2^T / sqrt(d))) v over
/// mask-admitted keys.
template <typename D1, typename D2, typename D3, typename D4, typename Dv>
MatrixT<typename D1::Scalar> diff_attention(const Eigen::MatrixBase<D1>& q1,
                                            const Eigen::MatrixBase<D2>& k1,
                                            const Eigen::MatrixBase<D3>& q2,
                                            const Eigen::MatrixBase<D4>& k2,
                                            const Eigen::MatrixBase<Dv>& v,
                                            typename D1::Scalar lambda, const Mask& mask) {
  if (q1.rows() != q2.rows() || k1.rows() != k2.rows() || k1.rows() != v.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "differential attention operand shapes");
  }
  const auto p1 = attention_probs(q1, k1, mask);
  const auto p2 = attention_probs(q2, k2, mask);
  return (p1 - lambda * p2) * v;
}

}  // namespace scenegen::nn

#endif  // SCENEGEN_NN_ATTENTION_HPP_
