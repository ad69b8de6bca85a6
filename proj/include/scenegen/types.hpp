#ifndef SCENEGEN_TYPES_HPP_
#define SCENEGEN_TYPES_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenegen {

using Vec2 = Eigen::Vector2d;

// Polylines and trajectories are stored as K x 2 matrices, one point per row.
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class ErrorCode {
  kDegenerateLane,
  kNonPositiveHorizon,
  kHorizonExceeded,
  kNoReferenceLane,
  kInvalidScheduleParams,
  kShapeMismatch,
  kEmptyCandidates,
  kInsufficientSamples,
  kModelNotFitted,
  kGraphNotRecorded,
  kEdgeMismatch,
  kInvalidPerturbation,
  kInvalidConfig,
  kEmptyScene,
  kParse,
  kNumeric,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

// Initial state of one agent. Positions are meters in the map frame unless a
// SceneNormalizer has been applied.
struct AgentInit {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  int type = 0;

  Vec2 position() const { return {x, y}; }
};

struct Scene {
  std::vector<AgentInit> agents;
  int map_ref = 0;
};

// Row 0 holds the initial position; rows 1..H are the future steps.
using Trajectory = Points2;

}  // namespace scenegen

#endif  // SCENEGEN_TYPES_HPP_
