#pragma once

#include <Eigen/Core>

#include "optalarm/dynamics.hpp"

namespace optalarm {

struct FeatureOptions {
  /// Appends a clipped range / closing-speed surrogate of time-to-collision.
  bool ttc_surrogate = false;
};

inline constexpr double kTtcSurrogateCap = 10.0;

/// Explanatory variables for a belief, in this order:
///   [0..3]  pose of vehicle 2 in vehicle 1's frame: dx, dy, cos dtheta,
///           sin dtheta
///   [4..5]  velocity of vehicle 2 minus vehicle 1, in vehicle 1's frame
///   [6..]   non-pose mean components, vehicle 1 then vehicle 2:
///           path (s, v), bicycle (v, a, omega)
///   then    covariance upper triangle, row-major (i <= j)
///   last    ttc surrogate in [0, kTtcSurrogateCap] when enabled
/// Bicycle beliefs give 12 + 78 = 90 values, path beliefs 10 + 10 = 20.
Eigen::VectorXd extract_features(const JointBelief& belief,
                                 const FeatureOptions& options = {});

int feature_dim(const ModelPair& models, const FeatureOptions& options = {});

}  // namespace optalarm
