#include "optalarm/features.hpp"

#include <algorithm>
#include <cmath>

namespace optalarm {

namespace {

struct Kinematics {
  Pose pose;
  double vx, vy;
};

Kinematics kinematics_of(const VehicleVector& x, const MotionModel& model) {
  const Pose pose = footprint(x, model).center();
  const double speed = model.kind() == ModelKind::path ? x[1] : x[3];
  return {pose, speed * std::cos(pose.theta), speed * std::sin(pose.theta)};
}

int extra_components(const MotionModel& m) {
  return m.kind() == ModelKind::path ? 2 : 3;
}

}  // namespace

int feature_dim(const ModelPair& models, const FeatureOptions& options) {
  const int n = models[0].dim() + models[1].dim();
  return 6 + extra_components(models[0]) + extra_components(models[1]) +
         n * (n + 1) / 2 + (options.ttc_surrogate ? 1 : 0);
}

Eigen::VectorXd extract_features(const JointBelief& belief,
                                 const FeatureOptions& options) {
  const auto& models = belief.models();
  const JointVector mean = belief.mean();
  const VehicleVector m1 = vehicle_part(mean, models, 0);
  const VehicleVector m2 = vehicle_part(mean, models, 1);
  const Kinematics k1 = kinematics_of(m1, models[0]);
  const Kinematics k2 = kinematics_of(m2, models[1]);

  const double c = std::cos(k1.pose.theta);
  const double s = std::sin(k1.pose.theta);
  auto to_local = [c, s](double x, double y) {
    return std::pair{c * x + s * y, -s * x + c * y};
  };

  Eigen::VectorXd f(feature_dim(models, options));
  int i = 0;
  const auto [dx, dy] = to_local(k2.pose.x - k1.pose.x, k2.pose.y - k1.pose.y);
  const double dtheta = k2.pose.theta - k1.pose.theta;
  f[i++] = dx;
  f[i++] = dy;
  f[i++] = std::cos(dtheta);
  f[i++] = std::sin(dtheta);
  const auto [dvx, dvy] = to_local(k2.vx - k1.vx, k2.vy - k1.vy);
  f[i++] = dvx;
  f[i++] = dvy;

  for (const auto* part : {&m1, &m2}) {
    if (part->size() == kPathDim) {
      f[i++] = (*part)[0];
      f[i++] = (*part)[1];
    } else {
      f[i++] = (*part)[3];
      f[i++] = (*part)[4];
      f[i++] = (*part)[5];
    }
  }

  const auto& cov = belief.covariance();
  for (int r = 0; r < cov.rows(); ++r) {
    for (int col = r; col < cov.cols(); ++col) f[i++] = cov(r, col);
  }

  if (options.ttc_surrogate) {
    const double range = std::hypot(dx, dy);
    const double closing = range > 0.0 ? -(dx * dvx + dy * dvy) / range : 0.0;
    f[i++] = closing > 0.0 ? std::min(range / closing, kTtcSurrogateCap)
                           : kTtcSurrogateCap;
  }
  return f;
}

}  // namespace optalarm
