#pragma once

#include <array>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "optalarm/geometry.hpp"

namespace optalarm {

inline constexpr int kPathDim = 2;
inline constexpr int kBicycleDim = 6;
inline constexpr int kMaxVehicleDim = 6;
inline constexpr int kMaxJointDim = 2 * kMaxVehicleDim;

/// Per-vehicle state vector; bounded size so rollouts never touch the heap.
using VehicleVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxVehicleDim, 1>;
/// Concatenated two-vehicle state.
using JointVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJointDim, 1>;

/// Position along a fixed path and speed along it. Vector layout (s, v).
struct PathState {
  double s = 0.0;
  double v = 0.0;

  VehicleVector to_vector() const;
  static PathState from_vector(const VehicleVector& x);
};

/// Vector layout (x, y, theta, v, a, omega).
struct BicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double a = 0.0;
  double omega = 0.0;

  VehicleVector to_vector() const;
  static BicycleState from_vector(const VehicleVector& x);
};

/// Arc-length parameterized planar curve made of straight pieces and circular
/// arcs. Positions before the start or past the end extrapolate along the end
/// tangents, so a vehicle can be stepped backward off the modeled piece.
class PathCurve {
 public:
  struct Segment {
    double length;
    double curvature;  // 1/radius, positive turns left, 0 is straight
  };

  PathCurve(Pose start, std::vector<Segment> segments);

  static Segment straight(double length) { return {length, 0.0}; }
  static Segment arc(double radius, double angle);

  Pose pose_at(double s) const;
  double total_length() const { return total_length_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const Pose& start() const { return starts_.front(); }

 private:
  std::vector<Segment> segments_;
  std::vector<Pose> starts_;     // pose at the beginning of each segment
  std::vector<double> offsets_;  // arc length at the beginning of each segment
  Pose end_;
  double total_length_ = 0.0;
};

enum class ModelKind { path, bicycle };

struct VehicleShape {
  double length = OrientedRect::kDefaultLength;
  double width = OrientedRect::kDefaultWidth;
};

/// Discrete-time Markov motion model with additive Gaussian process noise.
class MotionModel {
 public:
  static MotionModel path(PathCurve curve, double dt,
                          const Eigen::MatrixXd& process_cov,
                          VehicleShape shape = {});
  /// `substeps` splits each Euler step into that many equal pieces.
  static MotionModel bicycle(double dt, const Eigen::MatrixXd& process_cov,
                             int substeps = 1, VehicleShape shape = {});

  ModelKind kind() const { return kind_; }
  int dim() const { return kind_ == ModelKind::path ? kPathDim : kBicycleDim; }
  double dt() const { return dt_; }
  int substeps() const { return substeps_; }
  const VehicleShape& shape() const { return shape_; }
  const Eigen::MatrixXd& process_cov() const { return process_cov_; }
  /// Null for the bicycle model.
  const PathCurve* curve() const { return curve_.get(); }
  bool noiseless() const { return active_.empty(); }

  template <class Gen>
  VehicleVector sample_noise(Gen& rng) const {
    VehicleVector out = VehicleVector::Zero(dim());
    std::normal_distribution<double> normal;
    for (int col : active_) {
      out.noalias() += noise_factor_.col(col) * normal(rng);
    }
    return out;
  }

  VehicleVector zero_noise() const { return VehicleVector::Zero(dim()); }

 private:
  MotionModel(ModelKind kind, double dt, const Eigen::MatrixXd& process_cov,
              int substeps, VehicleShape shape,
              std::shared_ptr<const PathCurve> curve);

  ModelKind kind_;
  double dt_;
  int substeps_;
  VehicleShape shape_;
  Eigen::MatrixXd process_cov_;
  Eigen::MatrixXd noise_factor_;
  std::vector<int> active_;  // nonzero columns of noise_factor_
  std::shared_ptr<const PathCurve> curve_;
};

using ModelPair = std::array<MotionModel, 2>;

/// Default process noise per 0.1 s step: 0.05 m on s and 0.2 m/s on v.
Eigen::MatrixXd default_path_process_cov();
/// Default process noise per 0.1 s step: 0.3 m/s^2 on a and 0.05 rad/s on
/// omega; no direct noise on position, heading or speed.
Eigen::MatrixXd default_bicycle_process_cov();

/// F with F F^T = cov, via pivoted LDL^T so semidefinite inputs work.
/// Throws std::invalid_argument when cov is not symmetric PSD within `tol`
/// (relative to its largest diagonal entry).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double tol = 1e-9);

/// Deterministic transition followed by additive noise.
VehicleVector step(const VehicleVector& state, const MotionModel& model,
                   const VehicleVector& noise);

/// Inverse of the deterministic transition followed by additive noise.
VehicleVector step_backward(const VehicleVector& state,
                            const MotionModel& model,
                            const VehicleVector& noise);

/// Vehicle rectangle, grown by `margin` on every side.
OrientedRect footprint(const VehicleVector& state, const MotionModel& model,
                       double margin = 0.0);

/// Gaussian belief over the joint state of two vehicles.
class JointBelief {
 public:
  JointBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
              ModelPair models);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// Square-root factor of the covariance.
  const Eigen::MatrixXd& factor() const { return factor_; }
  const ModelPair& models() const { return models_; }
  int offset(int vehicle) const { return vehicle == 0 ? 0 : models_[0].dim(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  ModelPair models_;
};

VehicleVector vehicle_part(const JointVector& joint, const ModelPair& models,
                           int vehicle);

template <class Gen>
JointVector sample_initial(const JointBelief& belief, Gen& rng) {
  std::normal_distribution<double> normal;
  JointVector z(belief.dim());
  for (int i = 0; i < belief.dim(); ++i) z[i] = normal(rng);
  JointVector out = belief.mean();
  out.noalias() += belief.factor() * z;
  return out;
}

struct SigmaPoint {
  double weight;
  Eigen::VectorXd point;
};

/// Symmetric 2n+1 point set: the mean (weight kappa/(n+kappa)) and
/// mean +/- sqrt(n+kappa) times each factor column (weight 1/(2(n+kappa))).
/// kappa = 0 puts the points at mean +/- sqrt(n) columns. Requires n+kappa > 0.
std::vector<SigmaPoint> sigma_points(const JointBelief& belief,
                                     double kappa = 0.0);

}  // namespace optalarm
