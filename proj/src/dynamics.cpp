#include "optalarm/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>

namespace optalarm {

VehicleVector PathState::to_vector() const {
  VehicleVector out(kPathDim);
  out << s, v;
  return out;
}

PathState PathState::from_vector(const VehicleVector& x) {
  if (x.size() != kPathDim) throw std::invalid_argument("path state needs 2 entries");
  return {x[0], x[1]};
}

VehicleVector BicycleState::to_vector() const {
  VehicleVector out(kBicycleDim);
  out << x, y, theta, v, a, omega;
  return out;
}

BicycleState BicycleState::from_vector(const VehicleVector& x) {
  if (x.size() != kBicycleDim) throw std::invalid_argument("bicycle state needs 6 entries");
  return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

// ---------------------------------------------------------------------------
// PathCurve

namespace {

Pose advance(const Pose& p, double len, double curvature) {
  if (curvature == 0.0) {
    return {p.x + len * std::cos(p.theta), p.y + len * std::sin(p.theta),
            p.theta};
  }
  const double heading = p.theta + curvature * len;
  return {p.x + (std::sin(heading) - std::sin(p.theta)) / curvature,
          p.y - (std::cos(heading) - std::cos(p.theta)) / curvature, heading};
}

}  // namespace

PathCurve::Segment PathCurve::arc(double radius, double angle) {
  if (!(radius > 0.0)) throw std::invalid_argument("arc radius must be positive");
  return {radius * std::abs(angle), angle >= 0.0 ? 1.0 / radius : -1.0 / radius};
}

PathCurve::PathCurve(Pose start, std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("path needs at least one segment");
  Pose cursor = start;
  for (const auto& seg : segments_) {
    if (!(seg.length > 0.0) || !std::isfinite(seg.curvature)) {
      throw std::invalid_argument("path segment must have positive length");
    }
    starts_.push_back(cursor);
    offsets_.push_back(total_length_);
    cursor = advance(cursor, seg.length, seg.curvature);
    total_length_ += seg.length;
  }
  end_ = cursor;
}

Pose PathCurve::pose_at(double s) const {
  if (s <= 0.0) return advance(starts_.front(), s, 0.0);
  if (s >= total_length_) return advance(end_, s - total_length_, 0.0);
  std::size_t i = segments_.size() - 1;
  while (offsets_[i] > s) --i;
  return advance(starts_[i], s - offsets_[i], segments_[i].curvature);
}

// ---------------------------------------------------------------------------
// MotionModel

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double tol) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
  if (!cov.allFinite()) throw std::invalid_argument("covariance must be finite");
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sym);
  if (ldlt.info() != Eigen::Success) {
    throw std::invalid_argument("covariance factorization failed");
  }
  Eigen::VectorXd d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < -tol * scale) {
      throw std::invalid_argument("covariance is not positive semidefinite");
    }
    d[i] = std::sqrt(std::max(d[i], 0.0));
  }
  Eigen::MatrixXd lower = ldlt.matrixL();
  Eigen::MatrixXd factor = ldlt.transpositionsP().transpose() * lower;
  return factor * d.asDiagonal();
}

MotionModel::MotionModel(ModelKind kind, double dt,
                         const Eigen::MatrixXd& process_cov, int substeps,
                         VehicleShape shape,
                         std::shared_ptr<const PathCurve> curve)
    : kind_(kind),
      dt_(dt),
      substeps_(substeps),
      shape_(shape),
      process_cov_(process_cov),
      curve_(std::move(curve)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (!(shape.length > 0.0) || !(shape.width > 0.0)) {
    throw std::invalid_argument("vehicle dimensions must be positive");
  }
  if (process_cov.rows() != dim() || process_cov.cols() != dim()) {
    throw std::invalid_argument("process covariance has wrong dimension");
  }
  noise_factor_ = psd_factor(process_cov);
  for (int c = 0; c < dim(); ++c) {
    if (noise_factor_.col(c).cwiseAbs().maxCoeff() > 0.0) active_.push_back(c);
  }
}

MotionModel MotionModel::path(PathCurve curve, double dt,
                              const Eigen::MatrixXd& process_cov,
                              VehicleShape shape) {
  return MotionModel(ModelKind::path, dt, process_cov, 1, shape,
                     std::make_shared<const PathCurve>(std::move(curve)));
}

MotionModel MotionModel::bicycle(double dt, const Eigen::MatrixXd& process_cov,
                                 int substeps, VehicleShape shape) {
  return MotionModel(ModelKind::bicycle, dt, process_cov, substeps, shape,
                     nullptr);
}

Eigen::MatrixXd default_path_process_cov() {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(kPathDim, kPathDim);
  q(0, 0) = 0.05 * 0.05;
  q(1, 1) = 0.2 * 0.2;
  return q;
}

Eigen::MatrixXd default_bicycle_process_cov() {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(kBicycleDim, kBicycleDim);
  q(4, 4) = 0.3 * 0.3;
  q(5, 5) = 0.05 * 0.05;
  return q;
}

// ---------------------------------------------------------------------------
// Transitions

VehicleVector step(const VehicleVector& state, const MotionModel& model,
                   const VehicleVector& noise) {
  VehicleVector x = state;
  if (model.kind() == ModelKind::path) {
    x[0] += x[1] * model.dt();
  } else {
    const double h = model.dt() / model.substeps();
    for (int k = 0; k < model.substeps(); ++k) {
      x[0] += x[3] * std::cos(x[2]) * h;
      x[1] += x[3] * std::sin(x[2]) * h;
      x[2] += x[5] * h;
      x[3] += x[4] * h;
    }
  }
  x += noise;
  return x;
}

VehicleVector step_backward(const VehicleVector& state,
                            const MotionModel& model,
                            const VehicleVector& noise) {
  VehicleVector x = state;
  if (model.kind() == ModelKind::path) {
    x[0] -= x[1] * model.dt();
  } else {
    const double h = model.dt() / model.substeps();
    for (int k = 0; k < model.substeps(); ++k) {
      x[3] -= x[4] * h;
      x[2] -= x[5] * h;
      x[1] -= x[3] * std::sin(x[2]) * h;
      x[0] -= x[3] * std::cos(x[2]) * h;
    }
  }
  x += noise;
  return x;
}

OrientedRect footprint(const VehicleVector& state, const MotionModel& model,
                       double margin) {
  const Pose pose = model.kind() == ModelKind::path
                        ? model.curve()->pose_at(state[0])
                        : Pose(state[0], state[1], state[2]);
  return OrientedRect(pose, model.shape().length + 2.0 * margin,
                      model.shape().width + 2.0 * margin);
}

// ---------------------------------------------------------------------------
// Beliefs

JointBelief::JointBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                         ModelPair models)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      models_(std::move(models)) {
  const int expected = models_[0].dim() + models_[1].dim();
  if (mean_.size() != expected || covariance_.rows() != expected ||
      covariance_.cols() != expected) {
    throw std::invalid_argument("belief dimension does not match motion models");
  }
  if (!mean_.allFinite()) throw std::invalid_argument("belief mean must be finite");
  factor_ = psd_factor(covariance_);
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
}

VehicleVector vehicle_part(const JointVector& joint, const ModelPair& models,
                           int vehicle) {
  const int off = vehicle == 0 ? 0 : models[0].dim();
  return joint.segment(off, models[vehicle].dim());
}

std::vector<SigmaPoint> sigma_points(const JointBelief& belief, double kappa) {
  const int n = belief.dim();
  const double spread = n + kappa;
  if (!(spread > 0.0)) throw std::invalid_argument("n + kappa must be positive");
  const double scale = std::sqrt(spread);
  const double w = 0.5 / spread;
  std::vector<SigmaPoint> points;
  points.reserve(2 * n + 1);
  points.push_back({kappa / spread, belief.mean()});
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd delta = scale * belief.factor().col(i);
    points.push_back({w, belief.mean() + delta});
    points.push_back({w, belief.mean() - delta});
  }
  return points;
}

}  // namespace optalarm
