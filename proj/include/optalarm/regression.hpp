#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "optalarm/alarms.hpp"
#include "optalarm/features.hpp"

namespace optalarm {

/// Single-hidden-layer ReLU network mapping standardized features to a
/// collision probability. Output is clamped to [0, 1] at prediction time.
///
/// JSON weight file (format "optalarm.mlp", version 1):
///   input_dim, hidden            integers
///   features.ttc_surrogate       bool, FeatureOptions used for training
///   feature_mean, feature_scale  input_dim numbers; z = (f - mean) / scale
///   w1                           hidden rows of input_dim numbers
///   b1                           hidden numbers
///   w2                           hidden numbers
///   b2                           number
/// prediction = clamp(w2 . relu(w1 z + b1) + b2, 0, 1)
class RegressionModel {
 public:
  static constexpr int kFormatVersion = 1;

  RegressionModel() = default;
  /// He-initialized weights, identity feature normalization.
  RegressionModel(int input_dim, int hidden, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }

  /// Unclamped network output.
  double predict_raw(const Eigen::VectorXd& features) const;
  double predict(const Eigen::VectorXd& features) const;

  nlohmann::json to_json() const;
  static RegressionModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static RegressionModel load(const std::string& path);

  FeatureOptions features;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

struct TrainingOptions {
  int hidden = 150;
  double learning_rate = 1e-3;
  int batch_size = 256;
  int max_epochs = 200;
  /// Stop after this many epochs without a validation improvement of `tol`.
  int patience = 10;
  double tol = 1e-6;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct TrainingReport {
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
  int epochs = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

/// Fits the network to (features, labels) by mini-batch Adam on squared
/// error, keeping the weights with the best validation RMSE. `inputs` holds
/// one sample per column. Throws std::runtime_error if the loss goes
/// non-finite.
RegressionModel fit_regression(const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& labels,
                               const TrainingOptions& options,
                               TrainingReport* report = nullptr);

/// Produces the i-th training belief. Must be a pure function of i.
using BeliefGenerator = std::function<JointBelief(std::size_t)>;

struct LabelledSet {
  Eigen::MatrixXd inputs;  // one column per belief
  Eigen::VectorXd labels;  // Monte Carlo collision probability
};

/// Labels beliefs 0..count-1 from `generate` with `oracle_samples`-sample
/// Monte Carlo estimates.
LabelledSet label_beliefs(const BeliefGenerator& generate, std::size_t count,
                          const HorizonConfig& horizon,
                          std::size_t oracle_samples,
                          const FeatureOptions& features, std::uint64_t seed,
                          int threads = 1);

struct TrainedRegression {
  RegressionModel model;
  TrainingReport report;
};

/// Simulates `training_size` beliefs, labels them with a high-sample Monte
/// Carlo alarm and fits the network.
TrainedRegression train_regression(const BeliefGenerator& generate,
                                   const HorizonConfig& horizon,
                                   std::size_t oracle_samples,
                                   std::size_t training_size,
                                   const TrainingOptions& options,
                                   const FeatureOptions& features = {},
                                   int threads = 1);

AlarmResult regression_alarm(const RegressionModel& model,
                             const JointBelief& belief, double c_cut);

}  // namespace optalarm
