#include "optalarm/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace optalarm {

namespace {

constexpr const char* kFormatName = "optalarm.mlp";
constexpr std::uint64_t kLabelStream = hash_name("regression-labels");

Eigen::VectorXd to_vector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

RegressionModel::RegressionModel(int input_dim, int hidden, std::uint64_t seed)
    : feature_mean(Eigen::VectorXd::Zero(input_dim)),
      feature_scale(Eigen::VectorXd::Ones(input_dim)),
      w1(hidden, input_dim),
      b1(Eigen::VectorXd::Zero(hidden)),
      w2(hidden) {
  if (input_dim < 1 || hidden < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double s1 = std::sqrt(2.0 / input_dim);
  const double s2 = std::sqrt(1.0 / hidden);
  for (Eigen::Index c = 0; c < w1.cols(); ++c) {
    for (Eigen::Index r = 0; r < w1.rows(); ++r) w1(r, c) = s1 * normal(rng);
  }
  for (Eigen::Index r = 0; r < w2.size(); ++r) w2[r] = s2 * normal(rng);
}

double RegressionModel::predict_raw(const Eigen::VectorXd& f) const {
  if (f.size() != input_dim()) {
    throw std::invalid_argument("feature vector has wrong dimension");
  }
  const Eigen::VectorXd z = (f - feature_mean).cwiseQuotient(feature_scale);
  const Eigen::VectorXd h = (w1 * z + b1).cwiseMax(0.0);
  return w2.dot(h) + b2;
}

double RegressionModel::predict(const Eigen::VectorXd& f) const {
  return std::clamp(predict_raw(f), 0.0, 1.0);
}

nlohmann::json RegressionModel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    rows.push_back(to_std(w1.row(r).transpose()));
  }
  return {
      {"format", kFormatName},
      {"version", kFormatVersion},
      {"input_dim", input_dim()},
      {"hidden", hidden()},
      {"activation", "relu"},
      {"output", "clamp01"},
      {"features", {{"ttc_surrogate", features.ttc_surrogate}}},
      {"feature_mean", to_std(feature_mean)},
      {"feature_scale", to_std(feature_scale)},
      {"w1", rows},
      {"b1", to_std(b1)},
      {"w2", to_std(w2)},
      {"b2", b2},
  };
}

RegressionModel RegressionModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormatName) {
    throw std::runtime_error("not an optalarm.mlp weight file");
  }
  if (j.at("version").get<int>() != kFormatVersion) {
    throw std::runtime_error("unsupported weight file version");
  }
  const int in = j.at("input_dim").get<int>();
  const int hid = j.at("hidden").get<int>();
  RegressionModel m;
  m.features.ttc_surrogate = j.at("features").value("ttc_surrogate", false);
  m.feature_mean = to_vector(j.at("feature_mean"));
  m.feature_scale = to_vector(j.at("feature_scale"));
  m.b1 = to_vector(j.at("b1"));
  m.w2 = to_vector(j.at("w2"));
  m.b2 = j.at("b2").get<double>();
  const auto& rows = j.at("w1");
  if (static_cast<int>(rows.size()) != hid) throw std::runtime_error("w1 row count mismatch");
  m.w1.resize(hid, in);
  for (int r = 0; r < hid; ++r) {
    const Eigen::VectorXd row = to_vector(rows[r]);
    if (row.size() != in) throw std::runtime_error("w1 row length mismatch");
    m.w1.row(r) = row.transpose();
  }
  if (m.feature_mean.size() != in || m.feature_scale.size() != in ||
      m.b1.size() != hid || m.w2.size() != hid) {
    throw std::runtime_error("weight file dimensions are inconsistent");
  }
  if (!m.w1.allFinite() || !m.b1.allFinite() || !m.w2.allFinite() ||
      !std::isfinite(m.b2) || !(m.feature_scale.array() > 0.0).all()) {
    throw std::runtime_error("weight file contains invalid values");
  }
  return m;
}

void RegressionModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json().dump() << '\n';
}

RegressionModel RegressionModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return from_json(nlohmann::json::parse(in));
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Adam {
  explicit Adam(const RegressionModel& m)
      : mw1(Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols())),
        vw1(mw1),
        mb1(Eigen::VectorXd::Zero(m.b1.size())),
        vb1(mb1),
        mw2(Eigen::VectorXd::Zero(m.w2.size())),
        vw2(mw2) {}

  template <class P, class G, class M>
  void update(P& param, const G& grad, M& m, M& v, double lr_t) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    param.array() -= lr_t * m.array() / (v.array().sqrt() + eps);
  }

  Eigen::MatrixXd mw1, vw1;
  Eigen::VectorXd mb1, vb1, mw2, vw2;
  double mb2 = 0.0, vb2 = 0.0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;
};

double rmse_on(const RegressionModel& m, const Eigen::MatrixXd& z,
               const Eigen::VectorXd& y) {
  if (y.size() == 0) return 0.0;
  const Eigen::MatrixXd h = ((m.w1 * z).colwise() + m.b1).cwiseMax(0.0);
  const Eigen::VectorXd pred =
      ((m.w2.transpose() * h).array() + m.b2).matrix().transpose();
  return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.size()));
}

}  // namespace

RegressionModel fit_regression(const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& labels,
                               const TrainingOptions& options,
                               TrainingReport* report) {
  const Eigen::Index n = inputs.cols();
  if (n < 1) throw std::invalid_argument("training set must not be empty");
  if (labels.size() != n) throw std::invalid_argument("one label per sample required");
  if (options.batch_size < 1 || options.max_epochs < 1 || options.hidden < 1) {
    throw std::invalid_argument("invalid training options");
  }

  RegressionModel model(static_cast<int>(inputs.rows()), options.hidden,
                        options.seed);
  model.feature_mean = inputs.rowwise().mean();
  const Eigen::MatrixXd centered = inputs.colwise() - model.feature_mean;
  model.feature_scale =
      (centered.cwiseAbs2().rowwise().sum() / static_cast<double>(n)).cwiseSqrt();
  for (Eigen::Index i = 0; i < model.feature_scale.size(); ++i) {
    if (!(model.feature_scale[i] > 1e-12)) model.feature_scale[i] = 1.0;
  }
  // Start from the constant predictor at the label mean.
  model.w2.setZero();
  model.b2 = labels.mean();
  const Eigen::MatrixXd z =
      centered.array().colwise() / model.feature_scale.array();

  Rng rng(derive_seed(options.seed, hash_name("shuffle")));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::Index n_val = static_cast<Eigen::Index>(
      std::floor(options.validation_fraction * static_cast<double>(n)));
  if (n - n_val < 1) n_val = n - 1;
  const std::vector<Eigen::Index> val_idx(order.begin(), order.begin() + n_val);
  std::vector<Eigen::Index> train_idx(order.begin() + n_val, order.end());

  Eigen::MatrixXd z_val(z.rows(), n_val);
  Eigen::VectorXd y_val(n_val);
  for (Eigen::Index i = 0; i < n_val; ++i) {
    z_val.col(i) = z.col(val_idx[i]);
    y_val[i] = labels[val_idx[i]];
  }

  Adam adam(model);
  RegressionModel best = model;
  double best_score = std::numeric_limits<double>::infinity();
  int stale = 0;
  int epoch = 0;
  const Eigen::Index batch = options.batch_size;
  Eigen::MatrixXd zb;
  Eigen::VectorXd yb;

  for (epoch = 1; epoch <= options.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double sse = 0.0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += batch) {
      const Eigen::Index b = std::min<Eigen::Index>(
          batch, static_cast<Eigen::Index>(train_idx.size() - begin));
      zb.resize(z.rows(), b);
      yb.resize(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        zb.col(i) = z.col(train_idx[begin + i]);
        yb[i] = labels[train_idx[begin + i]];
      }
      const Eigen::MatrixXd pre = (model.w1 * zb).colwise() + model.b1;
      const Eigen::MatrixXd h = pre.cwiseMax(0.0);
      const Eigen::VectorXd out =
          ((model.w2.transpose() * h).array() + model.b2).matrix().transpose();
      const Eigen::VectorXd err = out - yb;
      sse += err.squaredNorm();

      // Gradients of mean squared error / 2.
      const Eigen::VectorXd d_out = err / static_cast<double>(b);
      const Eigen::VectorXd g_w2 = h * d_out;
      const double g_b2 = d_out.sum();
      const Eigen::MatrixXd d_h =
          (model.w2 * d_out.transpose()).cwiseProduct(
              (pre.array() > 0.0).cast<double>().matrix());
      const Eigen::MatrixXd g_w1 = d_h * zb.transpose();
      const Eigen::VectorXd g_b1 = d_h.rowwise().sum();

      ++adam.t;
      const double lr_t = options.learning_rate *
                          std::sqrt(1.0 - std::pow(adam.beta2, adam.t)) /
                          (1.0 - std::pow(adam.beta1, adam.t));
      adam.update(model.w1, g_w1, adam.mw1, adam.vw1, lr_t);
      adam.update(model.b1, g_b1, adam.mb1, adam.vb1, lr_t);
      adam.update(model.w2, g_w2, adam.mw2, adam.vw2, lr_t);
      adam.mb2 = adam.beta1 * adam.mb2 + (1.0 - adam.beta1) * g_b2;
      adam.vb2 = adam.beta2 * adam.vb2 + (1.0 - adam.beta2) * g_b2 * g_b2;
      model.b2 -= lr_t * adam.mb2 / (std::sqrt(adam.vb2) + adam.eps);
    }
    if (!std::isfinite(sse)) throw std::runtime_error("training diverged (non-finite loss)");

    const double score = n_val > 0 ? rmse_on(model, z_val, y_val)
                                   : std::sqrt(sse / train_idx.size());
    if (score < best_score - options.tol) {
      best_score = score;
      best = model;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }

  if (report) {
    Eigen::MatrixXd z_train(z.rows(), static_cast<Eigen::Index>(train_idx.size()));
    Eigen::VectorXd y_train(z_train.cols());
    for (Eigen::Index i = 0; i < z_train.cols(); ++i) {
      z_train.col(i) = z.col(train_idx[i]);
      y_train[i] = labels[train_idx[i]];
    }
    report->train_rmse = rmse_on(best, z_train, y_train);
    report->validation_rmse = n_val > 0 ? rmse_on(best, z_val, y_val) : 0.0;
    report->epochs = std::min(epoch, options.max_epochs);
    report->train_size = train_idx.size();
    report->validation_size = static_cast<std::size_t>(n_val);
  }
  return best;
}

LabelledSet label_beliefs(const BeliefGenerator& generate, std::size_t count,
                          const HorizonConfig& horizon,
                          std::size_t oracle_samples,
                          const FeatureOptions& features, std::uint64_t seed,
                          int threads) {
  if (count < 1) throw std::invalid_argument("need at least one belief");
  std::vector<Eigen::VectorXd> rows(count);
  Eigen::VectorXd labels(static_cast<Eigen::Index>(count));
  const long long total = static_cast<long long>(count);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 16) if (threads > 1)
  for (long long i = 0; i < total; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const JointBelief belief = generate(idx);
    rows[idx] = extract_features(belief, features);
    labels[i] = *mc_alarm(belief, horizon, oracle_samples, 0.5,
                          derive_seed(seed, kLabelStream, idx))
                     .estimate;
  }
  LabelledSet out;
  out.inputs.resize(rows.front().size(), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    out.inputs.col(static_cast<Eigen::Index>(i)) = rows[i];
  }
  out.labels = std::move(labels);
  return out;
}

TrainedRegression train_regression(const BeliefGenerator& generate,
                                   const HorizonConfig& horizon,
                                   std::size_t oracle_samples,
                                   std::size_t training_size,
                                   const TrainingOptions& options,
                                   const FeatureOptions& features,
                                   int threads) {
  const LabelledSet data = label_beliefs(generate, training_size, horizon,
                                         oracle_samples, features,
                                         options.seed, threads);
  TrainedRegression out;
  out.model = fit_regression(data.inputs, data.labels, options, &out.report);
  out.model.features = features;
  return out;
}

AlarmResult regression_alarm(const RegressionModel& model,
                             const JointBelief& belief, double c_cut) {
  const auto start = std::chrono::steady_clock::now();
  const double estimate = model.predict(extract_features(belief, model.features));
  AlarmResult out;
  out.estimate = estimate;
  out.decision = estimate > c_cut;
  out.samples_used = 1;
  out.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

}  // namespace optalarm
