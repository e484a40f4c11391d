#include "optalarm/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "optalarm/random.hpp"

namespace optalarm {

namespace {

constexpr std::uint64_t kScenarioStream = hash_name("scenario");
constexpr int kMaxPlacementTries = 100000;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

JointVector concat(const VehicleVector& a, const VehicleVector& b) {
  JointVector out(a.size() + b.size());
  out << a, b;
  return out;
}

JointVector place_left_turn(const ScenarioConfig& c, const ModelPair& models,
                            Rng& rng) {
  const auto conflict = left_turn_conflict_s(c);
  for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
    const double s0 = uniform(rng, conflict[0] - c.window_before, conflict[0] + c.window_after);
    const double s1 = uniform(rng, conflict[1] - c.window_before, conflict[1] + c.window_after);
    const Pose p0 = models[0].curve()->pose_at(s0);
    const Pose p1 = models[1].curve()->pose_at(s1);
    if (std::hypot(p1.x - p0.x, p1.y - p0.y) > c.placement_radius) continue;
    const double v0 = uniform(rng, c.v_min, c.v_max);
    const double v1 = uniform(rng, c.v_min, c.v_max);
    return concat(PathState{s0, v0}.to_vector(), PathState{s1, v1}.to_vector());
  }
  throw std::runtime_error("left-turn placement window cannot satisfy the placement radius");
}

JointVector place_bicycles(const ScenarioConfig& c, Rng& rng) {
  auto vehicle = [&](double x, double y) {
    BicycleState s;
    s.x = x;
    s.y = y;
    s.theta = uniform(rng, -kPi, kPi);
    s.v = uniform(rng, c.v_min, c.v_max);
    s.a = uniform(rng, -c.accel_max, c.accel_max);
    s.omega = uniform(rng, -c.omega_max, c.omega_max);
    return s.to_vector();
  };
  const VehicleVector first = vehicle(0.0, 0.0);
  const double r = c.placement_radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double phi = uniform(rng, -kPi, kPi);
  const VehicleVector second = vehicle(r * std::cos(phi), r * std::sin(phi));
  return concat(first, second);
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  return kind == ScenarioKind::left_turn ? "left-turn" : "bicycle";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "left-turn" || name == "left_turn") return ScenarioKind::left_turn;
  if (name == "bicycle") return ScenarioKind::bicycle;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

void ScenarioConfig::validate() const {
  horizon().validate();
  if (!(placement_radius > 0.0)) throw std::invalid_argument("placement radius must be positive");
  if (!(v_min <= v_max)) throw std::invalid_argument("v_min must not exceed v_max");
  if (backward_steps < -1) throw std::invalid_argument("backward_steps must be >= 0 or -1");
  if (!(turn_radius > lane_width)) {
    throw std::invalid_argument("turn radius must exceed the lane width");
  }
  if (!(approach_length > 0.0) || !(window_before >= 0.0) || !(window_after >= 0.0)) {
    throw std::invalid_argument("left-turn window lengths must be non-negative");
  }
  if (!(accel_max >= 0.0) || !(omega_max >= 0.0)) {
    throw std::invalid_argument("bicycle ranges must be non-negative");
  }
  for (double s : {path_s_std, path_v_std, bicycle_a_std, bicycle_omega_std,
                   obs_position_std, obs_heading_std, obs_velocity_std,
                   obs_accel_std, obs_omega_std}) {
    if (!(s >= 0.0)) throw std::invalid_argument("noise std must be non-negative");
  }
}

int ScenarioConfig::reverse_steps() const {
  return backward_steps >= 0 ? backward_steps : horizon().checks();
}

HorizonConfig ScenarioConfig::horizon() const {
  HorizonConfig h;
  h.dt = dt;
  h.t_f = t_f;
  h.margin = margin;
  return h;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {
      {"scenario", to_string(c.kind)},
      {"horizon", c.t_f},
      {"dt", c.dt},
      {"margin", c.margin},
      {"placement_radius", c.placement_radius},
      {"backward_steps", c.backward_steps},
      {"v_min", c.v_min},
      {"v_max", c.v_max},
      {"turn_radius", c.turn_radius},
      {"lane_width", c.lane_width},
      {"approach_length", c.approach_length},
      {"window_before", c.window_before},
      {"window_after", c.window_after},
      {"accel_max", c.accel_max},
      {"omega_max", c.omega_max},
      {"substeps", c.substeps},
      {"path_s_std", c.path_s_std},
      {"path_v_std", c.path_v_std},
      {"bicycle_a_std", c.bicycle_a_std},
      {"bicycle_omega_std", c.bicycle_omega_std},
      {"obs_position_std", c.obs_position_std},
      {"obs_heading_std", c.obs_heading_std},
      {"obs_velocity_std", c.obs_velocity_std},
      {"obs_accel_std", c.obs_accel_std},
      {"obs_omega_std", c.obs_omega_std},
      {"seed", c.seed},
  };
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  if (j.contains("scenario")) c.kind = parse_scenario_kind(j.at("scenario").get<std::string>());
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("horizon", c.t_f);
  read("dt", c.dt);
  read("margin", c.margin);
  read("placement_radius", c.placement_radius);
  read("backward_steps", c.backward_steps);
  read("v_min", c.v_min);
  read("v_max", c.v_max);
  read("turn_radius", c.turn_radius);
  read("lane_width", c.lane_width);
  read("approach_length", c.approach_length);
  read("window_before", c.window_before);
  read("window_after", c.window_after);
  read("accel_max", c.accel_max);
  read("omega_max", c.omega_max);
  read("substeps", c.substeps);
  read("path_s_std", c.path_s_std);
  read("path_v_std", c.path_v_std);
  read("bicycle_a_std", c.bicycle_a_std);
  read("bicycle_omega_std", c.bicycle_omega_std);
  read("obs_position_std", c.obs_position_std);
  read("obs_heading_std", c.obs_heading_std);
  read("obs_velocity_std", c.obs_velocity_std);
  read("obs_accel_std", c.obs_accel_std);
  read("obs_omega_std", c.obs_omega_std);
  read("seed", c.seed);
  c.validate();
  return c;
}

std::string config_hash(const ScenarioConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash_name(to_json(config).dump())));
  return buf;
}

std::array<double, 2> left_turn_conflict_s(const ScenarioConfig& c) {
  const double o = 0.5 * c.lane_width;
  const double r = c.turn_radius;
  const double dx = r - 2.0 * o;
  const double dy = std::sqrt(r * r - dx * dx);
  const double y_cross = o - r + dy;
  return {c.approach_length + r * std::atan2(dy, dx),
          c.approach_length + r - y_cross};
}

ModelPair make_models(const ScenarioConfig& c) {
  c.validate();
  if (c.kind == ScenarioKind::left_turn) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(kPathDim, kPathDim);
    q(0, 0) = c.path_s_std * c.path_s_std;
    q(1, 1) = c.path_v_std * c.path_v_std;
    const double o = 0.5 * c.lane_width;
    const double r = c.turn_radius;
    // Northbound vehicle turning left (west) across the southbound lane.
    PathCurve turning(Pose(o, o - r - c.approach_length, kPi / 2),
                      {PathCurve::straight(c.approach_length),
                       PathCurve::arc(r, kPi / 2),
                       PathCurve::straight(c.approach_length)});
    PathCurve through(Pose(-o, c.approach_length + r, -kPi / 2),
                      {PathCurve::straight(2.0 * (c.approach_length + r))});
    return {MotionModel::path(std::move(turning), c.dt, q),
            MotionModel::path(std::move(through), c.dt, q)};
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(kBicycleDim, kBicycleDim);
  q(4, 4) = c.bicycle_a_std * c.bicycle_a_std;
  q(5, 5) = c.bicycle_omega_std * c.bicycle_omega_std;
  return {MotionModel::bicycle(c.dt, q, c.substeps),
          MotionModel::bicycle(c.dt, q, c.substeps)};
}

Eigen::MatrixXd observation_cov(const ScenarioConfig& c, const MotionModel& model) {
  Eigen::VectorXd stds(model.dim());
  if (model.kind() == ModelKind::path) {
    stds << c.obs_position_std, c.obs_velocity_std;
  } else {
    stds << c.obs_position_std, c.obs_position_std, c.obs_heading_std,
        c.obs_velocity_std, c.obs_accel_std, c.obs_omega_std;
  }
  return stds.cwiseAbs2().asDiagonal();
}

Outcome realized_outcome(const std::vector<JointVector>& trajectory,
                         const ModelPair& models, double dt, double t_f,
                         double margin) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto last = std::min<std::size_t>(
      trajectory.size(), static_cast<std::size_t>(std::floor(t_f / dt + 1e-9)) + 1);
  for (std::size_t k = 0; k < last; ++k) {
    if (joint_overlap(trajectory[k], models, margin)) {
      return {true, static_cast<double>(k) * dt};
    }
  }
  return {};
}

Scenario generate_scenario(const ScenarioConfig& config, std::size_t index) {
  const ModelPair models = make_models(config);
  Rng rng(derive_seed(config.seed, kScenarioStream, index));
  auto process_noise = [&rng](int, const MotionModel& m) { return m.sample_noise(rng); };

  JointVector state = config.kind == ScenarioKind::left_turn
                          ? place_left_turn(config, models, rng)
                          : place_bicycles(config, rng);

  const int d0 = models[0].dim();
  const int d1 = models[1].dim();
  for (int k = 0; k < config.reverse_steps(); ++k) {
    VehicleVector a = state.head(d0);
    VehicleVector b = state.segment(d0, d1);
    const VehicleVector na = process_noise(0, models[0]);
    const VehicleVector nb = process_noise(1, models[1]);
    state.head(d0) = step_backward(a, models[0], na);
    state.segment(d0, d1) = step_backward(b, models[1], nb);
  }

  const Eigen::MatrixXd obs = block_diag(observation_cov(config, models[0]),
                                         observation_cov(config, models[1]));
  const Eigen::MatrixXd obs_factor = psd_factor(obs);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(obs.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  Eigen::VectorXd mean = Eigen::VectorXd(state) + obs_factor * z;

  const int steps = config.horizon().checks() * steps_per_check(models, config.horizon());
  std::vector<JointVector> trajectory =
      simulate_trajectory(state, models, steps, process_noise);
  const Outcome outcome =
      realized_outcome(trajectory, models, config.dt, config.t_f, config.margin);
  const bool initial_overlap = joint_overlap(trajectory.front(), models, config.margin);

  return Scenario{index,
                  JointBelief(std::move(mean), obs, models),
                  std::move(trajectory),
                  outcome.collided,
                  outcome.first_time,
                  initial_overlap};
}

std::vector<Scenario> generate_batch(const ScenarioConfig& config,
                                     std::size_t count, int threads) {
  config.validate();
  std::vector<std::optional<Scenario>> slots(count);
  const long long total = static_cast<long long>(count);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 8) if (threads > 1)
  for (long long i = 0; i < total; ++i) {
    slots[static_cast<std::size_t>(i)] =
        generate_scenario(config, static_cast<std::size_t>(i));
  }
  std::vector<Scenario> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void write_scenario_records(const std::string& path,
                            const ScenarioConfig& config,
                            const std::vector<Scenario>& scenarios) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string hash = config_hash(config);
  for (const auto& s : scenarios) {
    const auto& mean = s.belief.mean();
    const auto& cov = s.belief.covariance();
    std::vector<double> cov_rows;
    cov_rows.reserve(static_cast<std::size_t>(cov.size()));
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
      for (Eigen::Index c = 0; c < cov.cols(); ++c) cov_rows.push_back(cov(r, c));
    }
    nlohmann::json rec = {
        {"config_hash", hash},
        {"seed", config.seed},
        {"index", s.index},
        {"kind", to_string(config.kind)},
        {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
        {"covariance", cov_rows},
        {"collided", s.collided},
        {"first_collision_time", nullptr},
        {"initial_overlap", s.initial_overlap},
    };
    if (s.first_collision_time) rec["first_collision_time"] = *s.first_collision_time;
    out << rec.dump() << '\n';
  }
}

std::vector<Scenario> read_scenario_records(const std::string& path,
                                            const ScenarioConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const ModelPair models = make_models(config);
  const std::string hash = config_hash(config);
  std::vector<Scenario> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    if (rec.at("config_hash").get<std::string>() != hash) {
      throw std::runtime_error("scenario record was produced by a different config");
    }
    const auto mean_values = rec.at("mean").get<std::vector<double>>();
    const auto cov_values = rec.at("covariance").get<std::vector<double>>();
    const auto n = static_cast<Eigen::Index>(mean_values.size());
    if (static_cast<Eigen::Index>(cov_values.size()) != n * n) {
      throw std::runtime_error("covariance size does not match mean");
    }
    Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(mean_values.data(), n);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) cov(r, c) = cov_values[r * n + c];
    }
    std::optional<double> first;
    if (!rec.at("first_collision_time").is_null()) {
      first = rec.at("first_collision_time").get<double>();
    }
    out.push_back(Scenario{rec.at("index").get<std::size_t>(),
                           JointBelief(std::move(mean), std::move(cov), models),
                           {},
                           rec.at("collided").get<bool>(),
                           first,
                           rec.value("initial_overlap", false)});
  }
  return out;
}

}  // namespace optalarm
