#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optalarm/alarms.hpp"
#include "optalarm/dynamics.hpp"

namespace optalarm {

enum class ScenarioKind { left_turn, bicycle };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& name);

/// Everything needed to regenerate a scenario batch. Defaults are documented
/// in README.md; none of the noise magnitudes come from measured data.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::left_turn;
  double t_f = 1.0;
  double dt = 0.1;
  double margin = 0.0;
  /// Vehicle centers are placed at most this far apart.
  double placement_radius = 10.0;
  /// Reverse steps from the placement to the initial state; -1 means t_f/dt.
  int backward_steps = -1;
  double v_min = 5.0;
  double v_max = 15.0;

  // Left-turn geometry: two-lane crossing, straight-arc-straight turn.
  double turn_radius = 10.0;
  double lane_width = 3.5;
  double approach_length = 60.0;
  /// Placements are drawn within this window around each path's conflict
  /// point (before, after), in meters of arc length.
  double window_before = 60.0;
  double window_after = 60.0;

  // Bicycle placement.
  double accel_max = 1.0;  // a ~ U[-accel_max, accel_max]
  double omega_max = 0.2;  // omega ~ U[-omega_max, omega_max]
  int substeps = 1;

  // Process noise, standard deviation per step.
  double path_s_std = 0.05;
  double path_v_std = 0.2;
  double bicycle_a_std = 0.3;
  double bicycle_omega_std = 0.05;

  // Observation noise, which becomes the belief covariance.
  double obs_position_std = 0.5;
  double obs_heading_std = 0.05;
  double obs_velocity_std = 0.5;
  double obs_accel_std = 0.2;
  double obs_omega_std = 0.02;

  std::uint64_t seed = 0;

  void validate() const;
  int reverse_steps() const;
  HorizonConfig horizon() const;
};

nlohmann::json to_json(const ScenarioConfig& config);
/// Missing keys keep their defaults; keys it does not know are ignored.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
/// FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// Motion models for both vehicles of the configured scenario.
ModelPair make_models(const ScenarioConfig& config);

/// Arc length at which each left-turn path passes the crossing point.
std::array<double, 2> left_turn_conflict_s(const ScenarioConfig& config);

/// Observation covariance for one vehicle of `model`'s kind.
Eigen::MatrixXd observation_cov(const ScenarioConfig& config,
                                const MotionModel& model);

struct Scenario {
  std::size_t index = 0;
  JointBelief belief;
  /// Joint states at t = 0, dt, ..., t_f. Empty when read back from a record
  /// file.
  std::vector<JointVector> trajectory;
  bool collided = false;
  std::optional<double> first_collision_time;
  /// Ground truth already overlapping at t = 0, which alarms never check.
  bool initial_overlap = false;
};

/// Scenario `index` of the batch defined by `config`; deterministic in
/// (config, index).
Scenario generate_scenario(const ScenarioConfig& config, std::size_t index);

std::vector<Scenario> generate_batch(const ScenarioConfig& config,
                                     std::size_t count, int threads = 1);

struct Outcome {
  bool collided = false;
  std::optional<double> first_time;
};

/// Scans a recorded trajectory (spacing dt, starting at t = 0) up to t_f,
/// including t = 0.
Outcome realized_outcome(const std::vector<JointVector>& trajectory,
                         const ModelPair& models, double dt, double t_f,
                         double margin);

/// Trajectory of `steps` model steps from `initial`, taking noise from
/// `noise(vehicle, model)` in vehicle order.
template <class NoiseFn>
std::vector<JointVector> simulate_trajectory(const JointVector& initial,
                                             const ModelPair& models,
                                             int steps, NoiseFn&& noise) {
  std::vector<JointVector> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(initial);
  JointVector x = initial;
  const int d0 = models[0].dim();
  const int d1 = models[1].dim();
  for (int k = 0; k < steps; ++k) {
    VehicleVector a = x.head(d0);
    VehicleVector b = x.segment(d0, d1);
    const VehicleVector na = noise(0, models[0]);
    const VehicleVector nb = noise(1, models[1]);
    x.head(d0) = step(a, models[0], na);
    x.segment(d0, d1) = step(b, models[1], nb);
    out.push_back(x);
  }
  return out;
}

/// Line-delimited JSON, one scenario per line: config_hash, seed, index,
/// kind, mean, covariance (row-major), collided, first_collision_time
/// (null when none), initial_overlap.
void write_scenario_records(const std::string& path,
                            const ScenarioConfig& config,
                            const std::vector<Scenario>& scenarios);

/// Reads records written for `config`; rejects a config hash mismatch.
std::vector<Scenario> read_scenario_records(const std::string& path,
                                            const ScenarioConfig& config);

}  // namespace optalarm
