#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "optalarm/dynamics.hpp"
#include "optalarm/random.hpp"

namespace optalarm {

/// Collision checks happen at t = dt, 2 dt, ..., t_f (and at t = 0 when
/// `check_initial` is set). `dt` must be a whole multiple of the motion
/// models' step.
struct HorizonConfig {
  double dt = 0.1;
  double t_f = 1.0;
  double margin = 0.0;
  bool check_initial = false;

  void validate() const;
  /// Number of checks after t = 0.
  int checks() const;
};

struct AlarmResult {
  std::optional<double> estimate;  // collision probability in [0, 1]
  bool decision = false;
  std::size_t samples_used = 0;
  double wall_time = 0.0;  // seconds
  /// Colliding rollouts for counting estimators, so cutoffs can be applied
  /// exactly as `hits > samples_used * c_cut`.
  std::optional<std::size_t> hits;
};

/// Applies a different cutoff to an existing result. Strict inequality, so a
/// tie never raises the alarm.
bool decide(const AlarmResult& result, double c_cut);

/// True if the two footprints (each grown by `margin`) overlap.
bool joint_overlap(const JointVector& state, const ModelPair& models,
                   double margin);

/// Model steps between consecutive checks. Throws if the models disagree on
/// dt or the check interval is not a whole number of steps.
int steps_per_check(const ModelPair& models, const HorizonConfig& horizon);

/// Rolls `initial` forward and returns the index k of the first check that
/// sees an overlap (time k * horizon.dt), or nullopt. Index 0 is only
/// possible with `check_initial`. `noise(vehicle, model)` supplies the
/// process noise for each vehicle and step, in vehicle order.
template <class NoiseFn>
std::optional<int> first_collision_check(JointVector state,
                                         const ModelPair& models,
                                         const HorizonConfig& horizon,
                                         NoiseFn&& noise) {
  if (horizon.check_initial && joint_overlap(state, models, horizon.margin)) {
    return 0;
  }
  const int per_check = steps_per_check(models, horizon);
  const int checks = horizon.checks();
  const int d0 = models[0].dim();
  const int d1 = models[1].dim();
  for (int k = 1; k <= checks; ++k) {
    for (int s = 0; s < per_check; ++s) {
      VehicleVector a = state.head(d0);
      VehicleVector b = state.segment(d0, d1);
      const VehicleVector na = noise(0, models[0]);
      const VehicleVector nb = noise(1, models[1]);
      state.head(d0) = step(a, models[0], na);
      state.segment(d0, d1) = step(b, models[1], nb);
    }
    if (joint_overlap(state, models, horizon.margin)) return k;
  }
  return std::nullopt;
}

/// One noisy trajectory from `initial`; first collision time or nullopt.
std::optional<double> rollout_collision_time(const JointVector& initial,
                                             const ModelPair& models,
                                             const HorizonConfig& horizon,
                                             Rng& rng);

/// One noisy trajectory from `initial`, stopping at the first overlap.
bool rollout_collides(const JointVector& initial, const ModelPair& models,
                      const HorizonConfig& horizon, Rng& rng);

/// Monte Carlo alarm over `n` sampled trajectories. Sample i draws from its
/// own stream derive_seed(seed, i), so the result does not depend on
/// `threads`.
AlarmResult mc_alarm(const JointBelief& belief, const HorizonConfig& horizon,
                     std::size_t n, double c_cut, std::uint64_t seed,
                     int threads = 1);

/// Rolls out the belief mean with no process noise; alarms iff the mean
/// footprints ever overlap. Estimate is 0 or 1.
AlarmResult expected_value_alarm(const JointBelief& belief,
                                 const HorizonConfig& horizon);

/// Weighted collision indicator over joint sigma points, each rolled out
/// without process noise. Negative-weight point sets are clamped to [0, 1].
AlarmResult unscented_alarm(const JointBelief& belief,
                            const HorizonConfig& horizon, double kappa,
                            double c_cut);

/// Smallest multiple of horizon.dt (up to max_horizon) at which more than a
/// c_cut fraction of n shared Monte Carlo rollouts has collided; nullopt if
/// that never happens. horizon.t_f is ignored.
std::optional<double> estimate_ttc(const JointBelief& belief,
                                   const HorizonConfig& horizon,
                                   double max_horizon, std::size_t n,
                                   double c_cut, std::uint64_t seed,
                                   int threads = 1);

}  // namespace optalarm
