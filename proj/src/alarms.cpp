#include "optalarm/alarms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace optalarm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

auto zero_noise() {
  return [](int, const MotionModel& m) { return m.zero_noise(); };
}

auto rng_noise(Rng& rng) {
  return [&rng](int, const MotionModel& m) { return m.sample_noise(rng); };
}

void check_c_cut(double c_cut) {
  if (!(c_cut >= 0.0 && c_cut <= 1.0)) {
    throw std::invalid_argument("c_cut must lie in [0, 1]");
  }
}

}  // namespace

void HorizonConfig::validate() const {
  if (!(dt > 0.0) || !(t_f >= dt) || !std::isfinite(t_f)) {
    throw std::invalid_argument("horizon requires 0 < dt <= t_f");
  }
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be non-negative");
}

int HorizonConfig::checks() const {
  validate();
  return static_cast<int>(std::floor(t_f / dt + 1e-9));
}

bool decide(const AlarmResult& result, double c_cut) {
  if (result.hits) {
    return static_cast<double>(*result.hits) >
           static_cast<double>(result.samples_used) * c_cut;
  }
  if (result.estimate) return *result.estimate > c_cut;
  return result.decision;
}

bool joint_overlap(const JointVector& state, const ModelPair& models,
                   double margin) {
  return rect_overlap(footprint(vehicle_part(state, models, 0), models[0], margin),
                      footprint(vehicle_part(state, models, 1), models[1], margin));
}

int steps_per_check(const ModelPair& models, const HorizonConfig& horizon) {
  horizon.validate();
  if (std::abs(models[0].dt() - models[1].dt()) > 1e-12) {
    throw std::invalid_argument("both motion models must share dt");
  }
  const double ratio = horizon.dt / models[0].dt();
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("check interval must be a multiple of the model step");
  }
  return static_cast<int>(steps);
}

std::optional<double> rollout_collision_time(const JointVector& initial,
                                             const ModelPair& models,
                                             const HorizonConfig& horizon,
                                             Rng& rng) {
  const auto k = first_collision_check(initial, models, horizon, rng_noise(rng));
  if (!k) return std::nullopt;
  return *k * horizon.dt;
}

bool rollout_collides(const JointVector& initial, const ModelPair& models,
                      const HorizonConfig& horizon, Rng& rng) {
  return first_collision_check(initial, models, horizon, rng_noise(rng))
      .has_value();
}

AlarmResult mc_alarm(const JointBelief& belief, const HorizonConfig& horizon,
                     std::size_t n, double c_cut, std::uint64_t seed,
                     int threads) {
  if (n < 1) throw std::invalid_argument("Monte Carlo alarm needs n >= 1");
  check_c_cut(c_cut);
  steps_per_check(belief.models(), horizon);
  const auto start = Clock::now();
  const auto& models = belief.models();
  const long long total = static_cast<long long>(n);
  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) num_threads(threads) \
    schedule(static) if (threads > 1)
  for (long long i = 0; i < total; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const JointVector x0 = sample_initial(belief, rng);
    if (first_collision_check(x0, models, horizon, rng_noise(rng))) ++hits;
  }
  AlarmResult out;
  out.hits = static_cast<std::size_t>(hits);
  out.samples_used = n;
  out.estimate = static_cast<double>(hits) / static_cast<double>(n);
  out.decision = decide(out, c_cut);
  out.wall_time = seconds_since(start);
  return out;
}

AlarmResult expected_value_alarm(const JointBelief& belief,
                                 const HorizonConfig& horizon) {
  const auto start = Clock::now();
  const bool hit = first_collision_check(JointVector(belief.mean()),
                                         belief.models(), horizon, zero_noise())
                       .has_value();
  AlarmResult out;
  out.estimate = hit ? 1.0 : 0.0;
  out.decision = hit;
  out.samples_used = 1;
  out.wall_time = seconds_since(start);
  return out;
}

AlarmResult unscented_alarm(const JointBelief& belief,
                            const HorizonConfig& horizon, double kappa,
                            double c_cut) {
  check_c_cut(c_cut);
  const auto start = Clock::now();
  const auto points = sigma_points(belief, kappa);
  double estimate = 0.0;
  for (const auto& p : points) {
    if (first_collision_check(JointVector(p.point), belief.models(), horizon,
                              zero_noise())) {
      estimate += p.weight;
    }
  }
  if (estimate < 0.0 || estimate > 1.0) {
    static std::once_flag warned;
    std::call_once(warned, [] {
      std::clog << "optalarm: unscented estimate outside [0,1] from negative "
                   "sigma weights; clamping\n";
    });
    estimate = std::clamp(estimate, 0.0, 1.0);
  }
  AlarmResult out;
  out.estimate = estimate;
  out.decision = estimate > c_cut;
  out.samples_used = points.size();
  out.wall_time = seconds_since(start);
  return out;
}

std::optional<double> estimate_ttc(const JointBelief& belief,
                                   const HorizonConfig& horizon,
                                   double max_horizon, std::size_t n,
                                   double c_cut, std::uint64_t seed,
                                   int threads) {
  if (n < 1) throw std::invalid_argument("TTC estimation needs n >= 1");
  check_c_cut(c_cut);
  HorizonConfig h = horizon;
  h.t_f = max_horizon;
  const int checks = h.checks();
  steps_per_check(belief.models(), h);

  // first[i] = first colliding check of rollout i, or -1.
  const long long total = static_cast<long long>(n);
  std::vector<int> first(n, -1);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (long long i = 0; i < total; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const JointVector x0 = sample_initial(belief, rng);
    if (auto k = first_collision_check(x0, belief.models(), h, rng_noise(rng))) {
      first[static_cast<std::size_t>(i)] = *k;
    }
  }

  std::vector<std::size_t> per_check(checks + 1, 0);
  for (int k : first) {
    if (k >= 0) ++per_check[k];
  }
  const double needed = static_cast<double>(n) * c_cut;
  std::size_t cumulative = 0;
  for (int k = 0; k <= checks; ++k) {
    cumulative += per_check[k];
    if (static_cast<double>(cumulative) > needed) return k * h.dt;
  }
  return std::nullopt;
}

}  // namespace optalarm
