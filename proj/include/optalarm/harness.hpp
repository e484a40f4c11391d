#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optalarm/alarms.hpp"
#include "optalarm/bounds.hpp"
#include "optalarm/regression.hpp"
#include "optalarm/scenarios.hpp"

namespace optalarm {

enum class AlarmKind { monte_carlo, expected_value, unscented, regression, never };

/// Alarm selection. Text form: "mc:<N>", "ev", "ut" or "ut:<kappa>",
/// "mlp:<weights.json>", "never".
struct AlarmSpec {
  AlarmKind kind = AlarmKind::never;
  std::size_t samples = 0;
  double kappa = 0.0;
  std::string model_path;

  static AlarmSpec parse(std::string_view text);
  std::string to_string() const;
  /// Display name; also keys the alarm's random stream.
  std::string name() const;
};

/// Callable alarm built from a spec. Regression weights are loaded once.
class AlarmRunner {
 public:
  explicit AlarmRunner(AlarmSpec spec);
  AlarmRunner(AlarmSpec spec, std::shared_ptr<const RegressionModel> model);

  const AlarmSpec& spec() const { return spec_; }
  AlarmResult operator()(const JointBelief& belief, const HorizonConfig& horizon,
                         double c_cut, std::uint64_t seed) const;

 private:
  AlarmSpec spec_;
  std::shared_ptr<const RegressionModel> model_;
};

/// Runs one alarm over a batch. Scenario i uses stream
/// derive_seed(seed, hash_name(name), i), independent of `threads`.
std::vector<AlarmResult> run_alarm(const AlarmRunner& alarm,
                                   std::span<const Scenario> scenarios,
                                   const HorizonConfig& horizon,
                                   std::uint64_t seed, int threads = 1);

struct CostRow {
  double r_fn = 0.0;
  double r_fp = 0.0;
  double c_cut = 0.0;
  std::optional<double> fnr;  // P(no alarm | collision); none without collisions
  std::optional<double> fpr;  // P(alarm | no collision)
  double ec = 0.0;            // R_FN P(C, no A) + R_FP P(A, no C)
  double ec_se = 0.0;         // standard error of ec over the batch
  double eac = 0.0;           // ec - ec of the oracle
  double eac_se = 0.0;        // standard error of the paired difference
  double joint_fn = 0.0;      // P(C, no A)
  double joint_fp = 0.0;      // P(A, no C)
  double alarm_rate = 0.0;
};

struct EvaluationResult {
  std::string alarm;
  std::size_t scenario_count = 0;
  double collision_rate = 0.0;
  double mean_wall_time = 0.0;
  std::vector<CostRow> rows;  // one per cost config, in input order
  std::string error;          // set when the alarm failed; rows are empty
};

/// Scores alarm results against realized outcomes and the oracle's results
/// on the same scenarios. Decisions are re-derived per cost config with
/// decide(result, optimal_cutoff(costs)).
EvaluationResult evaluate(const std::string& name,
                          std::span<const AlarmResult> alarm,
                          std::span<const Scenario> scenarios,
                          std::span<const CostConfig> costs,
                          std::span<const AlarmResult> oracle);

struct TimingReport {
  std::string alarm;
  std::size_t calls = 0;
  double mean_seconds = 0.0;
  double p50_seconds = 0.0;
  double p95_seconds = 0.0;
};

/// Single-threaded wall time per call, after `warmup` untimed calls.
TimingReport timing_report(const AlarmRunner& alarm,
                           std::span<const Scenario> scenarios,
                           const HorizonConfig& horizon, std::uint64_t seed,
                           std::size_t warmup = 3);

struct BenchmarkConfig {
  ScenarioConfig scenario;
  std::size_t n_scenarios = 1000;
  std::vector<AlarmSpec> alarms;
  std::vector<CostConfig> costs;
  std::size_t oracle_samples = 20000;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Scenarios timed per alarm; 0 disables timing.
  std::size_t timing_scenarios = 100;
  /// Read scenarios from this record file instead of generating them.
  std::string batch_path;
  std::string out_dir;

  /// Defaults: left-turn, MC 10/100/1000, expected value, unscented,
  /// R_FP = 1 with R_FN in {1, 10, 100}.
  static BenchmarkConfig defaults();
};

/// Reads a flat JSON object. Keys: every ScenarioConfig key plus "n",
/// "alarms" (list of spec strings), "samples" (list of MC sample counts,
/// appended as mc:<N> alarms), "costs" (list of R_FN), "r_fp",
/// "oracle_samples", "threads", "timing_scenarios", "batch", "out".
/// Unknown keys are rejected.
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& config);

struct BenchmarkReport {
  EvaluationResult oracle;
  std::vector<EvaluationResult> alarms;
  std::vector<TimingReport> timings;
  std::vector<std::string> files;
};

/// Seed of the oracle stream, fixed per benchmark seed and distinct from
/// every alarm stream.
std::uint64_t oracle_seed(std::uint64_t seed);

/// Generates (or loads) the batch, runs the oracle once, evaluates every
/// alarm and, when out_dir is set, writes:
///   oracle.csv    collision rate and FNR/FPR/EC per R_FN
///   alarms.csv    EAC per R_FN for every alarm
///   details.csv   one row per (alarm, cost) with all metrics and, for MC
///                 alarms, the Hoeffding EAC bound
///   timing.csv    per-call wall times (not reproducible)
///   manifest.json config and versions
/// The first three are byte-identical for identical config and seed.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

/// Beliefs of scenarios drawn from a stream reserved for training, so a model
/// never sees the evaluation batch generated from the same config.
BeliefGenerator training_beliefs(const ScenarioConfig& config);

/// "%.6g" formatting used in every CSV.
std::string format_number(double value);

}  // namespace optalarm
