#include "optalarm/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#ifndef OPTALARM_VERSION
#define OPTALARM_VERSION "0.0.0"
#endif

namespace optalarm {

namespace fs = std::filesystem;

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// AlarmSpec

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value == 0) {
    throw std::invalid_argument("expected a positive integer, got '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

AlarmSpec AlarmSpec::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  AlarmSpec spec;
  if (head == "mc") {
    spec.kind = AlarmKind::monte_carlo;
    spec.samples = parse_count(arg);
  } else if (head == "ev") {
    spec.kind = AlarmKind::expected_value;
  } else if (head == "ut") {
    spec.kind = AlarmKind::unscented;
    if (!arg.empty()) spec.kappa = std::stod(std::string(arg));
  } else if (head == "mlp") {
    spec.kind = AlarmKind::regression;
    if (arg.empty()) throw std::invalid_argument("mlp alarm needs a weight file: mlp:<path>");
    spec.model_path = std::string(arg);
  } else if (head == "never") {
    spec.kind = AlarmKind::never;
  } else {
    throw std::invalid_argument("unknown alarm spec '" + std::string(text) + "'");
  }
  return spec;
}

std::string AlarmSpec::to_string() const {
  switch (kind) {
    case AlarmKind::monte_carlo: return "mc:" + std::to_string(samples);
    case AlarmKind::expected_value: return "ev";
    case AlarmKind::unscented: return kappa == 0.0 ? "ut" : "ut:" + format_number(kappa);
    case AlarmKind::regression: return "mlp:" + model_path;
    case AlarmKind::never: return "never";
  }
  return "never";
}

std::string AlarmSpec::name() const {
  switch (kind) {
    case AlarmKind::monte_carlo: return "mc-" + std::to_string(samples);
    case AlarmKind::expected_value: return "expected-value";
    case AlarmKind::unscented:
      return kappa == 0.0 ? "unscented" : "unscented-k" + format_number(kappa);
    case AlarmKind::regression: return "mlp";
    case AlarmKind::never: return "never";
  }
  return "never";
}

AlarmRunner::AlarmRunner(AlarmSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind == AlarmKind::regression) {
    model_ = std::make_shared<const RegressionModel>(RegressionModel::load(spec_.model_path));
  }
}

AlarmRunner::AlarmRunner(AlarmSpec spec, std::shared_ptr<const RegressionModel> model)
    : spec_(std::move(spec)), model_(std::move(model)) {
  if (spec_.kind == AlarmKind::regression && !model_) {
    throw std::invalid_argument("regression alarm needs a model");
  }
}

AlarmResult AlarmRunner::operator()(const JointBelief& belief,
                                    const HorizonConfig& horizon, double c_cut,
                                    std::uint64_t seed) const {
  switch (spec_.kind) {
    case AlarmKind::monte_carlo:
      return mc_alarm(belief, horizon, spec_.samples, c_cut, seed);
    case AlarmKind::expected_value:
      return expected_value_alarm(belief, horizon);
    case AlarmKind::unscented:
      return unscented_alarm(belief, horizon, spec_.kappa, c_cut);
    case AlarmKind::regression:
      return regression_alarm(*model_, belief, c_cut);
    case AlarmKind::never:
      break;
  }
  AlarmResult none;
  none.estimate = 0.0;
  return none;
}

std::vector<AlarmResult> run_alarm(const AlarmRunner& alarm,
                                   std::span<const Scenario> scenarios,
                                   const HorizonConfig& horizon,
                                   std::uint64_t seed, int threads) {
  const std::uint64_t stream = hash_name(alarm.spec().name());
  std::vector<AlarmResult> out(scenarios.size());
  const long long total = static_cast<long long>(scenarios.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 4) if (threads > 1)
  for (long long i = 0; i < total; ++i) {
    const Scenario& s = scenarios[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] =
        alarm(s.belief, horizon, 0.5, derive_seed(seed, stream, s.index));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

double standard_error(const std::vector<double>& values) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

EvaluationResult evaluate(const std::string& name,
                          std::span<const AlarmResult> alarm,
                          std::span<const Scenario> scenarios,
                          std::span<const CostConfig> costs,
                          std::span<const AlarmResult> oracle) {
  const std::size_t n = scenarios.size();
  if (n == 0) throw std::invalid_argument("cannot evaluate an empty scenario batch");
  if (alarm.size() != n || oracle.size() != n) {
    throw std::invalid_argument("alarm, oracle and scenario counts differ");
  }
  EvaluationResult result;
  result.alarm = name;
  result.scenario_count = n;
  std::size_t collisions = 0;
  double wall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    collisions += scenarios[i].collided ? 1 : 0;
    wall += alarm[i].wall_time;
  }
  const double dn = static_cast<double>(n);
  result.collision_rate = static_cast<double>(collisions) / dn;
  result.mean_wall_time = wall / dn;

  for (const CostConfig& cost : costs) {
    CostRow row;
    row.r_fn = cost.r_fn();
    row.r_fp = cost.r_fp();
    row.c_cut = optimal_cutoff(cost);
    std::size_t fn = 0, fp = 0, alarms = 0;
    std::vector<double> alarm_cost(n), diff(n);
    double oracle_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool c = scenarios[i].collided;
      const bool a = decide(alarm[i], row.c_cut);
      const bool o = decide(oracle[i], row.c_cut);
      fn += (c && !a) ? 1 : 0;
      fp += (a && !c) ? 1 : 0;
      alarms += a ? 1 : 0;
      alarm_cost[i] = (c && !a ? cost.r_fn() : 0.0) + (a && !c ? cost.r_fp() : 0.0);
      const double oracle_cost =
          (c && !o ? cost.r_fn() : 0.0) + (o && !c ? cost.r_fp() : 0.0);
      oracle_total += oracle_cost;
      diff[i] = alarm_cost[i] - oracle_cost;
    }
    row.joint_fn = static_cast<double>(fn) / dn;
    row.joint_fp = static_cast<double>(fp) / dn;
    row.alarm_rate = static_cast<double>(alarms) / dn;
    if (collisions > 0) row.fnr = static_cast<double>(fn) / static_cast<double>(collisions);
    if (collisions < n) row.fpr = static_cast<double>(fp) / static_cast<double>(n - collisions);
    row.ec = cost.r_fn() * row.joint_fn + cost.r_fp() * row.joint_fp;
    row.ec_se = standard_error(alarm_cost);
    row.eac = row.ec - oracle_total / dn;
    row.eac_se = standard_error(diff);
    result.rows.push_back(row);
  }
  return result;
}

TimingReport timing_report(const AlarmRunner& alarm,
                           std::span<const Scenario> scenarios,
                           const HorizonConfig& horizon, std::uint64_t seed,
                           std::size_t warmup) {
  TimingReport report;
  report.alarm = alarm.spec().name();
  if (scenarios.empty()) return report;
  using Clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < std::min(warmup, scenarios.size()); ++i) {
    alarm(scenarios[i].belief, horizon, 0.5, derive_seed(seed, i));
  }
  std::vector<double> times;
  times.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto start = Clock::now();
    alarm(scenarios[i].belief, horizon, 0.5, derive_seed(seed, i));
    times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  double total = 0.0;
  for (double t : times) total += t;
  std::sort(times.begin(), times.end());
  auto percentile = [&times](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * times.size())) - 1;
    return times[std::min(idx, times.size() - 1)];
  };
  report.calls = times.size();
  report.mean_seconds = total / static_cast<double>(times.size());
  report.p50_seconds = percentile(0.5);
  report.p95_seconds = percentile(0.95);
  return report;
}

// ---------------------------------------------------------------------------
// Configuration

BenchmarkConfig BenchmarkConfig::defaults() {
  BenchmarkConfig c;
  for (const char* s : {"mc:10", "mc:100", "mc:1000", "ev", "ut"}) {
    c.alarms.push_back(AlarmSpec::parse(s));
  }
  c.costs = {CostConfig(1, 1), CostConfig(10, 1), CostConfig(100, 1)};
  return c;
}

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::set<std::string> known;
  const nlohmann::json scenario_keys = to_json(ScenarioConfig{});
  for (const auto& item : scenario_keys.items()) known.insert(item.key());
  for (const char* k : {"n", "alarms", "samples", "costs", "r_fp", "oracle_samples",
                        "threads", "timing_scenarios", "batch", "out"}) {
    known.insert(k);
  }
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw std::invalid_argument("unknown config key: " + item.key());
    }
  }

  BenchmarkConfig c = BenchmarkConfig::defaults();
  c.scenario = scenario_config_from_json(j);
  c.seed = c.scenario.seed;
  if (j.contains("n")) c.n_scenarios = j.at("n").get<std::size_t>();
  if (j.contains("alarms")) {
    c.alarms.clear();
    for (const auto& a : j.at("alarms")) c.alarms.push_back(AlarmSpec::parse(a.get<std::string>()));
  }
  if (j.contains("samples")) {
    std::erase_if(c.alarms, [](const AlarmSpec& a) { return a.kind == AlarmKind::monte_carlo; });
    const auto& samples = j.at("samples");
    std::vector<std::size_t> counts = samples.is_array()
                                          ? samples.get<std::vector<std::size_t>>()
                                          : std::vector<std::size_t>{samples.get<std::size_t>()};
    std::vector<AlarmSpec> mc;
    for (auto n : counts) mc.push_back(AlarmSpec::parse("mc:" + std::to_string(n)));
    c.alarms.insert(c.alarms.begin(), mc.begin(), mc.end());
  }
  const double r_fp = j.value("r_fp", 1.0);
  if (j.contains("costs")) {
    c.costs.clear();
    for (const auto& entry : j.at("costs")) {
      if (entry.is_array()) {
        c.costs.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
      } else {
        c.costs.emplace_back(entry.get<double>(), r_fp);
      }
    }
  } else if (j.contains("r_fp")) {
    for (auto& cost : c.costs) cost = CostConfig(cost.r_fn(), r_fp);
  }
  if (c.costs.empty()) throw std::invalid_argument("at least one cost config is required");
  if (j.contains("oracle_samples")) c.oracle_samples = j.at("oracle_samples").get<std::size_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("timing_scenarios")) {
    c.timing_scenarios = j.at("timing_scenarios").get<std::size_t>();
  }
  if (j.contains("batch")) c.batch_path = j.at("batch").get<std::string>();
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  if (c.n_scenarios == 0 && c.batch_path.empty()) {
    throw std::invalid_argument("n must be positive");
  }
  if (c.oracle_samples == 0) throw std::invalid_argument("oracle_samples must be positive");
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
  return c;
}

nlohmann::json to_json(const BenchmarkConfig& c) {
  nlohmann::json j = to_json(c.scenario);
  j["n"] = c.n_scenarios;
  std::vector<std::string> alarms;
  for (const auto& a : c.alarms) alarms.push_back(a.to_string());
  j["alarms"] = alarms;
  nlohmann::json costs = nlohmann::json::array();
  for (const auto& cost : c.costs) costs.push_back({cost.r_fn(), cost.r_fp()});
  j["costs"] = costs;
  j["oracle_samples"] = c.oracle_samples;
  j["timing_scenarios"] = c.timing_scenarios;
  if (!c.batch_path.empty()) j["batch"] = c.batch_path;
  return j;
}

std::uint64_t oracle_seed(std::uint64_t seed) {
  return derive_seed(seed, hash_name("oracle"));
}

BeliefGenerator training_beliefs(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.seed = derive_seed(config.seed, hash_name("training"));
  c.validate();
  return [c](std::size_t i) { return generate_scenario(c, i).belief; };
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string cost_label(const CostConfig& cost) {
  std::string label = "rfn" + format_number(cost.r_fn());
  if (cost.r_fp() != 1.0) label += "_rfp" + format_number(cost.r_fp());
  return label;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "NA";
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  files.push_back(path.filename().string());
}

std::string oracle_csv(const BenchmarkConfig& config, const EvaluationResult& oracle) {
  std::ostringstream out;
  out << "scenario,horizon,scenarios,collision_rate";
  for (const auto& cost : config.costs) {
    const auto l = cost_label(cost);
    out << ",fnr_" << l << ",fpr_" << l << ",ec_" << l;
  }
  out << '\n'
      << to_string(config.scenario.kind) << ',' << format_number(config.scenario.t_f) << ','
      << oracle.scenario_count << ',' << format_number(oracle.collision_rate);
  for (const auto& row : oracle.rows) {
    out << ',' << optional_number(row.fnr) << ',' << optional_number(row.fpr) << ','
        << format_number(row.ec);
  }
  out << '\n';
  return out.str();
}

std::string alarms_csv(const BenchmarkConfig& config,
                       const std::vector<EvaluationResult>& alarms) {
  std::ostringstream out;
  out << "alarm";
  for (const auto& cost : config.costs) out << ",eac_" << cost_label(cost);
  out << '\n';
  for (const auto& a : alarms) {
    out << a.alarm;
    for (std::size_t k = 0; k < config.costs.size(); ++k) {
      out << ',' << (a.error.empty() ? format_number(a.rows[k].eac) : "NA");
    }
    out << '\n';
  }
  return out.str();
}

std::string details_csv(const BenchmarkConfig& config, const EvaluationResult& oracle,
                        const std::vector<EvaluationResult>& alarms) {
  std::ostringstream out;
  out << "alarm,r_fn,r_fp,c_cut,fnr,fpr,ec,ec_se,eac,eac_se,joint_fn,joint_fp,"
         "alarm_rate,eac_bound,within_bound,error\n";
  auto emit = [&](const EvaluationResult& r, const AlarmSpec* spec) {
    if (!r.error.empty()) {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      for (const auto& cost : config.costs) {
        out << r.alarm << ',' << format_number(cost.r_fn()) << ',' << format_number(cost.r_fp())
            << ",,,,,,,,,,,,," << msg << '\n';
      }
      return;
    }
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      const CostRow& row = r.rows[k];
      out << r.alarm << ',' << format_number(row.r_fn) << ',' << format_number(row.r_fp) << ','
          << format_number(row.c_cut) << ',' << optional_number(row.fnr) << ','
          << optional_number(row.fpr) << ',' << format_number(row.ec) << ','
          << format_number(row.ec_se) << ',' << format_number(row.eac) << ','
          << format_number(row.eac_se) << ',' << format_number(row.joint_fn) << ','
          << format_number(row.joint_fp) << ',' << format_number(row.alarm_rate) << ',';
      if (spec && spec->kind == AlarmKind::monte_carlo) {
        const double bound = mc_eac_bound(static_cast<long long>(spec->samples), config.costs[k]);
        out << format_number(bound) << ',' << (row.eac <= bound ? "true" : "false");
      } else {
        out << ',';
      }
      out << ",\n";
    }
  };
  emit(oracle, nullptr);
  for (std::size_t i = 0; i < alarms.size(); ++i) emit(alarms[i], &config.alarms[i]);
  return out.str();
}

std::string timing_csv(const std::vector<TimingReport>& timings) {
  std::ostringstream out;
  out << "alarm,calls,mean_ms,p50_ms,p95_ms\n";
  for (const auto& t : timings) {
    out << t.alarm << ',' << t.calls << ',' << format_number(1e3 * t.mean_seconds) << ','
        << format_number(1e3 * t.p50_seconds) << ',' << format_number(1e3 * t.p95_seconds)
        << '\n';
  }
  return out.str();
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.costs.empty()) throw std::invalid_argument("at least one cost config is required");
  const std::vector<Scenario> scenarios =
      config.batch_path.empty()
          ? generate_batch(config.scenario, config.n_scenarios, config.threads)
          : read_scenario_records(config.batch_path, config.scenario);
  if (scenarios.empty()) throw std::invalid_argument("scenario batch is empty");
  const HorizonConfig horizon = config.scenario.horizon();

  BenchmarkReport report;
  AlarmSpec oracle_spec;
  oracle_spec.kind = AlarmKind::monte_carlo;
  oracle_spec.samples = config.oracle_samples;
  const auto oracle = run_alarm(AlarmRunner(oracle_spec), scenarios, horizon,
                                oracle_seed(config.seed), config.threads);
  report.oracle = evaluate("oracle", oracle, scenarios, config.costs, oracle);

  std::vector<std::optional<AlarmRunner>> runners;
  for (const auto& spec : config.alarms) {
    std::optional<AlarmRunner> runner;
    try {
      runner.emplace(spec);
      const auto results = run_alarm(*runner, scenarios, horizon, config.seed,
                                     config.threads);
      report.alarms.push_back(
          evaluate(spec.name(), results, scenarios, config.costs, oracle));
    } catch (const std::exception& e) {
      EvaluationResult failed;
      failed.alarm = spec.name();
      failed.scenario_count = scenarios.size();
      failed.error = e.what();
      report.alarms.push_back(std::move(failed));
      runner.reset();
    }
    runners.push_back(std::move(runner));
  }

  if (config.timing_scenarios > 0) {
    const std::span<const Scenario> subset(
        scenarios.data(), std::min(config.timing_scenarios, scenarios.size()));
    report.timings.push_back(
        timing_report(AlarmRunner(AlarmSpec{}), subset, horizon, config.seed));
    report.timings.back().alarm = "baseline-noop";
    for (const auto& runner : runners) {
      if (runner) report.timings.push_back(timing_report(*runner, subset, horizon, config.seed));
    }
  }

  if (!config.out_dir.empty()) {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    write_file(dir / "oracle.csv", oracle_csv(config, report.oracle), report.files);
    write_file(dir / "alarms.csv", alarms_csv(config, report.alarms), report.files);
    write_file(dir / "details.csv", details_csv(config, report.oracle, report.alarms),
               report.files);
    if (!report.timings.empty()) {
      write_file(dir / "timing.csv", timing_csv(report.timings), report.files);
    }
    nlohmann::json manifest = {
        {"tool", "optalarm"},
        {"version", OPTALARM_VERSION},
        {"compiler", __VERSION__},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"seed", config.seed},
        {"oracle_seed", oracle_seed(config.seed)},
        {"scenario_config_hash", config_hash(config.scenario)},
        {"config", to_json(config)},
        {"files", report.files},
    };
    write_file(dir / "manifest.json", manifest.dump(2) + "\n", report.files);
  }
  return report;
}

}  // namespace optalarm
