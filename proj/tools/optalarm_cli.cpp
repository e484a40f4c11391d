// optalarm command-line tool: scenario generation, benchmarks, bound curves,
// regression training and time-to-collision queries.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "optalarm/bounds.hpp"
#include "optalarm/harness.hpp"
#include "optalarm/regression.hpp"
#include "optalarm/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace optalarm;

namespace {

// Flags shared by every scenario-aware subcommand. Values left unset keep
// whatever the --config file (or the built-in default) says.
struct ScenarioFlags {
  std::string config_path;
  std::optional<std::string> scenario;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<double> margin;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (flat keys)")->check(CLI::ExistingFile);
    app->add_option("--scenario", scenario, "left-turn or bicycle")
        ->check(CLI::IsMember({"left-turn", "bicycle"}));
    app->add_option("--horizon", horizon, "Detection horizon t_f in seconds");
    app->add_option("--dt", dt, "Step and check interval in seconds");
    app->add_option("--margin", margin, "Safety margin added to each footprint side, meters");
    app->add_option("--seed", seed, "Seed for scenario generation and alarm streams");
  }

  json merged() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      j = json::parse(in);
      if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    }
    if (scenario) j["scenario"] = *scenario;
    if (horizon) j["horizon"] = *horizon;
    if (dt) j["dt"] = *dt;
    if (margin) j["margin"] = *margin;
    if (seed) j["seed"] = *seed;
    return j;
  }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

void print_report(const BenchmarkConfig& config, const BenchmarkReport& report) {
  std::cout << to_string(config.scenario.kind) << ", t_f = " << config.scenario.t_f << " s, "
            << report.oracle.scenario_count << " scenarios, collision rate "
            << pct(report.oracle.collision_rate) << "\n\n";
  std::printf("%-16s", "alarm");
  for (const auto& c : config.costs) {
    std::printf("  EAC R_FN=%-6s", format_number(c.r_fn()).c_str());
  }
  std::printf("\n");
  std::printf("%-16s", "oracle");
  for (const auto& row : report.oracle.rows) {
    std::printf("  EC  %-12s", format_number(row.ec).c_str());
  }
  std::printf("\n");
  for (const auto& a : report.alarms) {
    std::printf("%-16s", a.alarm.c_str());
    if (!a.error.empty()) {
      std::printf("  failed: %s\n", a.error.c_str());
      continue;
    }
    for (const auto& row : a.rows) std::printf("  %-16s", format_number(row.eac).c_str());
    std::printf("\n");
  }
  if (!report.timings.empty()) {
    std::printf("\n%-16s  %12s  %12s\n", "alarm", "mean ms", "p95 ms");
    for (const auto& t : report.timings) {
      std::printf("%-16s  %12s  %12s\n", t.alarm.c_str(),
                  format_number(1e3 * t.mean_seconds).c_str(),
                  format_number(1e3 * t.p95_seconds).c_str());
    }
  }
  if (!report.files.empty()) {
    std::cout << "\nwrote";
    for (const auto& f : report.files) std::cout << ' ' << f;
    std::cout << " to " << config.out_dir << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal collision alarms: simulation, evaluation and error bounds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(OPTALARM_VERSION));

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "Generate and store a scenario batch");
  ScenarioFlags sim_flags;
  sim_flags.attach(simulate);
  std::size_t sim_n = 1000;
  std::string sim_out = "scenarios";
  int sim_threads = 1;
  simulate->add_option("--n", sim_n, "Number of scenarios")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out, "Output directory");
  simulate->add_option("--threads", sim_threads)->check(CLI::PositiveNumber);

  // evaluate ---------------------------------------------------------------
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run alarms over a batch and score them");
  ScenarioFlags eval_flags;
  eval_flags.attach(evaluate_cmd);
  std::optional<std::size_t> eval_n;
  std::vector<std::size_t> eval_samples;
  std::vector<double> eval_costs;
  std::optional<double> eval_r_fp;
  std::vector<std::string> eval_alarms;
  std::optional<std::size_t> eval_oracle;
  std::optional<std::string> eval_batch;
  std::optional<std::string> eval_out;
  std::optional<int> eval_threads;
  std::optional<std::size_t> eval_timing;
  evaluate_cmd->add_option("--n", eval_n, "Number of scenarios (ignored with --batch)");
  evaluate_cmd->add_option("--samples", eval_samples, "Monte Carlo sample counts, e.g. 10 100 1000")
      ->delimiter(',');
  evaluate_cmd->add_option("--costs", eval_costs, "R_FN values, e.g. 1,10,100")->delimiter(',');
  evaluate_cmd->add_option("--r-fp", eval_r_fp, "False-positive cost (default 1)");
  evaluate_cmd->add_option("--alarms", eval_alarms,
                           "Alarm specs: mc:N, ev, ut[:kappa], mlp:weights.json, never")
      ->delimiter(',');
  evaluate_cmd->add_option("--oracle-samples", eval_oracle, "Samples of the reference alarm");
  evaluate_cmd->add_option("--batch", eval_batch, "Scenario record file from 'simulate'");
  evaluate_cmd->add_option("--out", eval_out, "Directory for CSV tables and manifest");
  evaluate_cmd->add_option("--threads", eval_threads);
  evaluate_cmd->add_option("--timing-scenarios", eval_timing, "Scenarios timed per alarm, 0 disables");

  // bound ------------------------------------------------------------------
  auto* bound = app.add_subcommand("bound", "Tabulate the Monte Carlo EAC bound against n");
  std::vector<double> bound_costs{1, 10, 100};
  double bound_r_fp = 1.0;
  long long n_min = 1;
  long long n_max = 100000;
  int points = 200;
  std::string bound_out;
  bound->add_option("--costs", bound_costs, "R_FN values")->delimiter(',');
  bound->add_option("--r-fp", bound_r_fp);
  bound->add_option("--n-min", n_min)->check(CLI::PositiveNumber);
  bound->add_option("--n-max", n_max)->check(CLI::PositiveNumber);
  bound->add_option("--points", points, "Log-spaced sample counts")->check(CLI::Range(2, 100000));
  bound->add_option("--out", bound_out, "CSV file (stdout if omitted)");

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Fit the regression alarm on simulated beliefs");
  ScenarioFlags train_flags;
  train_flags.attach(train);
  std::size_t train_n = 100000;
  std::size_t label_samples = 1000;
  TrainingOptions train_opts;
  bool ttc_surrogate = false;
  std::string train_out = "mlp.json";
  int train_threads = 1;
  train->add_option("--n", train_n, "Training beliefs")->check(CLI::PositiveNumber);
  train->add_option("--samples,--oracle-samples", label_samples, "Monte Carlo samples per label")
      ->check(CLI::PositiveNumber);
  train->add_option("--width", train_opts.hidden, "Hidden units")->check(CLI::PositiveNumber);
  train->add_option("--epochs", train_opts.max_epochs)->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", train_opts.learning_rate);
  train->add_option("--batch-size", train_opts.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--patience", train_opts.patience)->check(CLI::PositiveNumber);
  train->add_flag("--ttc-surrogate", ttc_surrogate, "Append the range/closing-speed feature");
  train->add_option("--out", train_out, "Weight file");
  train->add_option("--threads", train_threads)->check(CLI::PositiveNumber);

  // ttc --------------------------------------------------------------------
  auto* ttc = app.add_subcommand("ttc", "Time to collision for one belief");
  ScenarioFlags ttc_flags;
  ttc_flags.attach(ttc);
  std::string ttc_batch;
  std::size_t ttc_index = 0;
  double max_horizon = 5.0;
  std::size_t ttc_samples = 1000;
  std::vector<double> c_cuts{0.5};
  int ttc_threads = 1;
  ttc->add_option("--batch", ttc_batch, "Scenario record file (otherwise the scenario is generated)");
  ttc->add_option("--index", ttc_index, "Scenario index");
  ttc->add_option("--max-horizon", max_horizon, "Longest horizon searched, seconds");
  ttc->add_option("--samples", ttc_samples)->check(CLI::PositiveNumber);
  ttc->add_option("--c-cut", c_cuts, "Probability thresholds")->delimiter(',');
  ttc->add_option("--threads", ttc_threads)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const ScenarioConfig config = scenario_config_from_json(sim_flags.merged());
      const auto batch = generate_batch(config, sim_n, sim_threads);
      fs::create_directories(sim_out);
      const fs::path records = fs::path(sim_out) / "scenarios.jsonl";
      write_scenario_records(records.string(), config, batch);
      json manifest = to_json(config);
      manifest["n"] = sim_n;
      manifest["config_hash"] = config_hash(config);
      write_json(fs::path(sim_out) / "config.json", manifest);
      std::size_t collided = 0;
      std::size_t initial = 0;
      for (const auto& s : batch) {
        collided += s.collided;
        initial += s.initial_overlap;
      }
      std::cout << sim_n << " " << to_string(config.kind) << " scenarios, collision rate "
                << pct(static_cast<double>(collided) / sim_n) << " (" << initial
                << " overlapping at t = 0)\nwrote " << records.string() << '\n';
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      json j = eval_flags.merged();
      if (eval_n) j["n"] = *eval_n;
      if (!eval_samples.empty()) j["samples"] = eval_samples;
      if (eval_r_fp) j["r_fp"] = *eval_r_fp;
      if (!eval_costs.empty()) j["costs"] = eval_costs;
      if (!eval_alarms.empty()) j["alarms"] = eval_alarms;
      if (eval_oracle) j["oracle_samples"] = *eval_oracle;
      if (eval_batch) j["batch"] = *eval_batch;
      if (eval_out) j["out"] = *eval_out;
      if (eval_threads) j["threads"] = *eval_threads;
      if (eval_timing) j["timing_scenarios"] = *eval_timing;
      const BenchmarkConfig config = benchmark_config_from_json(j);
      const BenchmarkReport report = run_benchmark(config);
      print_report(config, report);
      return 0;
    }

    if (bound->parsed()) {
      if (n_max < n_min) throw std::invalid_argument("--n-max must be >= --n-min");
      std::vector<CostConfig> costs;
      for (double fn : bound_costs) costs.emplace_back(fn, bound_r_fp);
      std::ofstream file;
      if (!bound_out.empty()) {
        file.open(bound_out);
        if (!file) throw std::runtime_error("cannot write " + bound_out);
      }
      std::ostream& out = bound_out.empty() ? std::cout : file;
      out << 'n';
      for (const auto& c : costs) {
        out << ",bound_rfn" << format_number(c.r_fn());
        if (c.r_fp() != 1.0) out << "_rfp" << format_number(c.r_fp());
      }
      out << '\n';
      long long last = 0;
      const double lo = std::log(static_cast<double>(n_min));
      const double hi = std::log(static_cast<double>(n_max));
      for (int i = 0; i < points; ++i) {
        const double t = lo + (hi - lo) * i / (points - 1);
        const long long n = std::llround(std::exp(t));
        if (n <= last) continue;
        last = n;
        out << n;
        for (const auto& c : costs) out << ',' << format_number(mc_eac_bound(n, c));
        out << '\n';
      }
      return 0;
    }

    if (train->parsed()) {
      const ScenarioConfig config = scenario_config_from_json(train_flags.merged());
      train_opts.seed = derive_seed(config.seed, hash_name("fit"));
      FeatureOptions features;
      features.ttc_surrogate = ttc_surrogate;
      const TrainedRegression trained =
          train_regression(training_beliefs(config), config.horizon(), label_samples, train_n,
                           train_opts, features, train_threads);
      trained.model.save(train_out);
      const auto& r = trained.report;
      std::cout << "trained on " << r.train_size << " beliefs (" << r.validation_size
                << " held out) for " << r.epochs << " epochs\n"
                << "train RMSE " << format_number(r.train_rmse) << ", validation RMSE "
                << format_number(r.validation_rmse) << "\nwrote " << train_out << '\n';
      return 0;
    }

    if (ttc->parsed()) {
      const ScenarioConfig config = scenario_config_from_json(ttc_flags.merged());
      std::optional<Scenario> scenario;
      if (!ttc_batch.empty()) {
        auto batch = read_scenario_records(ttc_batch, config);
        for (auto& s : batch) {
          if (s.index == ttc_index) scenario = std::move(s);
        }
        if (!scenario) throw std::invalid_argument("index not found in batch");
      } else {
        scenario = generate_scenario(config, ttc_index);
      }
      const std::uint64_t seed = derive_seed(config.seed, hash_name("ttc"), ttc_index);
      std::cout << "c_cut,ttc\n";
      for (double c : c_cuts) {
        const auto t = estimate_ttc(scenario->belief, config.horizon(), max_horizon, ttc_samples,
                                    c, seed, ttc_threads);
        std::cout << format_number(c) << ',' << opt(t) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
