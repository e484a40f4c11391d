// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--cli <path to optalarm>] [--only 1,5,...] [--threads N]
//              [--work <dir>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "optalarm/alarms.hpp"
#include "optalarm/bounds.hpp"
#include "optalarm/geometry.hpp"
#include "optalarm/harness.hpp"
#include "optalarm/random.hpp"
#include "optalarm/regression.hpp"
#include "optalarm/scenarios.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace optalarm;

namespace {

struct Options {
  std::string cli;
  std::set<int> only;
  int threads = 1;
  fs::path work = "acceptance_work";
};

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("violated: " + what);
    }
  }
  void note(const std::string& text) { notes.push_back(text); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<CostConfig> unit_costs() { return {{1, 1}, {10, 1}, {100, 1}}; }

// 1 -----------------------------------------------------------------------

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Verdict bound_curve(const Options& opt) {
  Verdict out;
  const auto costs = unit_costs();
  std::vector<std::vector<double>> rows;
  if (!opt.cli.empty()) {
    const fs::path csv = opt.work / "bound.csv";
    const std::string cmd = "\"" + opt.cli + "\" bound --costs 1,10,100 --r-fp 1 --n-min 1 "
                            "--n-max 100000 --points 400 --out \"" + csv.string() + "\"";
    out.require(std::system(cmd.c_str()) == 0, "bound subcommand exits cleanly");
    std::string header;
    rows = parse_csv(read_file(csv), header);
    out.require(header == "n,bound_rfn1,bound_rfn10,bound_rfn100", "bound CSV header");
    out.note("curve from the bound subcommand");
  } else {
    for (int i = 0; i <= 400; ++i) {
      const double n = std::round(std::pow(10.0, 5.0 * i / 400));
      if (!rows.empty() && n <= rows.back()[0]) continue;
      std::vector<double> row{n};
      for (const auto& c : costs) row.push_back(mc_eac_bound(static_cast<long long>(n), c));
      rows.push_back(row);
    }
    out.note("curve from the library (no --cli given)");
  }
  out.require(rows.size() > 100, "curve has more than 100 points");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    for (std::size_t j = 1; j <= costs.size(); ++j) {
      if (!(rows[k][j] < rows[k - 1][j])) {
        out.require(false, "strictly decreasing at n = " + fmt("%.0f", rows[k][0]));
        k = rows.size();
        break;
      }
    }
  }
  for (const auto& row : rows) {
    for (std::size_t j = 1; j <= costs.size(); ++j) {
      const double lib = mc_eac_bound(static_cast<long long>(row[0]), costs[j - 1]);
      // CSV values carry six significant digits.
      out.require(std::abs(row[j] - lib) <= 1e-5 * lib, "CSV value equals mc_eac_bound");
      if (!out.pass) return out;
    }
  }
  double worst = 0.0;
  for (long long n : {100LL, 1000LL, 10000LL}) {
    const double diff = std::abs(mc_optimal_eps(n) - oracle::grid_bound_factor(n));
    worst = std::max(worst, diff);
    out.require(diff <= 1e-6, "bisection eps matches grid at n = " + std::to_string(n));
  }
  out.note(std::to_string(rows.size()) + " points, max |eps - grid| = " + fmt("%.2e", worst));
  return out;
}

// 2 -----------------------------------------------------------------------

Verdict closed_form(const Options&) {
  Verdict out;
  auto close = [&](double got, double want, const std::string& what) {
    out.require(std::abs(got - want) <= 1e-12, what + fmt(" (got %.17g, want %.17g)", got, want));
  };
  close(optimal_cutoff({1, 1}), 0.5, "optimal_cutoff(1,1)");
  close(optimal_cutoff({10, 1}), 1.0 / 11.0, "optimal_cutoff(10,1)");
  close(optimal_cutoff({100, 1}), 1.0 / 101.0, "optimal_cutoff(100,1)");
  close(optimal_cutoff({1, 3}), 0.75, "optimal_cutoff(1,3)");
  close(optimal_ec_ceiling({1, 1}), 0.5, "optimal_ec_ceiling(1,1)");
  close(optimal_ec_ceiling({10, 1}), 10.0 / 11.0, "optimal_ec_ceiling(10,1)");
  close(optimal_ec_ceiling({100, 1}), 100.0 / 101.0, "optimal_ec_ceiling(100,1)");
  close(optimal_ec_ceiling({1, 3}), 0.75, "optimal_ec_ceiling(1,3)");
  close(hoeffding_p_eps(1000, 0.05), 0.5730095937203802, "hoeffding_p_eps(1000,0.05)");
  close(hoeffding_p_eps(100, 0.1), 1.0, "hoeffding_p_eps(100,0.1) capped");
  close(hoeffding_p_eps(10000, 0.05), 2.0 * std::exp(-12.5), "hoeffding_p_eps(10000,0.05)");
  close(hoeffding_p_eps(0, 0.3), 1.0, "hoeffding_p_eps(0,0.3)");
  close(rmse_eac_bound(0.1, {10, 1}), 1.1, "rmse_eac_bound(0.1,(10,1))");
  close(rmse_eac_bound(0.0, {1, 1}), 0.0, "rmse_eac_bound(0,(1,1))");
  close(rmse_eac_bound(0.25, {1, 1}), 0.5, "rmse_eac_bound(0.25,(1,1))");
  out.note("15 values");
  return out;
}

// 3 -----------------------------------------------------------------------

Verdict geometry_oracle(const Options&) {
  Verdict out;
  Rng rng(20240531);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> len(0.5, 6.0);
  auto rect = [&] { return OrientedRect(Pose(pos(rng), pos(rng), ang(rng)), len(rng), len(rng) / 2); };
  constexpr int kPerSide = 80;
  int agree = 0, boundary = 0, bad = 0, positives = 0;
  for (int i = 0; i < 10000; ++i) {
    const OrientedRect a = rect();
    const OrientedRect b = rect();
    const auto sampled = oracle::sampled_overlap(a, b, kPerSide);
    positives += sampled.overlap;
    if (sampled.overlap == rect_overlap(a, b)) {
      ++agree;
    } else if (oracle::near_boundary(a, b, sampled.resolution, kPerSide)) {
      ++boundary;
    } else {
      ++bad;
    }
  }
  out.require(bad == 0, std::to_string(bad) + " disagreements away from the boundary");
  out.note("10000 pairs, " + std::to_string(positives) + " overlapping, " +
           std::to_string(agree) + " agree, " + std::to_string(boundary) +
           " boundary-resolution disagreements");
  return out;
}

// 4 -----------------------------------------------------------------------

// Two vehicles on one straight path at equal speed with no process noise, so
// the gap is frozen and they collide iff |s2 - s1| <= 5 (vehicle length).
JointBelief gap_belief(double gap) {
  const MotionModel line = MotionModel::path(
      PathCurve(Pose(0, 0, 0), {PathCurve::straight(200.0)}), 0.1, Eigen::MatrixXd::Zero(2, 2));
  Eigen::VectorXd mean(4);
  mean << 0.0, 10.0, gap, 10.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  cov(0, 0) = 1.0;
  cov(2, 2) = 1.0;
  return JointBelief(mean, cov, {line, line});
}

double gap_truth(double gap) {
  const double sd = std::sqrt(2.0);
  return oracle::normal_cdf((5.0 - gap) / sd) - oracle::normal_cdf((-5.0 - gap) / sd);
}

Verdict mc_statistics(const Options& opt) {
  Verdict out;
  constexpr int kReps = 1000;
  const HorizonConfig horizon;
  for (double gap : {5.0, 6.0}) {
    const JointBelief belief = gap_belief(gap);
    const double truth = gap_truth(gap);
    for (std::size_t n : {100u, 1000u}) {
      std::vector<double> estimates(kReps);
      for (int r = 0; r < kReps; ++r) {
        const auto seed = derive_seed(7, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r));
        estimates[r] = *mc_alarm(belief, horizon, n, 0.5, seed, opt.threads).estimate;
      }
      for (double eps : {0.05, 0.1}) {
        const auto within = std::count_if(estimates.begin(), estimates.end(),
                                          [&](double e) { return std::abs(e - truth) <= eps; });
        const double freq = static_cast<double>(within) / kReps;
        const double floor = 1.0 - hoeffding_p_eps(static_cast<long long>(n), eps);
        const std::string tag = "P=" + fmt("%.4f", truth) + " N=" + std::to_string(n) +
                                fmt(" eps=%.2f", eps);
        out.require(freq >= floor, tag + fmt(": %.3f < %.3f", freq, floor));
        out.note(tag + fmt(": %.3f >= %.3f", freq, floor));
      }
    }
  }
  return out;
}

// 5 -----------------------------------------------------------------------

struct Setting {
  ScenarioKind kind;
  double t_f;
  std::string label() const { return to_string(kind) + fmt(" t_f=%.1f", t_f); }
};

double per_scenario_cost(bool collided, bool alarm, const CostConfig& c) {
  return (collided && !alarm ? c.r_fn() : 0.0) + (alarm && !collided ? c.r_fp() : 0.0);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.se = x.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return m;
}

Verdict qualitative(const Options& opt) {
  Verdict out;
  const std::vector<Setting> settings{{ScenarioKind::left_turn, 1.0},
                                      {ScenarioKind::left_turn, 2.5},
                                      {ScenarioKind::bicycle, 1.0}};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::vector<std::size_t> samples{10, 100, 1000};
  const auto costs = unit_costs();
  constexpr std::size_t kScenarios = 1000;

  std::vector<double> rate_at_1s(2, 0.0);  // left-turn, bicycle; pooled over seeds
  for (const Setting& setting : settings) {
    // Per cost config and alarm: costs pooled over every seed's batch, so
    // the seed average and its standard error come from one paired sample.
    std::vector<std::vector<std::vector<double>>> cost_of(
        costs.size(), std::vector<std::vector<double>>(samples.size() + 1));
    std::vector<std::vector<std::vector<double>>> oracle_cost(costs.size());
    for (std::uint64_t seed : seeds) {
      ScenarioConfig config;
      config.kind = setting.kind;
      config.t_f = setting.t_f;
      config.seed = seed;
      config.validate();
      const auto scenarios = generate_batch(config, kScenarios, opt.threads);
      const HorizonConfig horizon = config.horizon();

      AlarmSpec oracle_spec;
      oracle_spec.kind = AlarmKind::monte_carlo;
      oracle_spec.samples = 20000;
      const auto oracle = run_alarm(AlarmRunner(oracle_spec), scenarios, horizon,
                                    oracle_seed(seed), opt.threads);
      const EvaluationResult oracle_eval = evaluate("oracle", oracle, scenarios, costs, oracle);
      if (setting.t_f == 1.0) {
        rate_at_1s[setting.kind == ScenarioKind::bicycle ? 1 : 0] +=
            oracle_eval.collision_rate / static_cast<double>(seeds.size());
      }
      for (std::size_t c = 0; c < costs.size(); ++c) {
        const CostRow& row = oracle_eval.rows[c];
        const double ceiling = optimal_ec_ceiling(costs[c]);
        out.require(row.ec <= ceiling + 3.0 * row.ec_se,
                    "(b) " + setting.label() + " seed " + std::to_string(seed) +
                        fmt(" R_FN=%g: oracle EC %.4g > ceiling + 3 SE", costs[c].r_fn(), row.ec));
      }

      std::vector<std::vector<AlarmResult>> results;
      for (std::size_t n : samples) {
        AlarmSpec spec;
        spec.kind = AlarmKind::monte_carlo;
        spec.samples = n;
        results.push_back(run_alarm(AlarmRunner(spec), scenarios, horizon, seed, opt.threads));
        const EvaluationResult eval = evaluate(spec.name(), results.back(), scenarios, costs, oracle);
        for (std::size_t c = 0; c < costs.size(); ++c) {
          const double bound = mc_eac_bound(static_cast<long long>(n), costs[c]);
          out.require(eval.rows[c].eac <= bound,
                      "(d) " + setting.label() + " seed " + std::to_string(seed) + " " +
                          spec.name() + fmt(" R_FN=%g: EAC %.4g > bound %.4g", costs[c].r_fn(),
                                            eval.rows[c].eac, bound));
        }
      }
      results.push_back(run_alarm(AlarmRunner(AlarmSpec::parse("ev")), scenarios, horizon, seed,
                                  opt.threads));

      for (std::size_t c = 0; c < costs.size(); ++c) {
        const double cut = optimal_cutoff(costs[c]);
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
          const bool collided = scenarios[i].collided;
          const double o = per_scenario_cost(collided, decide(oracle[i], cut), costs[c]);
          for (std::size_t a = 0; a < results.size(); ++a) {
            cost_of[c][a].push_back(
                per_scenario_cost(collided, decide(results[a][i], cut), costs[c]) - o);
          }
        }
      }
    }

    // (c) ordering MC-1000 <= MC-100 <= MC-10, one SE of the paired
    // difference of seed-averaged EACs.
    for (std::size_t c = 0; c < costs.size(); ++c) {
      std::string eacs;
      for (std::size_t a = 0; a < samples.size(); ++a) {
        eacs += (a ? " / " : "") + fmt("%.4f", mean_se(cost_of[c][a]).mean);
      }
      out.note("(c) " + setting.label() + fmt(" R_FN=%g", costs[c].r_fn()) +
               " EAC mc-10/100/1000 = " + eacs);
      for (std::size_t a = 0; a + 1 < samples.size(); ++a) {
        std::vector<double> diff(cost_of[c][a].size());
        for (std::size_t i = 0; i < diff.size(); ++i) {
          diff[i] = cost_of[c][a + 1][i] - cost_of[c][a][i];
        }
        const MeanSe d = mean_se(diff);
        out.require(d.mean <= d.se,
                    "(c) " + setting.label() + fmt(" R_FN=%g", costs[c].r_fn()) + ": mc-" +
                        std::to_string(samples[a + 1]) + " exceeds mc-" +
                        std::to_string(samples[a]) + fmt(" by %.4g (SE %.4g)", d.mean, d.se));
      }
    }

    // (e) growth of EAC from R_FN = 1 to R_FN = 100.
    const std::size_t ev = samples.size();
    const std::size_t mc100 = 1;
    const double ev_slope =
        (mean_se(cost_of.back()[ev]).mean - mean_se(cost_of.front()[ev]).mean) /
        (costs.back().r_fn() - costs.front().r_fn());
    const double mc_slope =
        (mean_se(cost_of.back()[mc100]).mean - mean_se(cost_of.front()[mc100]).mean) /
        (costs.back().r_fn() - costs.front().r_fn());
    out.require(ev_slope > mc_slope, "(e) " + setting.label() +
                                         fmt(": EV slope %.4g <= mc-100 slope %.4g", ev_slope,
                                             mc_slope));
    out.note("(e) " + setting.label() + fmt(" EAC slope EV %.4g vs mc-100 %.4g", ev_slope, mc_slope));
  }
  out.require(rate_at_1s[1] > rate_at_1s[0],
              fmt("(a) bicycle rate %.3f <= left-turn rate %.3f", rate_at_1s[1], rate_at_1s[0]));
  out.note(fmt("(a) collision rate at t_f=1: left-turn %.3f, bicycle %.3f", rate_at_1s[0],
               rate_at_1s[1]));
  return out;
}

// 6 -----------------------------------------------------------------------

Verdict regression_bound(const Options& opt) {
  Verdict out;
  ScenarioConfig config;
  config.seed = 11;
  config.validate();
  const HorizonConfig horizon = config.horizon();

  TrainingOptions train;
  train.hidden = 150;
  train.seed = derive_seed(config.seed, hash_name("fit"));
  const auto trained = train_regression(training_beliefs(config), horizon, 1000, 100000, train,
                                        FeatureOptions{}, opt.threads);
  out.note(fmt("trained %.0f epochs, train RMSE %.4f, validation RMSE %.4f",
               static_cast<double>(trained.report.epochs), trained.report.train_rmse, trained.report.validation_rmse));

  const auto scenarios = generate_batch(config, 1000, opt.threads);
  AlarmSpec oracle_spec;
  oracle_spec.kind = AlarmKind::monte_carlo;
  oracle_spec.samples = 20000;
  const auto oracle = run_alarm(AlarmRunner(oracle_spec), scenarios, horizon,
                                oracle_seed(config.seed), opt.threads);
  AlarmSpec spec;
  spec.kind = AlarmKind::regression;
  const AlarmRunner runner(spec, std::make_shared<const RegressionModel>(trained.model));
  const auto results = run_alarm(runner, scenarios, horizon, config.seed, opt.threads);

  double ss = 0.0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const double e = *results[i].estimate - *oracle[i].estimate;
    ss += e * e;
  }
  const double rmse = std::sqrt(ss / static_cast<double>(scenarios.size()));
  out.note(fmt("held-out RMSE against the 20000-sample oracle %.4f", rmse));

  const auto costs = unit_costs();
  const EvaluationResult eval = evaluate("mlp", results, scenarios, costs, oracle);
  for (std::size_t c = 0; c < costs.size(); ++c) {
    const double bound = rmse_eac_bound(rmse, costs[c]);
    const std::string tag = fmt("R_FN=%g: EAC %.4f, bound %.4f", costs[c].r_fn(),
                                eval.rows[c].eac, bound);
    out.require(eval.rows[c].eac <= bound, tag);
    out.note(tag);
  }
  return out;
}

// 7 -----------------------------------------------------------------------

Verdict determinism(const Options& opt) {
  Verdict out;
  ScenarioConfig sc;
  sc.kind = ScenarioKind::bicycle;
  sc.seed = 5;
  sc.validate();

  // A small regression model so the learned alarm is covered too.
  TrainingOptions train;
  train.hidden = 16;
  train.max_epochs = 10;
  train.seed = 3;
  const fs::path model_a = opt.work / "det_mlp_1.json";
  const fs::path model_b = opt.work / "det_mlp_3.json";
  train_regression(training_beliefs(sc), sc.horizon(), 100, 400, train, {}, 1).model.save(model_a.string());
  train_regression(training_beliefs(sc), sc.horizon(), 100, 400, train, {}, 3).model.save(model_b.string());
  out.require(read_file(model_a) == read_file(model_b), "trained weights identical for 1 and 3 threads");

  auto run = [&](int threads, const std::string& dir) {
    BenchmarkConfig config = BenchmarkConfig::defaults();
    config.scenario = sc;
    config.n_scenarios = 300;
    config.oracle_samples = 2000;
    config.seed = sc.seed;
    config.alarms.push_back(AlarmSpec::parse("mlp:" + model_a.string()));
    config.threads = threads;
    config.timing_scenarios = 5;
    config.out_dir = (opt.work / dir).string();
    run_benchmark(config);
  };
  run(1, "det_a");
  run(1, "det_b");
  run(3, "det_c");
  for (const char* file : {"oracle.csv", "alarms.csv", "details.csv"}) {
    const std::string a = read_file(opt.work / "det_a" / file);
    out.require(!a.empty(), std::string(file) + " written");
    out.require(a == read_file(opt.work / "det_b" / file), std::string(file) + " identical across runs");
    out.require(a == read_file(opt.work / "det_c" / file), std::string(file) + " identical for 1 and 3 threads");
  }
  out.note("oracle.csv, alarms.csv, details.csv compared over 3 runs");
  return out;
}

// 8 -----------------------------------------------------------------------

Verdict ttc(const Options& opt) {
  Verdict out;
  const ModelPair bikes{MotionModel::bicycle(0.1, Eigen::MatrixXd::Zero(6, 6)),
                        MotionModel::bicycle(0.1, Eigen::MatrixXd::Zero(6, 6))};
  HorizonConfig h;
  struct Case {
    double gap, v1, v2;
  };
  // Head-on along the x axis; 5 m long vehicles touch once the centre gap
  // closes to 5 m, at t = (gap - 5) / (v1 + v2).
  for (const Case& k : {Case{15, 10, 10}, Case{23, 7, 7}, Case{40, 12, 3}, Case{9.2, 2.5, 4}}) {
    JointVector x(12);
    x << 0, 0, 0, k.v1, 0, 0, k.gap, 0, kPi, k.v2, 0, 0;
    const JointBelief belief(x, Eigen::MatrixXd::Zero(12, 12), bikes);
    const double exact = (k.gap - 5.0) / (k.v1 + k.v2);
    for (double c : {0.0, 0.5, 0.99}) {
      const auto t = estimate_ttc(belief, h, 5.0, 50, c, 1, opt.threads);
      out.require(t.has_value() && std::abs(*t - exact) <= h.dt + 1e-12,
                  fmt("gap %.1f: TTC off the analytic %.4f by more than dt", k.gap, exact));
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> cuts{0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01, 0.0};
  int monotone = 0, finite = 0;
  for (ScenarioKind kind : {ScenarioKind::left_turn, ScenarioKind::bicycle}) {
    ScenarioConfig config;
    config.kind = kind;
    config.seed = 31;
    for (std::size_t i = 0; i < 50; ++i) {
      const Scenario s = generate_scenario(config, i);
      double prev = inf;
      bool ok = true;
      for (double c : cuts) {
        const double t = estimate_ttc(s.belief, config.horizon(), 4.0, 500, c,
                                      derive_seed(31, i), opt.threads)
                             .value_or(inf);
        ok = ok && t <= prev;
        prev = t;
      }
      finite += prev < inf;
      monotone += ok;
    }
  }
  out.require(monotone == 100, std::to_string(100 - monotone) + " beliefs not monotone in c_cut");
  out.note("4 analytic cases x 3 cutoffs; 100 beliefs monotone, " + std::to_string(finite) +
           " with a finite TTC at c_cut = 0");
  return out;
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  // 0 for no limit
  std::function<Verdict(const Options&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << '\n';
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--cli") {
      opt.cli = value();
    } else if (arg == "--only") {
      std::istringstream ids(value());
      std::string id;
      while (std::getline(ids, id, ',')) opt.only.insert(std::stoi(id));
    } else if (arg == "--threads") {
      opt.threads = std::stoi(value());
    } else if (arg == "--work") {
      opt.work = value();
    } else {
      std::cerr << "unknown argument " << arg << '\n';
      return 2;
    }
  }
  fs::create_directories(opt.work);

  const std::vector<Criterion> criteria{
      {1, "bound curve", 1.0, bound_curve},
      {2, "closed-form theory", 0.0, closed_form},
      {3, "geometry oracle equivalence", 10.0, geometry_oracle},
      {4, "MC estimator statistics", 120.0, mc_statistics},
      {5, "qualitative reproduction", 1800.0, qualitative},
      {6, "regression alarm RMSE bound", 1800.0, regression_bound},
      {7, "determinism", 0.0, determinism},
      {8, "time to collision", 0.0, ttc},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict outcome;
    try {
      outcome = c.run(opt);
    } catch (const std::exception& e) {
      outcome.require(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0) {
      outcome.require(seconds < c.limit_seconds, fmt("runtime %.1f s over the %.0f s limit",
                                                     seconds, c.limit_seconds));
    }
    std::printf("%s  %d. %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                seconds);
    for (const auto& n : outcome.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
