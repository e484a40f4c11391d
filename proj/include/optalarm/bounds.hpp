#pragma once

namespace optalarm {

/// Penalties for a missed collision (false negative) and a false alarm.
class CostConfig {
 public:
  CostConfig(double r_fn, double r_fp);

  double r_fn() const { return r_fn_; }
  double r_fp() const { return r_fp_; }
  double sum() const { return r_fn_ + r_fp_; }

 private:
  double r_fn_;
  double r_fp_;
};

/// Probability threshold of the optimal alarm: R_FP / (R_FN + R_FP).
double optimal_cutoff(const CostConfig& costs);

/// Worst-case per-state expected cost of the optimal alarm,
/// R_FP R_FN / (R_FN + R_FP).
double optimal_ec_ceiling(const CostConfig& costs);

/// Azuma-Hoeffding tail for a mean of n samples in [0,1]:
/// min(1, 2 exp(-n eps^2 / 2)). n = 0 gives 1.
double hoeffding_p_eps(long long n, double eps);

/// Expected additional cost bound for an estimator that is within eps of the
/// true collision probability except with probability p_eps:
/// max(eps, p_eps) (R_FN + R_FP), capped at R_FN + R_FP.
double eac_bound(double eps, double p_eps, const CostConfig& costs);

/// eac_bound with p_eps from hoeffding_p_eps at a fixed eps.
double mc_eac_bound_at(long long n, double eps, const CostConfig& costs);

/// eps minimizing max(eps, hoeffding_p_eps(n, eps)) over (0, 1), found by
/// bisection on eps = 2 exp(-n eps^2 / 2) to 1e-10. Returns 1 when the
/// Hoeffding tail never drops below 1 on (0, 1).
double mc_optimal_eps(long long n);

/// Tightest Hoeffding-based EAC bound for an n-sample Monte Carlo alarm.
/// Equals (R_FN + R_FP) * mc_optimal_eps(n); n <= 0 gives R_FN + R_FP.
double mc_eac_bound(long long n, const CostConfig& costs);

/// (R_FN + R_FP) * rmse, capped at R_FN + R_FP.
double rmse_eac_bound(double rmse, const CostConfig& costs);

}  // namespace optalarm
