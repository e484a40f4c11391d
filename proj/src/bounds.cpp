#include "optalarm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace optalarm {

CostConfig::CostConfig(double r_fn, double r_fp) : r_fn_(r_fn), r_fp_(r_fp) {
  if (!(r_fn >= 0.0) || !(r_fp >= 0.0) || !std::isfinite(r_fn) ||
      !std::isfinite(r_fp)) {
    throw std::invalid_argument("costs must be finite and non-negative");
  }
  if (r_fn + r_fp == 0.0) {
    throw std::invalid_argument("at least one cost must be positive");
  }
}

double optimal_cutoff(const CostConfig& costs) {
  return costs.r_fp() / costs.sum();
}

double optimal_ec_ceiling(const CostConfig& costs) {
  return costs.r_fp() * costs.r_fn() / costs.sum();
}

double hoeffding_p_eps(long long n, double eps) {
  if (n < 0) throw std::invalid_argument("sample count must be non-negative");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be non-negative");
  return std::min(1.0, 2.0 * std::exp(-0.5 * static_cast<double>(n) * eps * eps));
}

double eac_bound(double eps, double p_eps, const CostConfig& costs) {
  if (!(eps >= 0.0) || !(p_eps >= 0.0)) {
    throw std::invalid_argument("eps and p_eps must be non-negative");
  }
  return std::min(std::max(eps, p_eps), 1.0) * costs.sum();
}

double mc_eac_bound_at(long long n, double eps, const CostConfig& costs) {
  if (n <= 0) return costs.sum();
  return eac_bound(eps, hoeffding_p_eps(n, eps), costs);
}

double mc_optimal_eps(long long n) {
  if (n <= 0) return 1.0;
  // g(eps) = eps - p(eps) is increasing; its root minimizes max(eps, p(eps)).
  auto gap = [n](double eps) { return eps - hoeffding_p_eps(n, eps); };
  if (gap(1.0) <= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  // The objective at hi is max(hi, p(hi)) = hi since gap(hi) >= 0.
  return hi;
}

double mc_eac_bound(long long n, const CostConfig& costs) {
  return costs.sum() * mc_optimal_eps(n);
}

double rmse_eac_bound(double rmse, const CostConfig& costs) {
  if (!(rmse >= 0.0)) throw std::invalid_argument("rmse must be non-negative");
  return std::min(rmse, 1.0) * costs.sum();
}

}  // namespace optalarm
