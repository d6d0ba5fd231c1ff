#include "snake/acquisition.hpp"

#include <cmath>
#include <numbers>

namespace snake {

void StoppingConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("stopping: delta must be positive");
  if (!(nu > 0.0)) throw ConfigError("stopping: nu must be positive");
}

double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sd, double best) {
  const double gap = mean - best;
  if (!(sd > 0.0)) return std::max(gap, 0.0);
  const double z = gap / sd;
  return std::max(sd * (z * standard_normal_cdf(z) + standard_normal_pdf(z)), 0.0);
}

double expected_improvement(const GaussianProcessModel& model, const Point& x, double best) {
  const auto p = model.posterior(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best);
}

double ei_per_unit_cost(const GaussianProcessModel& model, const Point& x, double best,
                        const FixedCost& cost0) {
  const double c = cost0(x);
  if (!(c > 0.0)) throw InputError("ei_per_unit_cost: fixed cost must be positive");
  return expected_improvement(model, x, best) / c;
}

bool should_delete(double eipu, double variance, const StoppingConfig& cfg) {
  return eipu < cfg.delta && variance < cfg.nu;
}

bool should_delete(const GaussianProcessModel& model, const Point& x, double best,
                   const FixedCost& cost0, const StoppingConfig& cfg) {
  const double c = cost0(x);
  if (!(c > 0.0)) throw InputError("should_delete: fixed cost must be positive");
  const auto p = model.posterior(x);
  const double eipu = expected_improvement(p.mean, std::sqrt(p.variance), best) / c;
  return should_delete(eipu, p.variance, cfg);
}

}  // namespace snake
