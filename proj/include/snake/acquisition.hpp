#pragma once

#include <functional>

#include "snake/gp.hpp"

namespace snake {

/// Thresholds of the expected-improvement point deletion rule: a candidate is
/// deletable when EI/C0 < delta and posterior variance < nu.
struct StoppingConfig {
  double delta = 1e-3;
  double nu = 0.1;

  void validate() const;
};

/// Fixed (per-experiment) cost C0 as a function of the input.
using FixedCost = std::function<double(const Point&)>;

double standard_normal_pdf(double z);
double standard_normal_cdf(double z);

/// Closed-form EI for maximization given a Gaussian predictive N(mean, sd^2).
double expected_improvement(double mean, double sd, double best);
double expected_improvement(const GaussianProcessModel& model, const Point& x, double best);

double ei_per_unit_cost(const GaussianProcessModel& model, const Point& x, double best,
                        const FixedCost& cost0);

bool should_delete(const GaussianProcessModel& model, const Point& x, double best,
                   const FixedCost& cost0, const StoppingConfig& cfg);

/// Same rule applied to precomputed quantities.
bool should_delete(double eipu, double variance, const StoppingConfig& cfg);

}  // namespace snake
