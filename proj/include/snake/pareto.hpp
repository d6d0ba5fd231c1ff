#pragma once

#include <cstddef>
#include <vector>

#include "snake/common.hpp"

namespace snake {

struct FrontPoint {
  Eigen::VectorXd objectives;
  Point input;  // may be empty when provenance is unknown
};

/// Non-dominated set in objective space (maximization). `tolerance` is the
/// epsilon used to build it; 0 means the strict front.
struct ParetoFront {
  std::vector<FrontPoint> points;
  double tolerance = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  int num_objectives() const { return empty() ? 0 : static_cast<int>(points.front().objectives.size()); }
  /// Objective vectors row-wise, shape (size, K).
  Eigen::MatrixXd objective_matrix() const;
};

/// q eps-dominates p when q_k >= p_k + eps for every k, with strict inequality for
/// at least one k. eps = 0 is ordinary Pareto dominance; eps > 0 keeps points that
/// fall short of the front by at most eps.
bool eps_dominates(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps);

/// Indices (ascending) of the rows of `objectives` not eps-dominated by any other row.
std::vector<std::size_t> pareto_indices(const Eigen::MatrixXd& objectives, double tolerance = 0.0);

ParetoFront pareto_front(const std::vector<FrontPoint>& points, double tolerance = 0.0);
ParetoFront pareto_front(const Eigen::MatrixXd& objectives, const Eigen::MatrixXd& inputs,
                         double tolerance = 0.0);

/// Mean over approx points of the distance to the nearest truth point.
double generational_distance(const ParetoFront& approx, const ParetoFront& truth);
/// Mean over truth points of the distance to the nearest approx point.
double inverted_generational_distance(const ParetoFront& approx, const ParetoFront& truth);
/// Max over approx points of the distance to the nearest truth point.
double maximum_pareto_front_error(const ParetoFront& approx, const ParetoFront& truth);

struct FrontMetrics {
  double gd;
  double igd;
  double mpfe;
};
FrontMetrics front_metrics(const ParetoFront& approx, const ParetoFront& truth);

}  // namespace snake
