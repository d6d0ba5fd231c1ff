#pragma once

#include <cstdint>
#include <vector>

#include "snake/benchmarks.hpp"

namespace snake {

/// Simulated-annealing schedule for open tours. Geometric cooling from the mean
/// pairwise edge cost down to `final_temperature_ratio` of it, over
/// min(proposals_per_n2 * n^2, max_proposals) 2-opt / relocation proposals.
struct TspConfig {
  int proposals_per_n2 = 100;
  long max_proposals = 40'000;
  double final_temperature_ratio = 1e-3;
  std::uint64_t seed = 0;
};

/// Visiting order over batch indices 0..n-1 for a path that starts at a fixed node.
struct Tour {
  std::vector<std::size_t> order;
  double cost = 0.0;
};

/// Edge costs for an open tour: node 0 is the fixed start, node i+1 is batch[i].
Eigen::MatrixXd tour_cost_matrix(const std::vector<Point>& batch, const Point& current,
                                 const CostModel& cm);

/// Cost of visiting `order` (batch indices) starting from node 0 of `dist`.
double open_tour_cost(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& order);

Tour nearest_neighbour_tour(const Eigen::MatrixXd& dist);
Tour solve_open_tour(const Eigen::MatrixXd& dist, const TspConfig& cfg);

/// Orders `batch` into a path starting at `current` that cheaply visits every point once.
/// The result costs no more than either the input order or the greedy nearest-neighbour order.
std::vector<Point> order_batch(const std::vector<Point>& batch, const Point& current,
                               const CostModel& cm, const TspConfig& cfg = {});

}  // namespace snake
