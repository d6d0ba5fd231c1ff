#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "snake/pareto.hpp"

namespace snake {

/// Step cost = fixed(to) + movement(from, to) + penalty * [||to - from||_2 > delta_max].
struct CostBreakdown {
  double fixed = 0.0;
  double movement = 0.0;
  double penalty = 0.0;

  double total() const { return fixed + movement + penalty; }
};

struct MovementLimit {
  double delta_max;
  double penalty;
};

struct CostModel {
  std::string description;
  std::function<double(const Point&)> fixed_cost;
  std::function<double(const Point&, const Point&)> movement_cost;
  std::optional<MovementLimit> violation;

  /// True when fixed_cost is strictly positive everywhere (known by construction).
  bool positive_fixed_cost = false;

  CostBreakdown breakdown(const Point& from, const Point& to) const;
  /// Movement plus any violation penalty: the edge weight of the ordering problem.
  double transition_cost(const Point& from, const Point& to) const;
};

double step_cost(const CostModel& cm, const Point& from, const Point& to);

/// alpha + ||to - from||_2, the self-stopping experiments' cost.
CostModel self_stopping_cost(double alpha);
/// scale * ||to - from||_2 + penalty * [||to - from||_2 > delta_max].
CostModel truncated_cost(double delta_max, double scale = 0.2, double penalty = 1.0);
/// fixed + scale * ||to - from||_2.
CostModel euclidean_cost(double scale = 1.0, double fixed = 0.0);

/// Raw literature formulas on their native domains (minimization form).
namespace functions {
double branin(double x1, double x2);  // x1 in [-5, 10], x2 in [0, 15]
double hartmann3(const Eigen::Vector3d& x);
double hartmann6(const Eigen::Matrix<double, 6, 1>& x);
double shekel4(const Eigen::Vector4d& x);  // m = 10, x in [0, 10]^4
}  // namespace functions

/// Test problem on [0,1]^dim in the maximization convention.
struct Benchmark {
  std::string name;
  int dim = 0;
  std::vector<std::function<double(const Point&)>> objectives;
  std::vector<std::optional<double>> known_optimum;

  int num_objectives() const { return static_cast<int>(objectives.size()); }
};

/// Names: branin2d, hartmann3d, hartmann6d, shekel4d, shekel_mo (2-D, or shekel_mo:<d>),
/// synthetic_snar.
Benchmark make_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

/// Objective values plus N(0, noise_sd^2) noise drawn from `seed`.
Eigen::VectorXd evaluate(const Benchmark& b, const Point& x, double noise_sd = 0.0,
                         std::uint64_t seed = 0);

inline constexpr std::size_t kMaxGridPoints = 4'000'000;

/// Non-dominated subset of a full-factorial grid with `grid_resolution` levels per axis.
ParetoFront reference_front(const Benchmark& b, int grid_resolution);

}  // namespace snake
