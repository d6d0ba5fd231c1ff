#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snake/acquisition.hpp"
#include "snake/benchmarks.hpp"
#include "snake/multi_objective.hpp"
#include "snake/sampling.hpp"
#include "snake/tsp.hpp"

namespace snake {

enum class Strategy {
  Snake,     // Thompson batch + TSP ordering, first step of the tour
  SsSnake,   // Snake + expected-improvement point deletion (self-stopping)
  TrSnake,   // Snake with every step truncated to delta_max
  MoSnake,   // Snake with random-scalarization Thompson batches
  MoTs,      // one random-scalarization Thompson maximizer per step, no planning
  Ei,
  Eipu,      // EI per unit fixed cost; stops when the best EIpu drops below delta
  EipuStd,   // Eipu that stops only when the argmax is also low-variance
  TrEi,      // EI with truncated steps
  Random,    // uniform design ordered by TSP
};

enum class Deletion { None, Ell };
enum class Termination { BudgetExhausted, SelfStopped };

const char* to_string(Strategy s);
const char* to_string(Deletion d);
const char* to_string(Termination t);
Strategy strategy_from_string(const std::string& s);
Deletion deletion_from_string(const std::string& s);

bool is_snake_family(Strategy s);
bool is_multi_objective(Strategy s);
bool can_self_stop(Strategy s);

struct PlannerConfig {
  Strategy strategy = Strategy::Snake;
  int budget = 100;
  /// Absolute thresholds in objective units. When absent and `auto_stopping` is set,
  /// delta = 1e-3 * observed range and nu = 10% of the fitted signal variance.
  std::optional<StoppingConfig> stopping;
  bool auto_stopping = false;
  std::optional<double> delta_max;
  int refit_every = 25;
  TspConfig tsp;
  Deletion deletion = Deletion::None;
  int initial_points = 1;
  double noise_sd = 0.0;

  KernelFamily kernel = KernelFamily::Matern52;
  int fit_restarts = 5;
  HyperparameterBounds bounds;

  int feature_count = kDefaultFeatureCount;
  /// Batch maximization of Thompson draws: shared screening pool, then Adam from the
  /// best pool points.
  MaximizeOptions thompson{.restarts = 0, .steps = 50, .pool = 1024, .pool_starts = 2,
                           .learning_rate = 0.02, .seed = 0};
  /// Acquisition (EI family) maximization: random pool, then compass search.
  int acquisition_pool = 1000;
  int acquisition_refine = 3;

  ScalarizationKind scalarization = ScalarizationKind::Linear;

  /// Throws ConfigError on inconsistencies with the benchmark or between fields.
  void validate(const Benchmark& b) const;
};

/// P_t: candidate inputs awaiting scheduling.
struct ProposedBatch {
  std::vector<Point> points;
  int created_at = 0;
};

struct TraceStep {
  Point input;
  Eigen::VectorXd observed;  // what the optimizer saw (with noise)
  Eigen::VectorXd truth;     // noiseless objective values
  CostBreakdown cost;
  double cumulative_cost = 0.0;
  double regret = 0.0;  // simple regret after this step; NaN without a known optimum
};

struct CampaignTrace {
  std::string benchmark;
  int dim = 0;
  int num_objectives = 1;
  PlannerConfig config;
  std::string cost_description;
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;
  Termination termination = Termination::BudgetExhausted;

  std::size_t size() const { return steps.size(); }
  double total_cost() const { return steps.empty() ? 0.0 : steps.back().cumulative_cost; }
  double total_penalty() const;
  double final_regret() const { return steps.empty() ? 0.0 : steps.back().regret; }
  /// Noiseless objective vectors row-wise.
  Eigen::MatrixXd truth_matrix() const;
  Eigen::MatrixXd input_matrix() const;
};

/// A GP fitted on standardized outputs, y_std = (y - offset) / scale.
struct StandardizedModel {
  GaussianProcessModel model;
  double offset = 0.0;
  double scale = 1.0;

  double to_model(double y) const { return (y - offset) / scale; }
  double from_model(double y) const { return y * scale + offset; }
  /// Thresholds in objective units mapped to model units.
  StoppingConfig to_model(const StoppingConfig& raw) const {
    return {raw.delta / scale, raw.nu / (scale * scale)};
  }
};

/// Standardizes `data` and builds the model with `kernel` (no fitting).
StandardizedModel standardized_model(const Dataset& data, const KernelConfig& kernel);

/// Seeds used inside a campaign: derive_seed(root, {purpose, iteration}).
enum class SeedPurpose : std::uint64_t {
  InitialDesign = 1,
  Fit = 2,
  Thompson = 3,
  Tsp = 4,
  Acquisition = 5,
  Noise = 6,
  RandomDesign = 7,
};
std::uint64_t step_seed(std::uint64_t root, SeedPurpose purpose, std::uint64_t iteration);

/// `remaining` Thompson-sample maximizers (one per posterior draw).
ProposedBatch create_batch(const GaussianProcessModel& model, int remaining, std::uint64_t seed,
                           const MaximizeOptions& options = {}, int feature_count = kDefaultFeatureCount,
                           int iteration = 0);

/// Drops every point p with max_j |p_j - x_j| / l_j < 1.
std::vector<Point> ell_point_deletion(const std::vector<Point>& path, const Point& queried,
                                      const Eigen::VectorXd& lengthscales);

struct DeletionResult {
  std::vector<Point> batch;
  bool terminate = false;
};

/// Removes points whose EI per unit fixed cost is below delta AND whose posterior
/// variance is below nu; terminate is set iff nothing survives.
DeletionResult ei_point_deletion(const std::vector<Point>& batch, const GaussianProcessModel& model,
                                 double best, const FixedCost& cost0, const StoppingConfig& cfg);

/// Moves from `current` towards `proposed` by at most delta_max (Euclidean), then
/// clamps into the unit cube.
Point truncate_step(const Point& current, const Point& proposed, double delta_max);

/// Maximizes `score` over [0,1]^d: screen `pool` random points (plus `extra` rows), then
/// compass search from the best `refine` of them.
Point maximize_acquisition(const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& score,
                           int dim, int pool, int refine, const Eigen::MatrixXd& extra,
                           std::uint64_t seed);

CampaignTrace run_campaign(const Benchmark& benchmark, const CostModel& cm, const PlannerConfig& cfg,
                           std::uint64_t seed);

}  // namespace snake
