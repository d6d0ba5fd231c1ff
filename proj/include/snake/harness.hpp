#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "snake/planner.hpp"

namespace snake {

struct CostSpec {
  std::string kind = "euclidean";  // euclidean | self_stopping | truncated
  double alpha = 0.1;              // self_stopping fixed cost
  double delta_max = 0.1;          // truncated jump threshold
  std::optional<double> scale;     // movement multiplier; factory default when unset
  double penalty = 1.0;
  double fixed = 0.0;

  CostModel make() const;
};

struct StrategySpec {
  std::string label;  // output directory name; unique within a spec
  PlannerConfig config;
};

struct ExperimentSpec {
  std::string benchmark;
  CostSpec cost;
  std::vector<StrategySpec> strategies;
  int seeds = 25;
  std::uint64_t base_seed = 0;
  std::string output_dir;  // empty: keep results in memory only
  int front_grid = 0;      // reference-front resolution; 0 picks one from the dimension
  double relaxed_epsilon = 0.01;
  int curve_points = 200;

  /// Throws ConfigError.
  void validate() const;
};

/// Key-value spec text:
///
///   benchmark = branin2d
///   seeds = 25
///   cost = truncated
///   cost.delta_max = 0.1
///   budget = 250                # planner keys here apply to every strategy
///   strategies = tr_snake, tr_ei
///
///   [tr_snake]                  # per-strategy overrides; `strategy =` sets the kind
///   delta_max = 0.1
///
/// Labels default to the strategy kind of the same name.
ExperimentSpec parse_experiment_spec(std::istream& in);
ExperimentSpec load_experiment_spec(const std::string& path);
nlohmann::json to_json(const ExperimentSpec& spec);
nlohmann::json to_json(const PlannerConfig& cfg);

/// Applies one planner key; throws ConfigError for unknown keys or bad values.
void apply_planner_key(PlannerConfig& cfg, const std::string& key, const std::string& value);

/// Per-campaign seed: derive_seed(base, {strategy index, seed index}).
std::uint64_t campaign_seed(std::uint64_t base, std::size_t strategy_index, std::size_t seed_index);

struct SeedOutcome {
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::optional<CampaignTrace> trace;
  std::string error;  // set when the campaign threw
  std::optional<FrontMetrics> metrics;
  std::optional<FrontMetrics> relaxed_metrics;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);

struct RegretCurve {
  std::vector<double> mean;
  std::vector<double> half_std;
};

struct StrategyResult {
  std::string label;
  Strategy strategy = Strategy::Snake;
  std::vector<SeedOutcome> runs;

  MeanStd budget_used;
  MeanStd total_cost;
  MeanStd total_penalty;
  MeanStd final_regret;
  double self_stopped_fraction = 0.0;
  std::optional<MeanStd> gd, igd, mpfe;
  std::optional<MeanStd> relaxed_gd, relaxed_igd, relaxed_mpfe;
  RegretCurve curve;  // empty without a known optimum

  int failures() const;
  int successes() const { return static_cast<int>(runs.size()) - failures(); }
};

struct AggregateResult {
  std::string benchmark;
  int num_objectives = 1;
  std::vector<double> cost_grid;
  std::vector<StrategyResult> strategies;

  bool ok() const;
};

/// Best-so-far regret of `trace` at each cost of `grid` (step interpolation; before the
/// first observation the first step's value is used).
std::vector<double> regret_on_grid(const CampaignTrace& trace, const std::vector<double>& grid);

/// Runs every (strategy, seed) campaign on up to `workers` threads, aggregates, and
/// writes all outputs when the spec names an output directory. Campaign failures are
/// recorded per seed.
AggregateResult run_experiment(const ExperimentSpec& spec, int workers = 1);

/// Reference-front grid resolution used when the spec leaves front_grid at 0.
int default_front_grid(int dim);

/// SNAKE_WORKERS, defaulting to 1.
int worker_count_from_env();

// ---- files

void write_trace_csv(std::ostream& out, const CampaignTrace& trace);
nlohmann::json trace_sidecar(const CampaignTrace& trace);
void write_aggregate_csv(std::ostream& out, const AggregateResult& result);
/// Writes `<dir>/<label>/curve.csv` for every strategy with a regret curve.
void emit_curves(const AggregateResult& result, const std::string& dir);

/// Objective columns f1..fK, then input columns x1..xd.
void write_front_csv(std::ostream& out, const ParetoFront& front);
ParetoFront read_front_csv(std::istream& in);

struct PlotSeries {
  std::string label;
  std::vector<double> cost, mean, half_std;
  double average_cost = 0.0;
};
/// Regret-vs-cost chart with shaded bands and dashed average-cost markers.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title);
/// Reads aggregate.csv and the curve files next to it.
std::vector<PlotSeries> load_plot_series(const std::string& aggregate_csv);

/// Doubles formatted for byte-reproducible text output.
std::string format_double(double v);

}  // namespace snake
