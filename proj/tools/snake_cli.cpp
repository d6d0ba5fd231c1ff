// snake_cli: experiment runner and front/metric utilities.
//
// exit codes: 0 ok, 1 bad config or input, 2 campaign failure

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "snake/benchmarks.hpp"
#include "snake/harness.hpp"
#include "snake/pareto.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCampaignFailure = 2;

snake::ParetoFront read_front(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw snake::InputError("cannot open " + path);
  return snake::read_front_csv(in);
}

int cmd_run(const std::string& spec_path, int workers) {
  const snake::ExperimentSpec spec = snake::load_experiment_spec(spec_path);
  if (workers <= 0) workers = snake::worker_count_from_env();
  const snake::AggregateResult result = snake::run_experiment(spec, workers);
  snake::write_aggregate_csv(std::cout, result);
  for (const auto& s : result.strategies)
    for (const auto& r : s.runs)
      if (!r.error.empty())
        std::cerr << s.label << " seed " << r.seed_index << ": " << r.error << "\n";
  return result.ok() ? kOk : kCampaignFailure;
}

int cmd_metrics(const std::string& front_path, const std::string& truth_path, double relaxed) {
  snake::ParetoFront approx = read_front(front_path);
  const snake::ParetoFront truth = read_front(truth_path);
  if (relaxed > 0.0) approx = snake::pareto_front(approx.points, relaxed);
  const snake::FrontMetrics m = snake::front_metrics(approx, truth);
  std::cout << "gd,igd,mpfe\n"
            << snake::format_double(m.gd) << "," << snake::format_double(m.igd) << ","
            << snake::format_double(m.mpfe) << "\n";
  return kOk;
}

int cmd_front(const std::string& name, int grid, const std::string& out_path) {
  const snake::Benchmark b = snake::make_benchmark(name);
  if (b.num_objectives() < 2) throw snake::ConfigError(name + " has a single objective");
  const snake::ParetoFront f = snake::reference_front(b, grid > 0 ? grid : snake::default_front_grid(b.dim));
  if (out_path.empty()) {
    snake::write_front_csv(std::cout, f);
  } else {
    std::ofstream out(out_path);
    if (!out) throw snake::InputError("cannot write " + out_path);
    snake::write_front_csv(out, f);
  }
  return kOk;
}

int cmd_plot(const std::string& aggregate_path, std::string out_path, const std::string& title) {
  const auto series = snake::load_plot_series(aggregate_path);
  if (out_path.empty())
    out_path = (std::filesystem::path(aggregate_path).parent_path() / "regret.svg").string();
  std::ofstream out(out_path);
  if (!out) throw snake::InputError("cannot write " + out_path);
  out << snake::render_svg(series, title.empty() ? aggregate_path : title);
  std::cout << out_path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SnAKe experiment runner"};
  app.require_subcommand(1);

  std::string spec_path;
  int workers = 0;
  auto* run = app.add_subcommand("run", "run every campaign in a spec file and aggregate");
  run->add_option("spec", spec_path, "spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--workers,-j", workers, "concurrent campaigns (default: SNAKE_WORKERS or 1)");

  std::string front_path, truth_path;
  double relaxed = 0.0;
  auto* metrics = app.add_subcommand("metrics", "GD, IGD and MPFE of a front against a reference");
  metrics->add_option("front", front_path, "approximate front CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("truth", truth_path, "reference front CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--relaxed", relaxed, "rebuild the approximate front with this epsilon")
      ->check(CLI::NonNegativeNumber);

  std::string bench_name, front_out;
  int grid = 0;
  auto* front = app.add_subcommand("front", "reference Pareto front by grid enumeration");
  front->add_option("benchmark", bench_name, "benchmark name")->required();
  front->add_option("--grid", grid, "levels per axis (0: pick from dimension)")->check(CLI::NonNegativeNumber);
  front->add_option("--out,-o", front_out, "output CSV (default stdout)");

  std::string aggregate_path, svg_out, title;
  auto* plot = app.add_subcommand("plot", "render regret curves to SVG");
  plot->add_option("aggregate", aggregate_path, "aggregate.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out,-o", svg_out, "output SVG (default: regret.svg next to the input)");
  plot->add_option("--title", title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(spec_path, workers);
    if (*metrics) return cmd_metrics(front_path, truth_path, relaxed);
    if (*front) return cmd_front(bench_name, grid, front_out);
    if (*plot) return cmd_plot(aggregate_path, svg_out, title);
  } catch (const snake::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const snake::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const snake::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCampaignFailure;
  }
  return kOk;
}
