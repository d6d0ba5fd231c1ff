#include "snake/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace snake {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

bool safe_label(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

CostModel CostSpec::make() const {
  if (kind == "euclidean") return euclidean_cost(scale.value_or(1.0), fixed);
  if (kind == "self_stopping") return self_stopping_cost(alpha);
  if (kind == "truncated") return truncated_cost(delta_max, scale.value_or(0.2), penalty);
  throw ConfigError("unknown cost model '" + kind + "'");
}

void apply_planner_key(PlannerConfig& c, const std::string& key, const std::string& v) {
  if (key == "strategy") c.strategy = strategy_from_string(v);
  else if (key == "budget") c.budget = to_int(key, v);
  else if (key == "delta") {
    if (!c.stopping) c.stopping = StoppingConfig{};
    c.stopping->delta = parse_real(key, v);
  } else if (key == "nu") {
    if (!c.stopping) c.stopping = StoppingConfig{};
    c.stopping->nu = parse_real(key, v);
  } else if (key == "auto_stopping") c.auto_stopping = parse_bool(key, v);
  else if (key == "delta_max") c.delta_max = parse_real(key, v);
  else if (key == "refit_every") c.refit_every = to_int(key, v);
  else if (key == "deletion") c.deletion = deletion_from_string(v);
  else if (key == "initial_points") c.initial_points = to_int(key, v);
  else if (key == "noise_sd") c.noise_sd = parse_real(key, v);
  else if (key == "kernel") c.kernel = kernel_family_from_string(v);
  else if (key == "fit_restarts") c.fit_restarts = to_int(key, v);
  else if (key == "feature_count") c.feature_count = to_int(key, v);
  else if (key == "thompson_restarts") c.thompson.restarts = to_int(key, v);
  else if (key == "thompson_steps") c.thompson.steps = to_int(key, v);
  else if (key == "thompson_pool") c.thompson.pool = to_int(key, v);
  else if (key == "thompson_starts") c.thompson.pool_starts = to_int(key, v);
  else if (key == "thompson_lr") c.thompson.learning_rate = parse_real(key, v);
  else if (key == "acquisition_pool") c.acquisition_pool = to_int(key, v);
  else if (key == "acquisition_refine") c.acquisition_refine = to_int(key, v);
  else if (key == "scalarization") c.scalarization = scalarization_from_string(v);
  else if (key == "tsp_proposals_per_n2") c.tsp.proposals_per_n2 = to_int(key, v);
  else if (key == "tsp_max_proposals") c.tsp.max_proposals = parse_int(key, v);
  else if (key == "lengthscale_min") c.bounds.lengthscale_min = parse_real(key, v);
  else if (key == "lengthscale_max") c.bounds.lengthscale_max = parse_real(key, v);
  else if (key == "signal_min") c.bounds.signal_min = parse_real(key, v);
  else if (key == "signal_max") c.bounds.signal_max = parse_real(key, v);
  else if (key == "noise_min") c.bounds.noise_min = parse_real(key, v);
  else if (key == "noise_max") c.bounds.noise_max = parse_real(key, v);
  else throw ConfigError("unknown planner key '" + key + "'");
}

ExperimentSpec parse_experiment_spec(std::istream& in) {
  ExperimentSpec spec;
  std::vector<std::pair<std::string, std::string>> shared;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  std::vector<std::string> labels;
  std::set<std::string> seen_top;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!safe_label(section)) throw ConfigError(where + "bad strategy label '" + section + "'");
      if (sections.count(section)) throw ConfigError(where + "duplicate section [" + section + "]");
      sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");

    if (!section.empty()) {
      for (const auto& kv : sections[section])
        if (kv.first == key) throw ConfigError(where + "duplicate key '" + key + "'");
      sections[section].emplace_back(key, value);
      continue;
    }
    if (!seen_top.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (key == "benchmark") spec.benchmark = value;
    else if (key == "seeds") spec.seeds = to_int(key, value);
    else if (key == "base_seed") spec.base_seed = parse_uint(key, value);
    else if (key == "output") spec.output_dir = value;
    else if (key == "front_grid") spec.front_grid = to_int(key, value);
    else if (key == "relaxed_epsilon") spec.relaxed_epsilon = parse_real(key, value);
    else if (key == "curve_points") spec.curve_points = to_int(key, value);
    else if (key == "cost") spec.cost.kind = value;
    else if (key == "cost.alpha") spec.cost.alpha = parse_real(key, value);
    else if (key == "cost.delta_max") spec.cost.delta_max = parse_real(key, value);
    else if (key == "cost.scale") spec.cost.scale = parse_real(key, value);
    else if (key == "cost.penalty") spec.cost.penalty = parse_real(key, value);
    else if (key == "cost.fixed") spec.cost.fixed = parse_real(key, value);
    else if (key == "strategies") labels = split(value, ',');
    else if (key == "strategy") throw ConfigError(where + "'strategy' belongs in a [label] section");
    else shared.emplace_back(key, value);
  }

  if (labels.empty()) throw ConfigError("spec lists no strategies");
  std::set<std::string> unique;
  for (const auto& label : labels) {
    if (!safe_label(label)) throw ConfigError("bad strategy label '" + label + "'");
    if (!unique.insert(label).second) throw ConfigError("strategy label '" + label + "' listed twice");
    StrategySpec s;
    s.label = label;
    const auto it = sections.find(label);
    std::optional<std::string> kind;
    if (it != sections.end())
      for (const auto& kv : it->second)
        if (kv.first == "strategy") kind = kv.second;
    s.config.strategy = strategy_from_string(kind.value_or(label));
    for (const auto& [k, v] : shared) apply_planner_key(s.config, k, v);
    if (it != sections.end())
      for (const auto& [k, v] : it->second) apply_planner_key(s.config, k, v);
    spec.strategies.push_back(std::move(s));
  }
  for (const auto& [name, kv] : sections)
    if (!unique.count(name)) throw ConfigError("section [" + name + "] is not in the strategies list");
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  return parse_experiment_spec(in);
}

void ExperimentSpec::validate() const {
  if (seeds < 1) throw ConfigError("seeds must be at least 1");
  if (strategies.empty()) throw ConfigError("no strategies");
  if (front_grid < 0) throw ConfigError("front_grid must be non-negative");
  if (!(relaxed_epsilon >= 0.0)) throw ConfigError("relaxed_epsilon must be non-negative");
  if (curve_points < 2) throw ConfigError("curve_points must be at least 2");
  const Benchmark b = make_benchmark(benchmark);
  cost.make();
  std::set<std::string> labels;
  for (const auto& s : strategies) {
    if (!safe_label(s.label)) throw ConfigError("bad strategy label '" + s.label + "'");
    if (!labels.insert(s.label).second) throw ConfigError("duplicate strategy label '" + s.label + "'");
    s.config.validate(b);
  }
}

nlohmann::json to_json(const PlannerConfig& c) {
  nlohmann::json j;
  j["strategy"] = to_string(c.strategy);
  j["budget"] = c.budget;
  if (c.stopping) j["stopping"] = {{"delta", c.stopping->delta}, {"nu", c.stopping->nu}};
  j["auto_stopping"] = c.auto_stopping;
  if (c.delta_max) j["delta_max"] = *c.delta_max;
  j["refit_every"] = c.refit_every;
  j["deletion"] = to_string(c.deletion);
  j["initial_points"] = c.initial_points;
  j["noise_sd"] = c.noise_sd;
  j["kernel"] = to_string(c.kernel);
  j["fit_restarts"] = c.fit_restarts;
  j["bounds"] = {{"lengthscale", {c.bounds.lengthscale_min, c.bounds.lengthscale_max}},
                 {"signal", {c.bounds.signal_min, c.bounds.signal_max}},
                 {"noise", {c.bounds.noise_min, c.bounds.noise_max}}};
  j["feature_count"] = c.feature_count;
  j["thompson"] = {{"restarts", c.thompson.restarts},
                   {"steps", c.thompson.steps},
                   {"pool", c.thompson.pool},
                   {"pool_starts", c.thompson.pool_starts},
                   {"learning_rate", c.thompson.learning_rate}};
  j["acquisition_pool"] = c.acquisition_pool;
  j["acquisition_refine"] = c.acquisition_refine;
  j["scalarization"] = to_string(c.scalarization);
  j["tsp"] = {{"proposals_per_n2", c.tsp.proposals_per_n2},
              {"max_proposals", c.tsp.max_proposals},
              {"final_temperature_ratio", c.tsp.final_temperature_ratio}};
  return j;
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["benchmark"] = spec.benchmark;
  nlohmann::json cost = {{"kind", spec.cost.kind}};
  if (spec.cost.kind == "self_stopping") cost["alpha"] = spec.cost.alpha;
  if (spec.cost.kind == "truncated") {
    cost["delta_max"] = spec.cost.delta_max;
    cost["penalty"] = spec.cost.penalty;
  }
  if (spec.cost.kind == "euclidean") cost["fixed"] = spec.cost.fixed;
  if (spec.cost.scale) cost["scale"] = *spec.cost.scale;
  j["cost"] = cost;
  j["seeds"] = spec.seeds;
  j["base_seed"] = spec.base_seed;
  j["front_grid"] = spec.front_grid;
  j["relaxed_epsilon"] = spec.relaxed_epsilon;
  j["curve_points"] = spec.curve_points;
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : spec.strategies) {
    auto sj = to_json(s.config);
    sj["label"] = s.label;
    strategies.push_back(std::move(sj));
  }
  j["strategies"] = strategies;
  return j;
}

std::uint64_t campaign_seed(std::uint64_t base, std::size_t strategy_index, std::size_t seed_index) {
  return derive_seed(base, {static_cast<std::uint64_t>(strategy_index), static_cast<std::uint64_t>(seed_index)});
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) {
    out.mean = out.std = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

int StrategyResult::failures() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const SeedOutcome& r) { return !r.trace; }));
}

bool AggregateResult::ok() const {
  return std::all_of(strategies.begin(), strategies.end(), [](const StrategyResult& s) { return s.failures() == 0; });
}

std::vector<double> regret_on_grid(const CampaignTrace& trace, const std::vector<double>& grid) {
  std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (trace.steps.empty()) return out;
  std::size_t k = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (k + 1 < trace.steps.size() && trace.steps[k + 1].cumulative_cost <= grid[g]) ++k;
    out[g] = trace.steps[k].regret;
  }
  return out;
}

int worker_count_from_env() {
  const char* v = std::getenv("SNAKE_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("SNAKE_WORKERS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

int default_front_grid(int dim) {
  switch (dim) {
    case 1: return 4000;
    case 2: return 200;
    case 3: return 60;
    default: return 30;
  }
}

namespace {

std::optional<MeanStd> metric_summary(const std::vector<SeedOutcome>& runs,
                                      double FrontMetrics::*field, bool relaxed) {
  std::vector<double> v;
  for (const auto& r : runs) {
    const auto& m = relaxed ? r.relaxed_metrics : r.metrics;
    if (m) v.push_back((*m).*field);
  }
  if (v.empty()) return std::nullopt;
  return mean_std(v);
}

void aggregate(StrategyResult& s) {
  std::vector<double> budget, cost, penalty, regret;
  int stopped = 0;
  for (const auto& r : s.runs) {
    if (!r.trace) continue;
    budget.push_back(static_cast<double>(r.trace->size()));
    cost.push_back(r.trace->total_cost());
    penalty.push_back(r.trace->total_penalty());
    if (!std::isnan(r.trace->final_regret())) regret.push_back(r.trace->final_regret());
    if (r.trace->termination == Termination::SelfStopped) ++stopped;
  }
  s.budget_used = mean_std(budget);
  s.total_cost = mean_std(cost);
  s.total_penalty = mean_std(penalty);
  s.final_regret = mean_std(regret);
  s.self_stopped_fraction = budget.empty() ? 0.0 : static_cast<double>(stopped) / static_cast<double>(budget.size());
  s.gd = metric_summary(s.runs, &FrontMetrics::gd, false);
  s.igd = metric_summary(s.runs, &FrontMetrics::igd, false);
  s.mpfe = metric_summary(s.runs, &FrontMetrics::mpfe, false);
  s.relaxed_gd = metric_summary(s.runs, &FrontMetrics::gd, true);
  s.relaxed_igd = metric_summary(s.runs, &FrontMetrics::igd, true);
  s.relaxed_mpfe = metric_summary(s.runs, &FrontMetrics::mpfe, true);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

template <typename F>
std::string to_text(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

void write_outputs(const ExperimentSpec& spec, const AggregateResult& result) {
  const fs::path root = fs::path(spec.output_dir) / spec.benchmark;
  fs::create_directories(root);
  write_file(root / "spec.json", to_json(spec).dump(2) + "\n");
  for (const auto& s : result.strategies) {
    const fs::path dir = root / s.label;
    fs::create_directories(dir);
    for (const auto& r : s.runs) {
      const std::string stem = "seed_" + std::to_string(r.seed_index);
      if (!r.trace) {
        nlohmann::json j = {{"seed", r.seed}, {"error", r.error}};
        write_file(dir / (stem + ".json"), j.dump(2) + "\n");
        continue;
      }
      write_file(dir / (stem + ".csv"), to_text([&](std::ostream& os) { write_trace_csv(os, *r.trace); }));
      write_file(dir / (stem + ".json"), trace_sidecar(*r.trace).dump(2) + "\n");
      if (r.trace->num_objectives > 1) {
        const auto front = pareto_front(r.trace->truth_matrix(), r.trace->input_matrix());
        write_file(dir / ("front_" + std::to_string(r.seed_index) + ".csv"),
                   to_text([&](std::ostream& os) { write_front_csv(os, front); }));
      }
    }
  }
  write_file(root / "aggregate.csv", to_text([&](std::ostream& os) { write_aggregate_csv(os, result); }));
  emit_curves(result, root.string());
}

}  // namespace

AggregateResult run_experiment(const ExperimentSpec& spec, int workers) {
  spec.validate();
  const Benchmark bench = make_benchmark(spec.benchmark);
  const CostModel cm = spec.cost.make();

  std::optional<ParetoFront> truth;
  if (bench.num_objectives() > 1) {
    try {
      truth = reference_front(bench, spec.front_grid > 0 ? spec.front_grid : default_front_grid(bench.dim));
    } catch (const CapacityError&) {
      // too many grid points for this dimension: no front metrics
    }
  }

  AggregateResult result;
  result.benchmark = spec.benchmark;
  result.num_objectives = bench.num_objectives();
  for (const auto& s : spec.strategies) {
    StrategyResult r;
    r.label = s.label;
    r.strategy = s.config.strategy;
    r.runs.resize(spec.seeds);
    result.strategies.push_back(std::move(r));
  }

  const std::size_t jobs = spec.strategies.size() * static_cast<std::size_t>(spec.seeds);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t si = job / spec.seeds;
      const int k = static_cast<int>(job % spec.seeds);
      SeedOutcome& out = result.strategies[si].runs[k];
      out.seed_index = k;
      out.seed = campaign_seed(spec.base_seed, si, k);
      try {
        out.trace = run_campaign(bench, cm, spec.strategies[si].config, out.seed);
        if (truth && !truth->empty()) {
          const Eigen::MatrixXd f = out.trace->truth_matrix();
          const Eigen::MatrixXd x = out.trace->input_matrix();
          out.metrics = front_metrics(pareto_front(f, x), *truth);
          out.relaxed_metrics = front_metrics(pareto_front(f, x, spec.relaxed_epsilon), *truth);
        }
      } catch (const std::exception& e) {
        out.trace.reset();
        out.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double max_cost = 0.0;
  for (auto& s : result.strategies) {
    aggregate(s);
    for (const auto& r : s.runs)
      if (r.trace) max_cost = std::max(max_cost, r.trace->total_cost());
  }
  result.cost_grid.resize(spec.curve_points);
  for (int g = 0; g < spec.curve_points; ++g)
    result.cost_grid[g] = max_cost * static_cast<double>(g) / static_cast<double>(spec.curve_points - 1);

  const bool has_regret = bench.num_objectives() == 1 && bench.known_optimum[0].has_value();
  if (has_regret) {
    for (auto& s : result.strategies) {
      std::vector<std::vector<double>> rows;
      for (const auto& r : s.runs)
        if (r.trace) rows.push_back(regret_on_grid(*r.trace, result.cost_grid));
      if (rows.empty()) continue;
      s.curve.mean.resize(result.cost_grid.size());
      s.curve.half_std.resize(result.cost_grid.size());
      for (std::size_t g = 0; g < result.cost_grid.size(); ++g) {
        std::vector<double> col;
        for (const auto& row : rows) col.push_back(row[g]);
        const MeanStd ms = mean_std(col);
        s.curve.mean[g] = ms.mean;
        s.curve.half_std[g] = 0.5 * ms.std;
      }
    }
  }

  if (!spec.output_dir.empty()) write_outputs(spec, result);
  return result;
}

void write_trace_csv(std::ostream& out, const CampaignTrace& t) {
  out << "iter";
  for (int k = 0; k < t.dim; ++k) out << ",x" << k + 1;
  for (int k = 0; k < t.num_objectives; ++k) out << ",y" << k + 1;
  for (int k = 0; k < t.num_objectives; ++k) out << ",truth" << k + 1;
  out << ",fixed_cost,movement_cost,penalty,step_cost,cum_cost,regret\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    out << i;
    for (Eigen::Index k = 0; k < s.input.size(); ++k) out << ',' << format_double(s.input(k));
    for (Eigen::Index k = 0; k < s.observed.size(); ++k) out << ',' << format_double(s.observed(k));
    for (Eigen::Index k = 0; k < s.truth.size(); ++k) out << ',' << format_double(s.truth(k));
    out << ',' << format_double(s.cost.fixed) << ',' << format_double(s.cost.movement) << ','
        << format_double(s.cost.penalty) << ',' << format_double(s.cost.total()) << ','
        << format_double(s.cumulative_cost) << ',' << format_double(s.regret) << '\n';
  }
}

nlohmann::json trace_sidecar(const CampaignTrace& t) {
  nlohmann::json j;
  j["benchmark"] = t.benchmark;
  j["dim"] = t.dim;
  j["num_objectives"] = t.num_objectives;
  j["seed"] = t.seed;
  j["cost_model"] = t.cost_description;
  j["termination"] = to_string(t.termination);
  j["steps"] = t.size();
  j["total_cost"] = format_double(t.total_cost());
  j["total_penalty"] = format_double(t.total_penalty());
  j["config"] = to_json(t.config);
  return j;
}

void write_aggregate_csv(std::ostream& out, const AggregateResult& result) {
  out << "strategy,kind,runs,failed,avg_budget,budget_std,avg_cost,cost_std,avg_penalty,penalty_std,"
         "final_regret,final_regret_std,self_stopped,gd,gd_std,igd,igd_std,mpfe,mpfe_std,"
         "relaxed_gd,relaxed_gd_std,relaxed_igd,relaxed_igd_std,relaxed_mpfe,relaxed_mpfe_std\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto pair = [&](const MeanStd& m) { return format_double(m.mean) + "," + format_double(m.std); };
  auto opt = [&](const std::optional<MeanStd>& m) { return pair(m.value_or(MeanStd{nan, nan})); };
  for (const auto& s : result.strategies) {
    out << s.label << ',' << to_string(s.strategy) << ',' << s.runs.size() << ',' << s.failures() << ','
        << pair(s.budget_used) << ',' << pair(s.total_cost) << ',' << pair(s.total_penalty) << ','
        << pair(s.final_regret) << ',' << format_double(s.self_stopped_fraction) << ',' << opt(s.gd) << ','
        << opt(s.igd) << ',' << opt(s.mpfe) << ',' << opt(s.relaxed_gd) << ',' << opt(s.relaxed_igd) << ','
        << opt(s.relaxed_mpfe) << '\n';
  }
}

void emit_curves(const AggregateResult& result, const std::string& dir) {
  for (const auto& s : result.strategies) {
    if (s.curve.mean.empty()) continue;
    const fs::path d = fs::path(dir) / s.label;
    fs::create_directories(d);
    std::ostringstream os;
    os << "cost,mean_regret,half_std\n";
    for (std::size_t g = 0; g < result.cost_grid.size(); ++g)
      os << format_double(result.cost_grid[g]) << ',' << format_double(s.curve.mean[g]) << ','
         << format_double(s.curve.half_std[g]) << '\n';
    write_file(d / "curve.csv", os.str());
  }
}

void write_front_csv(std::ostream& out, const ParetoFront& front) {
  const int K = front.num_objectives();
  const auto d = front.empty() ? 0 : front.points.front().input.size();
  for (int k = 0; k < K; ++k) out << (k ? "," : "") << 'f' << k + 1;
  for (Eigen::Index k = 0; k < d; ++k) out << ",x" << k + 1;
  out << '\n';
  for (const auto& p : front.points) {
    for (int k = 0; k < K; ++k) out << (k ? "," : "") << format_double(p.objectives(k));
    for (Eigen::Index k = 0; k < p.input.size(); ++k) out << ',' << format_double(p.input(k));
    out << '\n';
  }
}

ParetoFront read_front_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("front csv: missing header");
  const auto header = split(line, ',');
  int K = 0, d = 0;
  for (const auto& h : header) {
    if (!h.empty() && h[0] == 'f' && d == 0) ++K;
    else if (!h.empty() && h[0] == 'x') ++d;
    else throw InputError("front csv: unexpected column '" + h + "'");
  }
  if (K == 0) throw InputError("front csv: no objective columns");
  ParetoFront front;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != K + d)
      throw InputError("front csv: row " + std::to_string(row) + " has the wrong number of columns");
    FrontPoint p;
    p.objectives.resize(K);
    p.input.resize(d);
    for (int k = 0; k < K + d; ++k) {
      char* end = nullptr;
      const double v = std::strtod(cells[k].c_str(), &end);
      if (cells[k].empty() || end != cells[k].c_str() + cells[k].size())
        throw InputError("front csv: bad number '" + cells[k] + "' on row " + std::to_string(row));
      if (k < K) p.objectives(k) = v;
      else p.input(k - K) = v;
    }
    front.points.push_back(std::move(p));
  }
  return front;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) rows.push_back(split(line, ','));
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& file) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError(file + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<PlotSeries> load_plot_series(const std::string& aggregate_csv) {
  const auto rows = read_csv(aggregate_csv);
  if (rows.empty()) throw InputError(aggregate_csv + ": empty file");
  const std::size_t c_label = column(rows[0], "strategy", aggregate_csv);
  const std::size_t c_cost = column(rows[0], "avg_cost", aggregate_csv);
  const fs::path dir = fs::path(aggregate_csv).parent_path();
  std::vector<PlotSeries> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    PlotSeries s;
    s.label = rows[i].at(c_label);
    s.average_cost = std::strtod(rows[i].at(c_cost).c_str(), nullptr);
    const fs::path curve = dir / s.label / "curve.csv";
    if (!fs::exists(curve)) continue;
    const auto c = read_csv(curve.string());
    for (std::size_t r = 1; r < c.size(); ++r) {
      s.cost.push_back(std::strtod(c[r].at(0).c_str(), nullptr));
      s.mean.push_back(std::strtod(c[r].at(1).c_str(), nullptr));
      s.half_std.push_back(std::strtod(c[r].at(2).c_str(), nullptr));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double W = 800, H = 500, left = 70, right = 170, top = 40, bottom = 50;
  constexpr double floor_value = 1e-8;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double xmax = 0.0, ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.cost.size(); ++i) {
      xmax = std::max(xmax, s.cost[i]);
      if (std::isnan(s.mean[i])) continue;
      const double lo = std::max(s.mean[i] - s.half_std[i], floor_value);
      ymin = std::min(ymin, std::log10(lo));
      ymax = std::max(ymax, std::log10(std::max(s.mean[i] + s.half_std[i], floor_value)));
    }
    xmax = std::max(xmax, s.average_cost);
  }
  if (!(xmax > 0.0)) xmax = 1.0;
  if (!std::isfinite(ymin)) ymin = -1.0, ymax = 1.0;
  ymin = std::floor(ymin);
  ymax = std::max(std::ceil(ymax), ymin + 1.0);

  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double c) { return left + pw * c / xmax; };
  auto Y = [&](double v) { return top + ph * (ymax - std::log10(std::max(v, floor_value))) / (ymax - ymin); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << title << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    const double y = Y(std::pow(10.0, e));
    o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << num(y) << "\" y2=\"" << num(y)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e << "</text>\n";
  }
  for (int t = 0; t <= 5; ++t) {
    const double c = xmax * t / 5.0;
    o << "<text x=\"" << num(X(c)) << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(c) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">cumulative cost</text>\n";
  o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">simple regret</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % 10];
    std::ostringstream band, line;
    for (std::size_t g = 0; g < s.cost.size(); ++g)
      if (!std::isnan(s.mean[g])) band << num(X(s.cost[g])) << ',' << num(Y(s.mean[g] + s.half_std[g])) << ' ';
    for (std::size_t g = s.cost.size(); g-- > 0;)
      if (!std::isnan(s.mean[g])) band << num(X(s.cost[g])) << ',' << num(Y(s.mean[g] - s.half_std[g])) << ' ';
    for (std::size_t g = 0; g < s.cost.size(); ++g)
      if (!std::isnan(s.mean[g])) line << num(X(s.cost[g])) << ',' << num(Y(s.mean[g])) << ' ';
    o << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    o << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<line x1=\"" << num(X(s.average_cost)) << "\" x2=\"" << num(X(s.average_cost)) << "\" y1=\"" << top
      << "\" y2=\"" << top + ph << "\" stroke=\"" << color << "\" stroke-dasharray=\"6,4\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace snake
