#include "snake/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace snake {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Snake: return "snake";
    case Strategy::SsSnake: return "ss_snake";
    case Strategy::TrSnake: return "tr_snake";
    case Strategy::MoSnake: return "mo_snake";
    case Strategy::MoTs: return "mo_ts";
    case Strategy::Ei: return "ei";
    case Strategy::Eipu: return "eipu";
    case Strategy::EipuStd: return "eipu_std";
    case Strategy::TrEi: return "tr_ei";
    case Strategy::Random: return "random";
  }
  return "?";
}

const char* to_string(Deletion d) { return d == Deletion::None ? "none" : "ell"; }

const char* to_string(Termination t) {
  return t == Termination::BudgetExhausted ? "budget_exhausted" : "self_stopped";
}

Strategy strategy_from_string(const std::string& s) {
  for (auto v : {Strategy::Snake, Strategy::SsSnake, Strategy::TrSnake, Strategy::MoSnake, Strategy::MoTs,
                 Strategy::Ei, Strategy::Eipu, Strategy::EipuStd, Strategy::TrEi, Strategy::Random})
    if (s == to_string(v)) return v;
  throw ConfigError("unknown strategy '" + s + "'");
}

Deletion deletion_from_string(const std::string& s) {
  if (s == "none") return Deletion::None;
  if (s == "ell") return Deletion::Ell;
  throw ConfigError("unknown deletion '" + s + "'");
}

bool is_snake_family(Strategy s) {
  return s == Strategy::Snake || s == Strategy::SsSnake || s == Strategy::TrSnake || s == Strategy::MoSnake;
}

bool is_multi_objective(Strategy s) { return s == Strategy::MoSnake || s == Strategy::MoTs; }

bool can_self_stop(Strategy s) {
  return s == Strategy::SsSnake || s == Strategy::Eipu || s == Strategy::EipuStd;
}

void PlannerConfig::validate(const Benchmark& b) const {
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (initial_points < 1 || initial_points > budget)
    throw ConfigError("initial_points must be in [1, budget]");
  if (refit_every < 1) throw ConfigError("refit_every must be at least 1");
  if (fit_restarts < 1) throw ConfigError("fit_restarts must be at least 1");
  if (feature_count < 1) throw ConfigError("feature_count must be positive");
  if (noise_sd < 0.0) throw ConfigError("noise_sd must be non-negative");
  if (acquisition_pool < 1 || acquisition_refine < 0) throw ConfigError("bad acquisition search budget");
  if (thompson.pool + thompson.restarts < 1) throw ConfigError("Thompson maximization needs starts");
  if (delta_max && !(*delta_max > 0.0)) throw ConfigError("delta_max must be positive");
  if (!(bounds.lengthscale_min > 0.0 && bounds.lengthscale_min <= bounds.lengthscale_max) ||
      !(bounds.signal_min > 0.0 && bounds.signal_min <= bounds.signal_max) ||
      !(bounds.noise_min > 0.0 && bounds.noise_min <= bounds.noise_max))
    throw ConfigError("hyperparameter bounds must be positive with min <= max");
  if ((strategy == Strategy::TrSnake || strategy == Strategy::TrEi) && !delta_max)
    throw ConfigError(std::string(to_string(strategy)) + " requires delta_max");
  if (strategy == Strategy::SsSnake && !stopping && !auto_stopping)
    throw ConfigError("ss_snake requires stopping thresholds");
  if (stopping) stopping->validate();
  if (is_multi_objective(strategy) && b.num_objectives() < 2)
    throw ConfigError(std::string(to_string(strategy)) + " needs a multi-objective benchmark");
  if (!is_multi_objective(strategy) && strategy != Strategy::Random && b.num_objectives() != 1)
    throw ConfigError(std::string(to_string(strategy)) + " needs a single-objective benchmark");
  if (b.dim < 1) throw ConfigError("benchmark dimension must be positive");
}

double CampaignTrace::total_penalty() const {
  double p = 0.0;
  for (const auto& s : steps) p += s.cost.penalty;
  return p;
}

Eigen::MatrixXd CampaignTrace::truth_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(steps.size()), num_objectives);
  for (std::size_t i = 0; i < steps.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = steps[i].truth.transpose();
  return m;
}

Eigen::MatrixXd CampaignTrace::input_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(steps.size()), dim);
  for (std::size_t i = 0; i < steps.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = steps[i].input.transpose();
  return m;
}

StandardizedModel standardized_model(const Dataset& data, const KernelConfig& kernel) {
  double offset = 0.0, scale = 1.0;
  if (!data.empty()) {
    const auto& y = data.outputs();
    offset = y.mean();
    const double var = (y.array() - offset).square().sum() / static_cast<double>(y.size());
    if (var > 1e-24) scale = std::sqrt(var);
  }
  Dataset std_data(data.inputs(), (data.outputs().array() - offset) / scale);
  return {GaussianProcessModel(kernel, std::move(std_data)), offset, scale};
}

std::uint64_t step_seed(std::uint64_t root, SeedPurpose purpose, std::uint64_t iteration) {
  return derive_seed(root, {static_cast<std::uint64_t>(purpose), iteration});
}

ProposedBatch create_batch(const GaussianProcessModel& model, int remaining, std::uint64_t seed,
                           const MaximizeOptions& options, int feature_count, int iteration) {
  if (remaining < 1) throw InputError("create_batch: remaining must be at least 1");
  const SampleBatch draws = draw_samples(model, remaining, seed, feature_count);
  MaximizeOptions opts = options;
  opts.seed = derive_seed(seed, {0x0b7ULL, options.seed});
  return {maximize_batch(draws, opts), iteration};
}

std::vector<Point> ell_point_deletion(const std::vector<Point>& path, const Point& queried,
                                      const Eigen::VectorXd& lengthscales) {
  if (queried.size() != lengthscales.size()) throw InputError("ell_point_deletion: dimension mismatch");
  std::vector<Point> kept;
  for (const auto& p : path) {
    if (p.size() != queried.size()) throw InputError("ell_point_deletion: dimension mismatch");
    const double scaled = ((p - queried).array().abs() / lengthscales.array()).maxCoeff();
    if (!(scaled < 1.0)) kept.push_back(p);
  }
  return kept;
}

DeletionResult ei_point_deletion(const std::vector<Point>& batch, const GaussianProcessModel& model,
                                 double best, const FixedCost& cost0, const StoppingConfig& cfg) {
  cfg.validate();
  DeletionResult out;
  for (const auto& x : batch)
    if (!should_delete(model, x, best, cost0, cfg)) out.batch.push_back(x);
  out.terminate = out.batch.empty();
  return out;
}

Point truncate_step(const Point& current, const Point& proposed, double delta_max) {
  if (!(delta_max > 0.0)) throw InputError("truncate_step: delta_max must be positive");
  if (current.size() != proposed.size()) throw InputError("truncate_step: dimension mismatch");
  const Eigen::VectorXd delta = proposed - current;
  const double len = delta.norm();
  if (len <= delta_max) return proposed;
  const Eigen::VectorXd unit = delta / len;
  double reach = delta_max;
  Point out = (current + reach * unit).cwiseMax(0.0).cwiseMin(1.0);
  // keep the realized length within the bound despite rounding
  while ((out - current).norm() > delta_max) {
    reach = std::nextafter(reach, 0.0) * (1.0 - 4 * std::numeric_limits<double>::epsilon());
    out = (current + reach * unit).cwiseMax(0.0).cwiseMin(1.0);
  }
  return out;
}

Point maximize_acquisition(const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& score,
                           int dim, int pool, int refine, const Eigen::MatrixXd& extra,
                           std::uint64_t seed) {
  Eigen::MatrixXd cand(pool + extra.rows(), dim);
  cand.topRows(pool) = uniform_points(pool, dim, seed);
  if (extra.rows() > 0) cand.bottomRows(extra.rows()) = extra;
  const Eigen::VectorXd values = score(cand);

  std::vector<Eigen::Index> idx(cand.rows());
  std::iota(idx.begin(), idx.end(), 0);
  const int top = std::max(1, std::min<int>(refine, static_cast<int>(idx.size())));
  std::partial_sort(idx.begin(), idx.begin() + top, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) > values(b) || (values(a) == values(b) && a < b);
  });

  Point best = cand.row(idx[0]).transpose();
  double best_value = values(idx[0]);
  for (int t = 0; t < std::min(refine, top); ++t) {
    Point x = cand.row(idx[t]).transpose();
    double fx = values(idx[t]);
    double step = 0.05;
    int evals = 0;
    while (step > 1e-4 && evals < 400) {
      bool improved = false;
      for (int k = 0; k < dim; ++k) {
        for (double sign : {1.0, -1.0}) {
          Point y = x;
          y(k) = std::clamp(y(k) + sign * step, 0.0, 1.0);
          const double fy = score(y.transpose())(0);
          ++evals;
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx > best_value) {
      best = std::move(x);
      best_value = fx;
    }
  }
  return best;
}

namespace {

class Campaign {
 public:
  Campaign(const Benchmark& b, const CostModel& cm, const PlannerConfig& cfg, std::uint64_t seed)
      : b_(b), cm_(cm), cfg_(cfg), seed_(seed) {
    trace_.benchmark = b.name;
    trace_.dim = b.dim;
    trace_.num_objectives = b.num_objectives();
    trace_.config = cfg;
    trace_.cost_description = cm.description;
    trace_.seed = seed;
    for (int k = 0; k < b.num_objectives(); ++k) {
      data_.emplace_back(b.dim);
      kernels_.push_back(KernelConfig::isotropic(b.dim, 0.25, 1.0, 1e-4, cfg.kernel));
    }
    last_fit_size_.assign(b.num_objectives(), -1);
  }

  CampaignTrace run() {
    initial_design();
    if (cfg_.strategy == Strategy::Random) {
      random_design();
    } else {
      while (static_cast<int>(trace_.steps.size()) < cfg_.budget) {
        if (!iterate()) {
          trace_.termination = Termination::SelfStopped;
          break;
        }
      }
    }
    return std::move(trace_);
  }

 private:
  int n() const { return static_cast<int>(trace_.steps.size()); }
  const Point& current() const { return trace_.steps.back().input; }

  void query(const Point& x) {
    TraceStep s;
    s.input = x.cwiseMax(0.0).cwiseMin(1.0);
    s.truth = evaluate(b_, s.input, 0.0);
    s.observed = cfg_.noise_sd > 0.0
                     ? evaluate(b_, s.input, cfg_.noise_sd, step_seed(seed_, SeedPurpose::Noise, n()))
                     : s.truth;
    const Point& from = trace_.steps.empty() ? s.input : current();
    s.cost = cm_.breakdown(from, s.input);
    s.cumulative_cost = (trace_.steps.empty() ? 0.0 : trace_.steps.back().cumulative_cost) + s.cost.total();
    if (b_.num_objectives() == 1 && b_.known_optimum[0]) {
      best_truth_ = std::max(best_truth_, s.truth(0));
      s.regret = *b_.known_optimum[0] - best_truth_;
    } else {
      s.regret = std::numeric_limits<double>::quiet_NaN();
    }
    for (int k = 0; k < b_.num_objectives(); ++k) data_[k].add(s.input, s.observed(k));
    trace_.steps.push_back(std::move(s));
  }

  void initial_design() {
    const Eigen::MatrixXd pts =
        uniform_points(cfg_.initial_points, b_.dim, step_seed(seed_, SeedPurpose::InitialDesign, 0));
    for (int i = 0; i < pts.rows(); ++i) query(pts.row(i).transpose());
  }

  void random_design() {
    const int remaining = cfg_.budget - n();
    if (remaining <= 0) return;
    const Eigen::MatrixXd pts = uniform_points(remaining, b_.dim, step_seed(seed_, SeedPurpose::RandomDesign, 0));
    std::vector<Point> batch;
    for (int i = 0; i < pts.rows(); ++i) batch.emplace_back(pts.row(i).transpose());
    TspConfig tsp = cfg_.tsp;
    tsp.seed = step_seed(seed_, SeedPurpose::Tsp, 0);
    for (const auto& x : order_batch(batch, current(), cm_, tsp)) query(x);
  }

  // Refit every iteration while data is scarce, then every `refit_every` observations.
  std::vector<StandardizedModel> models() {
    std::vector<StandardizedModel> out;
    for (int k = 0; k < b_.num_objectives(); ++k) {
      const int size = data_[k].size();
      const bool due = size < cfg_.refit_every || last_fit_size_[k] < 0 ||
                       size - last_fit_size_[k] >= cfg_.refit_every;
      if (due) {
        const auto probe = standardized_model(data_[k], kernels_[k]);
        FitOptions fo;
        fo.bounds = cfg_.bounds;
        fo.seed = derive_seed(step_seed(seed_, SeedPurpose::Fit, size), {static_cast<std::uint64_t>(k)});
        kernels_[k] = fit_hyperparameters(probe.model.data(), kernels_[k], cfg_.fit_restarts, fo);
        last_fit_size_[k] = size;
      }
      out.push_back(standardized_model(data_[k], kernels_[k]));
    }
    return out;
  }

  StoppingConfig raw_thresholds(const StandardizedModel& m) const {
    if (cfg_.stopping) return *cfg_.stopping;
    const auto& y = data_[0].outputs();
    const double range = y.size() > 0 ? y.maxCoeff() - y.minCoeff() : 0.0;
    StoppingConfig s;
    s.delta = std::max(1e-3 * range, 1e-12);
    s.nu = 0.1 * m.model.kernel().signal_variance * m.scale * m.scale;
    return s;
  }

  FixedCost unit_cost() const {
    if (cm_.positive_fixed_cost) return cm_.fixed_cost;
    return [](const Point&) { return 1.0; };
  }

  Point step_towards(const Point& target) const {
    if (cfg_.strategy == Strategy::TrSnake || cfg_.strategy == Strategy::TrEi)
      return truncate_step(current(), target, *cfg_.delta_max);
    return target;
  }

  std::vector<Point> apply_ell(std::vector<Point> batch, const Eigen::VectorXd& lengthscales) const {
    if (cfg_.deletion != Deletion::Ell) return batch;
    auto reduced = ell_point_deletion(batch, current(), lengthscales);
    // an emptied batch would leave nothing to schedule
    return reduced.empty() ? batch : reduced;
  }

  Point follow_tour(const std::vector<Point>& batch, std::uint64_t t) const {
    TspConfig tsp = cfg_.tsp;
    tsp.seed = step_seed(seed_, SeedPurpose::Tsp, t);
    return order_batch(batch, current(), cm_, tsp).front();
  }

  // One planning step; false when the campaign decides to stop.
  bool iterate() {
    const auto t = static_cast<std::uint64_t>(n());
    const int remaining = cfg_.budget - n();
    const auto ms = models();

    switch (cfg_.strategy) {
      case Strategy::Snake:
      case Strategy::SsSnake:
      case Strategy::TrSnake: {
        const auto& m = ms[0];
        auto batch = create_batch(m.model, remaining, step_seed(seed_, SeedPurpose::Thompson, t),
                                  cfg_.thompson, cfg_.feature_count, n())
                         .points;
        batch = apply_ell(std::move(batch), m.model.kernel().lengthscales);
        if (cfg_.strategy == Strategy::SsSnake) {
          const double best = m.model.data().outputs().maxCoeff();
          auto del = ei_point_deletion(batch, m.model, best, unit_cost(), m.to_model(raw_thresholds(m)));
          if (del.terminate) return false;
          batch = std::move(del.batch);
        }
        query(step_towards(follow_tour(batch, t)));
        return true;
      }
      case Strategy::MoSnake:
      case Strategy::MoTs: {
        std::vector<const GaussianProcessModel*> ptrs;
        Eigen::VectorXd lengthscales = ms[0].model.kernel().lengthscales;
        Eigen::MatrixXd observed(n(), b_.num_objectives());
        for (int k = 0; k < b_.num_objectives(); ++k) {
          ptrs.push_back(&ms[k].model);
          lengthscales = lengthscales.cwiseMin(ms[k].model.kernel().lengthscales);
          observed.col(k) = ms[k].model.data().outputs();
        }
        const Eigen::VectorXd ref = cfg_.scalarization == ScalarizationKind::Tchebyshev
                                        ? tchebyshev_reference(observed)
                                        : Eigen::VectorXd();
        const int count = cfg_.strategy == Strategy::MoSnake ? remaining : 1;
        auto batch = scalarized_batch(ptrs, count, cfg_.scalarization, ref,
                                      step_seed(seed_, SeedPurpose::Thompson, t), cfg_.thompson,
                                      cfg_.feature_count);
        if (cfg_.strategy == Strategy::MoTs) {
          query(batch.front());
          return true;
        }
        batch = apply_ell(std::move(batch), lengthscales);
        query(follow_tour(batch, t));
        return true;
      }
      case Strategy::Ei:
      case Strategy::Eipu:
      case Strategy::EipuStd:
      case Strategy::TrEi:
        return acquisition_step(ms[0], t);
      case Strategy::Random:
        break;
    }
    return false;
  }

  bool acquisition_step(const StandardizedModel& m, std::uint64_t t) {
    const auto& y = m.model.data().outputs();
    Eigen::Index best_i = 0;
    const double best = y.maxCoeff(&best_i);
    const bool per_cost = cfg_.strategy == Strategy::Eipu || cfg_.strategy == Strategy::EipuStd;
    const FixedCost cost0 = unit_cost();

    auto score = [&](const Eigen::MatrixXd& pts) {
      auto [mean, var] = m.model.posterior_batch(pts);
      Eigen::VectorXd out(pts.rows());
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        out(i) = expected_improvement(mean(i), std::sqrt(var(i)), best);
        if (per_cost) out(i) /= cost0(pts.row(i).transpose());
      }
      return out;
    };

    // local candidates around the incumbent
    const std::uint64_t s = step_seed(seed_, SeedPurpose::Acquisition, t);
    std::mt19937_64 rng(derive_seed(s, {1}));
    std::normal_distribution<double> jitter(0.0, 0.05);
    Eigen::MatrixXd extra(64, b_.dim);
    const Point incumbent = m.model.data().inputs().row(best_i).transpose();
    for (int i = 0; i < extra.rows(); ++i)
      for (int k = 0; k < b_.dim; ++k) extra(i, k) = std::clamp(incumbent(k) + jitter(rng), 0.0, 1.0);

    const Point next = maximize_acquisition(score, b_.dim, cfg_.acquisition_pool, cfg_.acquisition_refine,
                                            extra, derive_seed(s, {2}));
    const bool stopping = cfg_.stopping || cfg_.auto_stopping;
    if ((cfg_.strategy == Strategy::Eipu || cfg_.strategy == Strategy::EipuStd) && stopping) {
      const auto thresholds = m.to_model(raw_thresholds(m));
      const auto post = m.model.posterior(next);
      const double eipu = expected_improvement(post.mean, std::sqrt(post.variance), best) / cost0(next);
      const bool stop = cfg_.strategy == Strategy::Eipu ? eipu < thresholds.delta
                                                        : should_delete(eipu, post.variance, thresholds);
      if (stop) return false;
    }
    query(step_towards(next));
    return true;
  }

  const Benchmark& b_;
  const CostModel& cm_;
  const PlannerConfig& cfg_;
  std::uint64_t seed_;
  CampaignTrace trace_;
  std::vector<Dataset> data_;
  std::vector<KernelConfig> kernels_;
  std::vector<int> last_fit_size_;
  double best_truth_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

CampaignTrace run_campaign(const Benchmark& benchmark, const CostModel& cm, const PlannerConfig& cfg,
                           std::uint64_t seed) {
  cfg.validate(benchmark);
  return Campaign(benchmark, cm, cfg, seed).run();
}

}  // namespace snake
