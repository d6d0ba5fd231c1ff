#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "snake/planner.hpp"

using namespace snake;

namespace {

std::vector<Point> random_batch(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    Point p(d);
    for (int j = 0; j < d; ++j) p[j] = u(rng);
    out.push_back(p);
  }
  return out;
}

double path_cost(const std::vector<Point>& path, const Point& start, const CostModel& cm) {
  double c = 0.0;
  Point at = start;
  for (const auto& p : path) c += cm.transition_cost(at, p), at = p;
  return c;
}

PlannerConfig fast_config(Strategy s, int budget) {
  PlannerConfig c;
  c.strategy = s;
  c.budget = budget;
  c.feature_count = 128;
  c.fit_restarts = 1;
  c.thompson = {.restarts = 0, .steps = 10, .pool = 64, .pool_starts = 1, .learning_rate = 0.02, .seed = 0};
  c.acquisition_pool = 200;
  return c;
}

GaussianProcessModel bump_model() {
  // single dominant mode at (0.7, 0.3)
  Eigen::MatrixXd X = uniform_points(25, 2, 3);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = 2.0 * std::exp(-((X.row(i).transpose() - Eigen::Vector2d(0.7, 0.3)).squaredNorm()) / 0.02);
  return GaussianProcessModel(KernelConfig::isotropic(2, 0.15, 1.0, 1e-4), Dataset(X, y));
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("strategy names round-trip") {
  for (auto s : {Strategy::Snake, Strategy::SsSnake, Strategy::TrSnake, Strategy::MoSnake, Strategy::MoTs,
                 Strategy::Ei, Strategy::Eipu, Strategy::EipuStd, Strategy::TrEi, Strategy::Random})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("ucb"), ConfigError);
  CHECK(deletion_from_string("ell") == Deletion::Ell);
}

TEST_CASE("truncate_step examples") {
  const Point o = Point::Zero(2);
  Point p(2);
  p << 1.0, 0.0;
  const Point r = truncate_step(o, p, 0.1);
  CHECK(r[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r[1] == 0.0);

  Point near(2);
  near << 0.05, 0.0;
  CHECK(truncate_step(o, near, 0.1) == near);

  Point c(2), q(2);
  c << 0.5, 0.5;
  q << 0.8, 0.9;
  const Point t = truncate_step(c, q, 0.25);
  CHECK(t[0] == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(0.70).epsilon(1e-12));
  CHECK((t - c).norm() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(truncate_step(c, c, 0.1) == c);
}

TEST_CASE("truncate_step never exceeds delta_max") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 2000; ++t) {
    const auto pts = random_batch(2, 3, rng);
    for (double dm : {0.1, 0.025, 0.3}) {
      const Point r = truncate_step(pts[0], pts[1], dm);
      CHECK((r - pts[0]).norm() <= dm + 1e-12);
      CHECK(in_unit_cube(r));
    }
  }
}

TEST_CASE("ell point deletion examples") {
  Eigen::VectorXd ls(2);
  ls << 0.1, 0.1;
  Point x(2), a(2), b(2);
  x << 0.5, 0.5;
  a << 0.55, 0.5;
  b << 0.7, 0.5;
  CHECK(ell_point_deletion({}, x, ls).empty());
  CHECK(ell_point_deletion({x}, x, ls).empty());
  const auto kept = ell_point_deletion({a, b}, x, ls);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == b);

  // brute-force cross-check of the sup-norm rule
  std::mt19937_64 rng(2);
  const auto path = random_batch(40, 2, rng);
  const auto out = ell_point_deletion(path, x, ls);
  std::vector<Point> expected;
  for (const auto& p : path)
    if (((p - x).cwiseAbs().array() / ls.array()).maxCoeff() >= 1.0) expected.push_back(p);
  CHECK(out == expected);
}

TEST_CASE("ei point deletion") {
  const GaussianProcessModel m = bump_model();
  const double best = m.data().outputs().maxCoeff();
  const FixedCost c0 = [](const Point&) { return 1.0; };
  std::vector<Point> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(m.data().inputs().row(i).transpose());

  // every point fails the EIpu test but variance stays above nu
  const auto keep_all = ei_point_deletion(batch, m, best, c0, {1e6, 1e-12});
  CHECK(keep_all.batch.size() == 5);
  CHECK_FALSE(keep_all.terminate);

  const auto none = ei_point_deletion(batch, m, best, c0, {1e6, 1e6});
  CHECK(none.batch.empty());
  CHECK(none.terminate);

  // mixed: two far-from-data points with large variance survive a tight nu
  std::vector<Point> mixed = {batch[0], batch[1], batch[2]};
  Point far1(2), far2(2);
  far1 << 0.0, 1.0;
  far2 << 1.0, 1.0;
  mixed.push_back(far1);
  mixed.push_back(far2);
  const StoppingConfig cfg{1e6, 1e-2};
  std::size_t expected = 0;
  for (const auto& p : mixed) expected += should_delete(m, p, best, c0, cfg) ? 0 : 1;
  const auto r = ei_point_deletion(mixed, m, best, c0, cfg);
  CHECK(r.batch.size() == expected);
  CHECK(r.batch.size() == 2);
  CHECK_FALSE(r.terminate);
}

TEST_CASE("create_batch size and determinism") {
  const GaussianProcessModel m = bump_model();
  const MaximizeOptions opts{.restarts = 0, .steps = 10, .pool = 64, .pool_starts = 1};
  const auto one = create_batch(m, 1, 5, opts, 128);
  CHECK(one.points.size() == 1);
  const auto a = create_batch(m, 7, 5, opts, 128, 3), b = create_batch(m, 7, 5, opts, 128, 3);
  CHECK(a.points == b.points);
  CHECK(a.created_at == 3);
  for (const auto& p : a.points) CHECK(in_unit_cube(p));
}

TEST_CASE("thompson batch concentrates on a dominant mode") {
  const GaussianProcessModel m = bump_model();
  // mode location by dense grid over the posterior mean
  Eigen::MatrixXd grid(101 * 101, 2);
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) grid.row(i * 101 + j) << i / 100.0, j / 100.0;
  Eigen::Index arg;
  m.posterior_batch(grid).first.maxCoeff(&arg);
  const Point mode = grid.row(arg).transpose();
  // pooled over 5 seeds
  int near = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto b = create_batch(m, 50, 100 + s, {.restarts = 0, .steps = 20, .pool = 256, .pool_starts = 1}, 256);
    for (const auto& p : b.points) near += (p - mode).norm() < 0.2;
  }
  CHECK(near >= 0.3 * 250);
}

TEST_CASE("order_batch collinear example") {
  const CostModel cm = truncated_cost(10.0);  // 0.2 * |d|, no penalty reachable
  std::vector<Point> batch;
  for (double v : {0.9, 0.1, 0.5}) batch.push_back(Point::Constant(1, v));
  const auto path = order_batch(batch, Point::Zero(1), cm, {.seed = 1});
  REQUIRE(path.size() == 3);
  CHECK(path[0][0] == 0.1);
  CHECK(path[1][0] == 0.5);
  CHECK(path[2][0] == 0.9);
  CHECK(path_cost(path, Point::Zero(1), cm) == doctest::Approx(0.9 * 0.2).epsilon(1e-12));

  const auto single = order_batch({Point::Constant(1, 0.3)}, Point::Zero(1), cm);
  CHECK(single.size() == 1);
  CHECK_THROWS_AS(order_batch({}, Point::Zero(1), cm), InputError);
}

TEST_CASE("order_batch is a permutation no worse than identity or greedy") {
  std::mt19937_64 rng(3);
  const CostModel cm = euclidean_cost();
  for (int t = 0; t < 30; ++t) {
    const auto batch = random_batch(3 + t % 20, 2, rng);
    const Point start = random_batch(1, 2, rng)[0];
    const auto path = order_batch(batch, start, cm, {.seed = static_cast<std::uint64_t>(t)});
    REQUIRE(path.size() == batch.size());
    auto key = [](const Point& p) { return std::make_pair(p[0], p[1]); };
    std::vector<std::pair<double, double>> a, b;
    for (const auto& p : batch) a.push_back(key(p));
    for (const auto& p : path) b.push_back(key(p));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    const Eigen::MatrixXd dist = tour_cost_matrix(batch, start, cm);
    const double c = path_cost(path, start, cm);
    CHECK(c <= path_cost(batch, start, cm) + 1e-12);
    CHECK(c <= nearest_neighbour_tour(dist).cost + 1e-12);
  }
}

TEST_CASE("annealed tour within 5% of the exhaustive optimum for 8 points") {
  std::mt19937_64 rng(4);
  const CostModel cm = euclidean_cost();
  for (int t = 0; t < 10; ++t) {
    const auto batch = random_batch(8, 2, rng);
    const Point start = random_batch(1, 2, rng)[0];
    const Eigen::MatrixXd dist = tour_cost_matrix(batch, start, cm);
    const Tour tour = solve_open_tour(dist, {.seed = static_cast<std::uint64_t>(t)});
    CHECK(tour.cost == doctest::Approx(open_tour_cost(dist, tour.order)).epsilon(1e-12));
    CHECK(tour.cost <= 1.05 * oracle::brute_force_tour(dist));
  }
}

TEST_CASE("config validation") {
  const Benchmark br = make_benchmark("branin2d");
  const Benchmark mo = make_benchmark("shekel_mo");
  PlannerConfig c = fast_config(Strategy::TrSnake, 10);
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  c.delta_max = 0.1;
  CHECK_NOTHROW(c.validate(br));
  c = fast_config(Strategy::SsSnake, 10);
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  c.auto_stopping = true;
  CHECK_NOTHROW(c.validate(br));
  c = fast_config(Strategy::MoSnake, 10);
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  CHECK_NOTHROW(c.validate(mo));
  c = fast_config(Strategy::Snake, 10);
  CHECK_THROWS_AS(c.validate(mo), ConfigError);
  c = fast_config(Strategy::Random, 10);
  CHECK_NOTHROW(c.validate(mo));
  c.budget = 0;
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  c = fast_config(Strategy::Snake, 10);
  c.initial_points = 0;
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  c = fast_config(Strategy::Snake, 10);
  c.bounds.noise_min = 2.0;
  CHECK_THROWS_AS(c.validate(br), ConfigError);
  // rejected before any query
  CHECK_THROWS_AS(run_campaign(br, euclidean_cost(), fast_config(Strategy::TrEi, 5), 1), ConfigError);
}

TEST_CASE("budget of one gives one query") {
  const Benchmark br = make_benchmark("branin2d");
  for (auto s : {Strategy::Snake, Strategy::TrSnake, Strategy::SsSnake}) {
    PlannerConfig c = fast_config(s, 1);
    c.delta_max = 0.1;
    c.auto_stopping = true;
    const CampaignTrace t = run_campaign(br, self_stopping_cost(0.05), c, 3);
    CHECK(t.size() == 1);
    CHECK(t.termination == Termination::BudgetExhausted);
  }
}

TEST_CASE("ss_snake with huge thresholds stops after the initial design") {
  PlannerConfig c = fast_config(Strategy::SsSnake, 30);
  c.initial_points = 3;
  c.stopping = StoppingConfig{1e9, 1e9};
  const CampaignTrace t = run_campaign(make_benchmark("branin2d"), self_stopping_cost(0.05), c, 4);
  CHECK(t.size() == 3);
  CHECK(t.termination == Termination::SelfStopped);
}

TEST_CASE("trace bookkeeping") {
  const Benchmark br = make_benchmark("branin2d");
  const CostModel cm = truncated_cost(0.1);
  for (auto s : {Strategy::Snake, Strategy::TrSnake, Strategy::Ei, Strategy::TrEi, Strategy::Random}) {
    PlannerConfig c = fast_config(s, 20);
    c.delta_max = 0.1;
    const CampaignTrace t = run_campaign(br, cm, c, 5);
    CHECK(t.size() == 20);
    double sum = 0.0, best = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& st = t.steps[i];
      const Point& from = i == 0 ? st.input : t.steps[i - 1].input;
      CHECK(st.cost.total() == step_cost(cm, from, st.input));
      sum += st.cost.total();
      CHECK(st.cumulative_cost == doctest::Approx(sum).epsilon(1e-12));
      best = std::max(best, st.truth[0]);
      CHECK(st.regret == doctest::Approx(*br.known_optimum[0] - best).epsilon(1e-12));
      CHECK(in_unit_cube(st.input));
      if (i > 0 && (s == Strategy::TrSnake || s == Strategy::TrEi)) CHECK((st.input - from).norm() <= 0.1 + 1e-12);
    }
    if (s == Strategy::TrSnake || s == Strategy::TrEi) CHECK(t.total_penalty() == 0.0);
  }
}

TEST_CASE("campaigns are deterministic") {
  const Benchmark h3 = make_benchmark("hartmann3d");
  for (auto s : {Strategy::Snake, Strategy::Eipu, Strategy::Random}) {
    PlannerConfig c = fast_config(s, 12);
    c.noise_sd = 0.01;
    const CampaignTrace a = run_campaign(h3, self_stopping_cost(0.1), c, 77);
    const CampaignTrace b = run_campaign(h3, self_stopping_cost(0.1), c, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.steps[i].input == b.steps[i].input);
      CHECK(a.steps[i].observed == b.steps[i].observed);
    }
  }
}

TEST_CASE("plain snake equals a reference Thompson + TSP loop") {
  const Benchmark br = make_benchmark("branin2d");
  const CostModel cm = euclidean_cost();
  PlannerConfig c = fast_config(Strategy::Snake, 14);
  c.refit_every = 5;
  const std::uint64_t seed = 9;
  const CampaignTrace trace = run_campaign(br, cm, c, seed);

  // reference loop
  Dataset data(2);
  std::vector<Point> xs;
  xs.push_back(uniform_points(1, 2, step_seed(seed, SeedPurpose::InitialDesign, 0)).row(0).transpose());
  data.add(xs.back(), evaluate(br, xs.back())[0]);
  KernelConfig kernel = KernelConfig::isotropic(2, 0.25, 1.0, 1e-4, c.kernel);
  int last_fit = -1;
  while (static_cast<int>(xs.size()) < c.budget) {
    const int n = data.size();
    if (n < c.refit_every || last_fit < 0 || n - last_fit >= c.refit_every) {
      FitOptions fo;
      fo.bounds = c.bounds;
      fo.seed = derive_seed(step_seed(seed, SeedPurpose::Fit, n), {0});
      kernel = fit_hyperparameters(standardized_model(data, kernel).model.data(), kernel, c.fit_restarts, fo);
      last_fit = n;
    }
    const StandardizedModel m = standardized_model(data, kernel);
    const auto batch = create_batch(m.model, c.budget - n, step_seed(seed, SeedPurpose::Thompson, n), c.thompson,
                                    c.feature_count, n);
    TspConfig tsp = c.tsp;
    tsp.seed = step_seed(seed, SeedPurpose::Tsp, n);
    xs.push_back(order_batch(batch.points, xs.back(), cm, tsp).front());
    data.add(xs.back(), evaluate(br, xs.back())[0]);
  }
  REQUIRE(trace.size() == xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(trace.steps[i].input == xs[i]);
}

TEST_CASE("standardized model") {
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  Eigen::VectorXd y(3);
  y << 1.0, 3.0, 5.0;
  const StandardizedModel m = standardized_model(Dataset(X, y), KernelConfig::isotropic(1, 0.3));
  CHECK(m.offset == doctest::Approx(3.0));
  CHECK(m.scale == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(m.model.data().outputs().mean() == doctest::Approx(0.0));
  CHECK(m.from_model(m.to_model(4.2)) == doctest::Approx(4.2));
  const StoppingConfig raw{0.3, 0.6};
  CHECK(m.to_model(raw).delta == doctest::Approx(0.3 / m.scale));
  CHECK(m.to_model(raw).nu == doctest::Approx(0.6 / (m.scale * m.scale)));

  const StandardizedModel flat = standardized_model(Dataset(X, Eigen::VectorXd::Constant(3, 2.0)), KernelConfig::isotropic(1, 0.3));
  CHECK(flat.scale == 1.0);
}

}  // TEST_SUITE
