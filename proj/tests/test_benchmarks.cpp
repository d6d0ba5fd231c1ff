#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "snake/benchmarks.hpp"

using namespace snake;

namespace {

double branin_ref(double x1, double x2) {
  const double b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI, t = 1.0 / (8.0 * M_PI);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

double hartmann6_ref(const double* x) {
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double P[4][6] = {{1312, 1696, 5569, 124, 8283, 5886},
                                 {2329, 4135, 8307, 3736, 1004, 9991},
                                 {2348, 1451, 3522, 2883, 3047, 6650},
                                 {4047, 8828, 8732, 5743, 1091, 381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) e += A[i][j] * (x[j] - 1e-4 * P[i][j]) * (x[j] - 1e-4 * P[i][j]);
    s += alpha[i] * std::exp(-e);
  }
  return -s;
}

// compass search on the unit box, minimizing
template <class F>
double compass_min(F f, std::vector<double> x, std::vector<double>* arg = nullptr) {
  double fx = f(x.data());
  for (double step = 0.1; step > 1e-9; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t j = 0; j < x.size(); ++j)
        for (double dir : {step, -step}) {
          std::vector<double> y = x;
          y[j] = std::clamp(y[j] + dir, 0.0, 1.0);
          const double fy = f(y.data());
          if (fy < fx) fx = fy, x = y, moved = true;
        }
    }
  }
  if (arg) *arg = x;
  return fx;
}

}  // namespace

TEST_SUITE("benchmarks") {

TEST_CASE("cost model examples") {
  const CostModel ss = self_stopping_cost(0.25);
  const Point a = Point::Constant(2, 0.3);
  CHECK(step_cost(ss, a, a) == 0.25);

  const CostModel tr = truncated_cost(0.1);
  Point b = a;
  b[0] += 0.05;
  CHECK(step_cost(tr, a, b) == doctest::Approx(0.01).epsilon(1e-12));
  b[0] = a[0] + 0.2;
  CHECK(step_cost(tr, a, b) == doctest::Approx(1.04).epsilon(1e-12));
  CHECK(tr.breakdown(a, b).penalty == 1.0);

  CHECK_THROWS_AS(step_cost(tr, a, Point::Zero(3)), InputError);
  CHECK_THROWS_AS(self_stopping_cost(0.0), ConfigError);
  CHECK_THROWS_AS(truncated_cost(-0.1), ConfigError);
}

TEST_CASE("cost invariants") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const CostModel& cm : {self_stopping_cost(0.1), truncated_cost(0.1), euclidean_cost(2.0, 0.3)}) {
    for (int t = 0; t < 50; ++t) {
      Point p(3), q(3);
      for (int j = 0; j < 3; ++j) p[j] = u(rng), q[j] = u(rng);
      CHECK(cm.movement_cost(p, p) == 0.0);
      CHECK(cm.movement_cost(p, q) == doctest::Approx(cm.movement_cost(q, p)).epsilon(1e-15));
      CHECK(step_cost(cm, p, p) == cm.fixed_cost(p));
      CHECK(cm.breakdown(p, q).total() == doctest::Approx(step_cost(cm, p, q)).epsilon(1e-15));
    }
  }
  CHECK(self_stopping_cost(0.1).positive_fixed_cost);
  CHECK_FALSE(truncated_cost(0.1).positive_fixed_cost);
}

TEST_CASE("branin optimum matches a dense-grid search") {
  double best = INFINITY;
  const int n = 2000;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      best = std::min(best, branin_ref(-5.0 + 15.0 * i / (n - 1), 15.0 * j / (n - 1)));
  const Benchmark b = make_benchmark("branin2d");
  Point opt(2);
  opt << (M_PI + 5.0) / 15.0, 2.275 / 15.0;
  CHECK(std::abs(evaluate(b, opt)[0] + best) < 1e-4);
  CHECK(std::abs(*b.known_optimum[0] - (-0.397887)) < 1e-4);
  CHECK(evaluate(b, opt)[0] <= *b.known_optimum[0] + 1e-9);
}

TEST_CASE("hartmann6 optimum matches a multi-start local search") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double best = INFINITY;
  std::vector<double> arg;
  for (int s = 0; s < 30; ++s) {
    std::vector<double> x0(6), x;
    for (auto& v : x0) v = u(rng);
    const double f = compass_min(hartmann6_ref, x0, &x);
    if (f < best) best = f, arg = x;
  }
  const Benchmark b = make_benchmark("hartmann6d");
  CHECK(std::abs(-best - 3.32237) < 1e-3);
  CHECK(std::abs(*b.known_optimum[0] - 3.32237) < 1e-3);
  CHECK(evaluate(b, Eigen::Map<const Eigen::VectorXd>(arg.data(), 6))[0] == doctest::Approx(-best).epsilon(1e-12));
}

TEST_CASE("other known optima are attained") {
  Point h3(3);
  h3 << 0.114614, 0.555649, 0.852547;
  CHECK(evaluate(make_benchmark("hartmann3d"), h3)[0] == doctest::Approx(3.86278).epsilon(1e-5));
  CHECK(evaluate(make_benchmark("shekel4d"), Point::Constant(4, 0.4))[0] ==
        doctest::Approx(*make_benchmark("shekel4d").known_optimum[0]).epsilon(1e-3));
}

TEST_CASE("evaluation is deterministic and total on the cube") {
  for (const auto& name : benchmark_names()) {
    const Benchmark b = make_benchmark(name);
    CHECK(b.dim >= 1);
    CHECK(static_cast<int>(b.known_optimum.size()) == b.num_objectives());
    const Point lo = Point::Zero(b.dim), hi = Point::Ones(b.dim), mid = Point::Constant(b.dim, 0.5);
    for (const Point& x : {lo, hi, mid}) {
      const Eigen::VectorXd v = evaluate(b, x);
      CHECK(v.allFinite());
      CHECK(v == evaluate(b, x));
    }
    CHECK(evaluate(b, mid, 0.1, 5) == evaluate(b, mid, 0.1, 5));
    CHECK(evaluate(b, mid, 0.1, 5) != evaluate(b, mid, 0.1, 6));
    CHECK_THROWS_AS(evaluate(b, Point::Constant(b.dim, 1.01)), InputError);
    CHECK_THROWS_AS(evaluate(b, Point::Constant(b.dim + 1, 0.5)), InputError);
  }
  CHECK_THROWS_AS(make_benchmark("rosenbrock"), ConfigError);
  CHECK(make_benchmark("shekel_mo:4").dim == 4);
}

TEST_CASE("reference front of a single-objective benchmark is the grid argmax") {
  const Benchmark b = make_benchmark("branin2d");
  const ParetoFront f = reference_front(b, 50);
  REQUIRE(f.size() == 1);
  double best = -INFINITY;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      Point x(2);
      x << i / 49.0, j / 49.0;
      best = std::max(best, evaluate(b, x)[0]);
    }
  CHECK(f.points[0].objectives[0] == best);
}

TEST_CASE("perfect trade-off line keeps every grid point") {
  Benchmark line{"line", 1, {}, {}};
  line.objectives.push_back([](const Point& x) { return x[0]; });
  line.objectives.push_back([](const Point& x) { return 1.0 - x[0]; });
  line.known_optimum.resize(2);
  CHECK(reference_front(line, 101).size() == 101);
}

TEST_CASE("shekel_mo reference front matches pairwise dominance") {
  const Benchmark b = make_benchmark("shekel_mo");
  const int n = 100;
  Eigen::MatrixXd F(n * n, 2);
  for (int i = 0; i < n * n; ++i) {
    Point x(2);
    x << (i % n) / double(n - 1), (i / n) / double(n - 1);
    F.row(i) = evaluate(b, x).transpose();
  }
  const auto expected = oracle::strict_front(F);
  const ParetoFront f = reference_front(b, n);
  CHECK(f.size() == expected.size());
  const Eigen::MatrixXd got = f.objective_matrix();
  for (int i = 0; i < got.rows(); ++i)
    for (int j = 0; j < got.rows(); ++j)
      if (i != j) CHECK_FALSE(oracle::dominates(got.row(j).transpose(), got.row(i).transpose()));
}

TEST_CASE("reference front capacity limits") {
  CHECK_THROWS_AS(reference_front(make_benchmark("hartmann6d"), 3), CapacityError);
  CHECK_THROWS_AS(reference_front(make_benchmark("synthetic_snar"), 100), CapacityError);
  CHECK_THROWS_AS(reference_front(make_benchmark("shekel_mo"), 0), InputError);
}

}  // TEST_SUITE
