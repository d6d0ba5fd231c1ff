#include "snake/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace snake {

CostBreakdown CostModel::breakdown(const Point& from, const Point& to) const {
  if (from.size() != to.size()) throw InputError("step_cost: dimension mismatch");
  CostBreakdown c;
  c.fixed = fixed_cost ? fixed_cost(to) : 0.0;
  c.movement = movement_cost ? movement_cost(from, to) : 0.0;
  if (violation && (to - from).norm() > violation->delta_max) c.penalty = violation->penalty;
  return c;
}

double CostModel::transition_cost(const Point& from, const Point& to) const {
  const auto c = breakdown(from, to);
  return c.movement + c.penalty;
}

double step_cost(const CostModel& cm, const Point& from, const Point& to) {
  return cm.breakdown(from, to).total();
}

CostModel self_stopping_cost(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("self-stopping cost: alpha must be positive");
  CostModel cm;
  std::ostringstream d;
  d << "fixed " << alpha << " + euclidean";
  cm.description = d.str();
  cm.fixed_cost = [alpha](const Point&) { return alpha; };
  cm.movement_cost = [](const Point& a, const Point& b) { return (b - a).norm(); };
  cm.positive_fixed_cost = true;
  return cm;
}

CostModel truncated_cost(double delta_max, double scale, double penalty) {
  if (!(delta_max > 0.0)) throw ConfigError("truncated cost: delta_max must be positive");
  if (!(penalty > 0.0)) throw ConfigError("truncated cost: penalty must be positive");
  CostModel cm;
  std::ostringstream d;
  d << scale << " * euclidean + " << penalty << " * [step > " << delta_max << "]";
  cm.description = d.str();
  cm.fixed_cost = [](const Point&) { return 0.0; };
  cm.movement_cost = [scale](const Point& a, const Point& b) { return scale * (b - a).norm(); };
  cm.violation = MovementLimit{delta_max, penalty};
  return cm;
}

CostModel euclidean_cost(double scale, double fixed) {
  if (!(fixed >= 0.0)) throw ConfigError("euclidean cost: fixed part must be non-negative");
  CostModel cm;
  std::ostringstream d;
  d << fixed << " + " << scale << " * euclidean";
  cm.description = d.str();
  cm.fixed_cost = [fixed](const Point&) { return fixed; };
  cm.movement_cost = [scale](const Point& a, const Point& b) { return scale * (b - a).norm(); };
  cm.positive_fixed_cost = fixed > 0.0;
  return cm;
}

namespace functions {

double branin(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double u = x2 - b * x1 * x1 + c * x1 - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

namespace {
constexpr double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};
}

double hartmann3(const Eigen::Vector3d& x) {
  static const double A[4][3] = {{3.0, 10, 30}, {0.1, 10, 35}, {3.0, 10, 30}, {0.1, 10, 35}};
  static const double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                 {0.4699, 0.4387, 0.7470},
                                 {0.1091, 0.8732, 0.5547},
                                 {0.0381, 0.5743, 0.8828}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += A[i][j] * (x(j) - P[i][j]) * (x(j) - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -s;
}

double hartmann6(const Eigen::Matrix<double, 6, 1>& x) {
  static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                 {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                 {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                 {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) inner += A[i][j] * (x(j) - P[i][j]) * (x(j) - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -s;
}

double shekel4(const Eigen::Vector4d& x) {
  static const double beta[10] = {0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5};
  static const double C[4][10] = {{4, 1, 8, 6, 3, 2, 5, 8, 6, 7},
                                  {4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6},
                                  {4, 1, 8, 6, 3, 2, 5, 8, 6, 7},
                                  {4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6}};
  double s = 0.0;
  for (int i = 0; i < 10; ++i) {
    double inner = beta[i];
    for (int j = 0; j < 4; ++j) inner += (x(j) - C[j][i]) * (x(j) - C[j][i]);
    s += 1.0 / inner;
  }
  return -s;
}

}  // namespace functions

namespace {

void require_dim(const Point& x, int d, const char* name) {
  if (x.size() != d) throw InputError(std::string(name) + ": dimension mismatch");
}

// Sum of inverse-quadratic bumps: sum_i 1 / (beta_i + width * ||x - c_i||^2).
struct ShekelMixture {
  Eigen::MatrixXd centers;  // (m, d)
  Eigen::VectorXd beta;
  double width = 25.0;

  double operator()(const Point& x) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      s += 1.0 / (beta(i) + width * (x.transpose() - centers.row(i)).squaredNorm());
    return s;
  }
};

ShekelMixture shekel_mixture(int dim, bool second) {
  static const double first_xy[4][2] = {{0.2, 0.3}, {0.5, 0.8}, {0.8, 0.25}, {0.35, 0.6}};
  static const double second_xy[4][2] = {{0.75, 0.7}, {0.3, 0.15}, {0.6, 0.4}, {0.15, 0.85}};
  static const double first_beta[4] = {0.5, 0.7, 0.6, 0.9};
  static const double second_beta[4] = {0.5, 0.8, 0.6, 0.9};
  ShekelMixture m;
  m.centers.resize(4, dim);
  m.beta.resize(4);
  for (int i = 0; i < 4; ++i) {
    const auto& xy = second ? second_xy[i] : first_xy[i];
    for (int k = 0; k < dim; ++k) {
      if (k < 2) {
        m.centers(i, k) = xy[k];
      } else {
        // extra coordinates spread deterministically over [0.2, 0.8]
        const double a = second ? 0.414 : 0.618;
        const double b = second ? 0.732 : 0.382;
        const double v = a * (i + 1) + b * (k + 1);
        m.centers(i, k) = 0.2 + 0.6 * (v - std::floor(v));
      }
    }
    m.beta(i) = second ? second_beta[i] : first_beta[i];
  }
  return m;
}

Benchmark branin2d() {
  Benchmark b{"branin2d", 2, {}, {}};
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 2, "branin2d");
    return -functions::branin(-5.0 + 15.0 * x(0), 15.0 * x(1));
  });
  b.known_optimum.push_back(-0.397887357729738);
  return b;
}

Benchmark hartmann3d() {
  Benchmark b{"hartmann3d", 3, {}, {}};
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 3, "hartmann3d");
    return -functions::hartmann3(Eigen::Vector3d(x(0), x(1), x(2)));
  });
  b.known_optimum.push_back(3.86278214782076);
  return b;
}

Benchmark hartmann6d() {
  Benchmark b{"hartmann6d", 6, {}, {}};
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 6, "hartmann6d");
    Eigen::Matrix<double, 6, 1> v = x;
    return -functions::hartmann6(v);
  });
  b.known_optimum.push_back(3.32236801141551);
  return b;
}

Benchmark shekel4d() {
  Benchmark b{"shekel4d", 4, {}, {}};
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 4, "shekel4d");
    return -functions::shekel4(Eigen::Vector4d(10.0 * x(0), 10.0 * x(1), 10.0 * x(2), 10.0 * x(3)));
  });
  b.known_optimum.push_back(10.5364098166920);
  return b;
}

Benchmark shekel_mo(int dim) {
  if (dim < 2 || dim > 8) throw ConfigError("shekel_mo: dimension must be in [2, 8]");
  Benchmark b;
  b.name = dim == 2 ? "shekel_mo" : "shekel_mo:" + std::to_string(dim);
  b.dim = dim;
  for (bool second : {false, true}) {
    auto mix = shekel_mixture(dim, second);
    b.objectives.push_back([mix, dim](const Point& x) {
      require_dim(x, dim, "shekel_mo");
      return mix(x);
    });
    b.known_optimum.emplace_back();
  }
  return b;
}

// Smooth 4-input, 2-objective stand-in for a reaction benchmark: the first objective
// grows with x1 while the second barely moves along the trade-off, so the front is
// almost horizontal.
Benchmark synthetic_snar() {
  Benchmark b{"synthetic_snar", 4, {}, {}};
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 4, "synthetic_snar");
    return 1.5 * x(0) * (1.0 - 0.3 * (x(1) - 0.7) * (x(1) - 0.7)) + 0.5 * x(2) * x(3);
  });
  b.objectives.push_back([](const Point& x) {
    require_dim(x, 4, "synthetic_snar");
    return 1.0 - 0.05 * x(0) - 0.6 * (x(1) - 0.4) * (x(1) - 0.4) -
           0.4 * (x(2) - 0.5) * (x(2) - 0.5) - 0.3 * (x(3) - 0.3) * (x(3) - 0.3);
  });
  b.known_optimum.resize(2);
  return b;
}

}  // namespace

Benchmark make_benchmark(const std::string& name) {
  if (name == "branin2d") return branin2d();
  if (name == "hartmann3d") return hartmann3d();
  if (name == "hartmann6d") return hartmann6d();
  if (name == "shekel4d") return shekel4d();
  if (name == "shekel_mo") return shekel_mo(2);
  if (name.rfind("shekel_mo:", 0) == 0) {
    int d = 0;
    try {
      d = std::stoi(name.substr(10));
    } catch (const std::exception&) {
      throw ConfigError("bad benchmark name '" + name + "'");
    }
    return shekel_mo(d);
  }
  if (name == "synthetic_snar") return synthetic_snar();
  throw ConfigError("unknown benchmark '" + name + "'");
}

std::vector<std::string> benchmark_names() {
  return {"branin2d", "hartmann3d", "hartmann6d", "shekel4d", "shekel_mo", "synthetic_snar"};
}

Eigen::VectorXd evaluate(const Benchmark& b, const Point& x, double noise_sd, std::uint64_t seed) {
  if (x.size() != b.dim) throw InputError("evaluate: dimension mismatch for " + b.name);
  if (!in_unit_cube(x)) throw InputError("evaluate(" + b.name + "): point outside [0,1]^d");
  if (noise_sd < 0.0) throw InputError("evaluate: noise_sd must be non-negative");
  Eigen::VectorXd out(b.num_objectives());
  for (int k = 0; k < b.num_objectives(); ++k) out(k) = b.objectives[k](x);
  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_sd);
    for (int k = 0; k < out.size(); ++k) out(k) += normal(rng);
  }
  return out;
}

ParetoFront reference_front(const Benchmark& b, int grid_resolution) {
  if (grid_resolution < 1) throw InputError("reference_front: grid resolution must be positive");
  if (b.dim > 4) throw CapacityError("reference_front: grid oracle supports dim <= 4, got " +
                                     std::to_string(b.dim));
  const double total = std::pow(static_cast<double>(grid_resolution), b.dim);
  if (total > static_cast<double>(kMaxGridPoints)) {
    std::ostringstream msg;
    msg << "reference_front: " << grid_resolution << "^" << b.dim << " grid points exceeds budget of "
        << kMaxGridPoints;
    throw CapacityError(msg.str());
  }
  const auto n = static_cast<Eigen::Index>(total);
  const int K = b.num_objectives();
  Eigen::MatrixXd inputs(n, b.dim);
  Eigen::MatrixXd values(n, K);
  Point x(b.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index rem = i;
    for (int k = 0; k < b.dim; ++k) {
      const auto level = rem % grid_resolution;
      rem /= grid_resolution;
      x(k) = grid_resolution == 1 ? 0.5 : static_cast<double>(level) / (grid_resolution - 1);
    }
    inputs.row(i) = x.transpose();
    for (int k = 0; k < K; ++k) values(i, k) = b.objectives[k](x);
  }
  return pareto_front(values, inputs, 0.0);
}

}  // namespace snake
