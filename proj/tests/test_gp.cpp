#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "snake/gp.hpp"

using namespace snake;

namespace {

Eigen::MatrixXd random_inputs(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = u(rng);
  return X;
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("kernel values match closed forms") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd P = random_inputs(2, 3, rng);
    Eigen::VectorXd ls(3);
    ls << 0.1, 0.4, 1.3;
    KernelConfig se{KernelFamily::SquaredExponential, ls, 1.7, 0.0};
    KernelConfig m52{KernelFamily::Matern52, ls, 1.7, 0.0};
    CHECK(se(P.row(0).transpose(), P.row(1).transpose()) ==
          doctest::Approx(oracle::se(P.row(0).transpose(), P.row(1).transpose(), ls, 1.7)).epsilon(1e-12));
    CHECK(m52(P.row(0).transpose(), P.row(1).transpose()) ==
          doctest::Approx(oracle::matern52(P.row(0).transpose(), P.row(1).transpose(), ls, 1.7)).epsilon(1e-12));
  }
}

TEST_CASE("kernel gradient matches finite differences") {
  std::mt19937_64 rng(2);
  for (auto fam : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
    const KernelConfig k = KernelConfig::isotropic(2, 0.3, 1.2, 0.0, fam);
    const Eigen::MatrixXd P = random_inputs(2, 2, rng);
    const Point x = P.row(0).transpose(), b = P.row(1).transpose();
    const Eigen::VectorXd g = k.grad_first(x, b);
    for (int j = 0; j < 2; ++j) {
      Point hi = x, lo = x;
      hi[j] += 1e-6;
      lo[j] -= 1e-6;
      CHECK(g[j] == doctest::Approx((k(hi, b) - k(lo, b)) / 2e-6).epsilon(1e-5));
    }
  }
}

TEST_CASE("invalid kernel configs are rejected") {
  KernelConfig k = KernelConfig::isotropic(2, 0.3);
  k.lengthscales[1] = 0.0;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  k = KernelConfig::isotropic(2, 0.3);
  k.signal_variance = 0.0;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  k = KernelConfig::isotropic(2, 0.3);
  k.noise_variance = -1e-3;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  CHECK_THROWS_AS(kernel_family_from_string("rbf-ish"), ConfigError);
}

TEST_CASE("dataset rejects bad inputs") {
  Dataset d(2);
  CHECK_THROWS_AS(d.add(Point::Constant(3, 0.5), 1.0), InputError);
  CHECK_THROWS_AS(d.add(Point::Constant(2, 1.5), 1.0), InputError);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), InputError);
  d.add(Point::Constant(2, 1.0), 1.0);  // boundary is inside
  CHECK(d.size() == 1);
}

TEST_CASE("noiseless interpolation at a training input") {
  Eigen::MatrixXd X(3, 2);
  X << 0.1, 0.2, 0.5, 0.9, 0.8, 0.3;
  Eigen::VectorXd y(3);
  y << 1.0, -0.5, 2.0;
  const GaussianProcessModel m(KernelConfig::isotropic(2, 0.3, 1.0, 0.0), Dataset(X, y));
  for (int i = 0; i < 3; ++i) {
    const Posterior p = m.posterior(X.row(i).transpose());
    CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-6));
    CHECK(p.variance == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(p.variance >= 0.0);
  }
}

TEST_CASE("empty dataset gives the prior") {
  const GaussianProcessModel m(KernelConfig::isotropic(3, 0.3, 2.5, 0.1), Dataset(3));
  const Posterior p = m.posterior(Point::Constant(3, 0.4));
  CHECK(p.mean == 0.0);
  CHECK(p.variance == doctest::Approx(2.5));
}

TEST_CASE("posterior rejects a dimension mismatch") {
  const GaussianProcessModel m(KernelConfig::isotropic(2, 0.3), Dataset(2));
  CHECK_THROWS_AS(m.posterior(Point::Constant(3, 0.5)), InputError);
}

TEST_CASE("3-point SE posterior matches the direct-inverse oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd X = random_inputs(3, 2, rng);
    const Eigen::VectorXd y = random_vector(3, rng);
    const KernelConfig k = KernelConfig::isotropic(2, 0.4, 1.3, 1e-3, KernelFamily::SquaredExponential);
    const GaussianProcessModel m(k, Dataset(X, y));
    const Point x = random_inputs(1, 2, rng).row(0).transpose();
    auto kf = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return oracle::se(a, b, k.lengthscales, 1.3); };
    const auto [mean, var] = oracle::posterior(kf, X, y, 1e-3 + m.jitter(), x);
    const Posterior p = m.posterior(x);
    CHECK(std::abs(p.mean - mean) < 1e-8);
    CHECK(std::abs(p.variance - var) < 1e-8);
  }
}

TEST_CASE("batch posterior equals pointwise posterior") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd X = random_inputs(6, 2, rng);
  const GaussianProcessModel m(KernelConfig::isotropic(2, 0.3, 1.0, 1e-4), Dataset(X, random_vector(6, rng)));
  const Eigen::MatrixXd Q = random_inputs(10, 2, rng);
  const auto [mu, var] = m.posterior_batch(Q);
  for (int i = 0; i < 10; ++i) {
    const Posterior p = m.posterior(Q.row(i).transpose());
    CHECK(mu[i] == doctest::Approx(p.mean).epsilon(1e-12));
    CHECK(var[i] == doctest::Approx(p.variance).epsilon(1e-10));
  }
}

TEST_CASE("posterior variance bounded by prior plus noise") {
  std::mt19937_64 rng(5);
  const KernelConfig k = KernelConfig::isotropic(2, 0.2, 1.5, 0.05);
  const GaussianProcessModel m(k, Dataset(random_inputs(8, 2, rng), random_vector(8, rng)));
  const Eigen::MatrixXd Q = random_inputs(200, 2, rng);
  const auto [mu, var] = m.posterior_batch(Q);
  CHECK(var.maxCoeff() <= 1.5 + 0.05 + 1e-6);
  CHECK(var.minCoeff() >= 0.0);
}

TEST_CASE("adding an observation never increases variance (noiseless)") {
  std::mt19937_64 rng(6);
  const KernelConfig k = KernelConfig::isotropic(2, 0.25, 1.0, 0.0);
  GaussianProcessModel m(k, Dataset(random_inputs(3, 2, rng), random_vector(3, rng)));
  const Eigen::MatrixXd Q = random_inputs(50, 2, rng);
  for (int step = 0; step < 5; ++step) {
    const auto before = m.posterior_batch(Q).second;
    const Point x = random_inputs(1, 2, rng).row(0).transpose();
    m = m.with_observation(x, 0.3);
    const auto after = m.posterior_batch(Q).second;
    for (int i = 0; i < Q.rows(); ++i) CHECK(after[i] <= before[i] + 1e-6);
  }
}

TEST_CASE("log marginal likelihood gradient matches central differences") {
  std::mt19937_64 rng(7);
  for (auto fam : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
    const Dataset data(random_inputs(12, 2, rng), random_vector(12, rng));
    Eigen::VectorXd ls(2);
    ls << 0.3, 0.6;
    const KernelConfig k{fam, ls, 1.4, 0.05};
    const LogLikelihood ll = log_marginal_likelihood(k, data);
    Eigen::VectorXd theta(4);
    theta << std::log(0.3), std::log(0.6), std::log(1.4), std::log(0.05);
    auto at = [&](const Eigen::VectorXd& th) {
      KernelConfig c{fam, th.head(2).array().exp(), std::exp(th[2]), std::exp(th[3])};
      return log_marginal_likelihood(c, data).value;
    };
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd hi = theta, lo = theta;
      hi[j] += 1e-5;
      lo[j] -= 1e-5;
      const double fd = (at(hi) - at(lo)) / 2e-5;
      CHECK(std::abs(ll.gradient[j] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
    CHECK(ll.value == doctest::Approx(GaussianProcessModel(k, data).log_marginal_likelihood()).epsilon(1e-9));
  }
}

TEST_CASE("log marginal likelihood matches the dense formula") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd X = random_inputs(7, 2, rng);
  const Eigen::VectorXd y = random_vector(7, rng);
  const KernelConfig k = KernelConfig::isotropic(2, 0.35, 0.9, 0.02, KernelFamily::SquaredExponential);
  Eigen::MatrixXd G(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      G(i, j) = oracle::se(X.row(i).transpose(), X.row(j).transpose(), k.lengthscales, 0.9) + (i == j ? 0.02 : 0.0);
  const double expected = -0.5 * y.dot(G.inverse() * y) - 0.5 * std::log(G.determinant()) - 3.5 * std::log(2 * M_PI);
  CHECK(log_marginal_likelihood(k, Dataset(X, y)).value == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("fit never lowers the log marginal likelihood of init") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    Dataset one(2);
    one.add(random_inputs(1, 2, rng).row(0).transpose(), 0.7);
    const KernelConfig init = KernelConfig::isotropic(2, 0.5, 1.0, 0.01);
    const KernelConfig fit = fit_hyperparameters(one, init, 3, {.seed = static_cast<std::uint64_t>(t)});
    CHECK(log_marginal_likelihood(fit, one).value >= log_marginal_likelihood(init, one).value - 1e-12);

    const Dataset many(random_inputs(15, 2, rng), random_vector(15, rng));
    const KernelConfig fit2 = fit_hyperparameters(many, init, 3, {.seed = static_cast<std::uint64_t>(t)});
    CHECK(log_marginal_likelihood(fit2, many).value >= log_marginal_likelihood(init, many).value - 1e-12);
  }
}

TEST_CASE("fit rejects empty data and zero restarts") {
  CHECK_THROWS_AS(fit_hyperparameters(Dataset(2), KernelConfig::isotropic(2, 0.3), 1), InputError);
  Dataset d(2);
  d.add(Point::Constant(2, 0.5), 1.0);
  CHECK_THROWS_AS(fit_hyperparameters(d, KernelConfig::isotropic(2, 0.3), 0), InputError);
}

TEST_CASE("lengthscale recovered from SE-GP draws") {
  // 20 inputs, outputs drawn jointly from the known kernel via its Cholesky factor
  int within = 0;
  for (int s = 0; s < 10; ++s) {
    std::mt19937_64 rng(100 + s);
    const Eigen::MatrixXd X = random_inputs(20, 1, rng);
    Eigen::MatrixXd G(20, 20);
    Eigen::VectorXd ls(1);
    ls << 0.2;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        G(i, j) = oracle::se(X.row(i).transpose(), X.row(j).transpose(), ls, 1.0) + (i == j ? 1e-6 : 0.0);
    const Eigen::VectorXd y = Eigen::LLT<Eigen::MatrixXd>(G).matrixL() * random_vector(20, rng);
    const KernelConfig init = KernelConfig::isotropic(1, 0.5, 1.0, 1e-3, KernelFamily::SquaredExponential);
    const KernelConfig fit = fit_hyperparameters(Dataset(X, y), init, 5, {.seed = static_cast<std::uint64_t>(s)});
    const double l = fit.lengthscales[0];
    if (l >= 0.1 && l <= 0.4) ++within;
  }
  CHECK(within >= 8);
}

TEST_CASE("constant outputs favour noise over signal") {
  std::mt19937_64 rng(11);
  const Dataset flat(random_inputs(10, 2, rng), Eigen::VectorXd::Zero(10));
  const KernelConfig fit = fit_hyperparameters(flat, KernelConfig::isotropic(2, 0.3, 1.0, 0.01), 5);
  CHECK(fit.signal_variance <= fit.noise_variance + 1e-3);

  // brute-force grid over (signal, noise) at the fitted lengthscales agrees on the direction
  double best = -INFINITY, best_s = 0, best_n = 0;
  for (double ls2 = -4; ls2 <= 1; ls2 += 1)
    for (double ln = -6; ln <= 0; ln += 0.5) {
      KernelConfig k = fit;
      k.signal_variance = std::pow(10.0, ls2);
      k.noise_variance = std::pow(10.0, ln);
      const double v = log_marginal_likelihood(k, flat).value;
      if (v > best) best = v, best_s = k.signal_variance, best_n = k.noise_variance;
    }
  CHECK(best_s <= best_n + 1e-3);
}

TEST_CASE("jitter escalation recovers duplicated inputs") {
  Eigen::MatrixXd X(3, 1);
  X << 0.3, 0.3, 0.3;
  Eigen::VectorXd y(3);
  y << 1.0, 1.0, 1.0;
  const GaussianProcessModel m(KernelConfig::isotropic(1, 0.2, 1.0, 0.0), Dataset(X, y));
  CHECK(m.jitter() >= GaussianProcessModel::kInitialJitter);
  CHECK(m.jitter() <= GaussianProcessModel::kMaxJitter);
  CHECK(m.posterior(X.row(0).transpose()).mean == doctest::Approx(1.0).epsilon(1e-3));
}

}  // TEST_SUITE
