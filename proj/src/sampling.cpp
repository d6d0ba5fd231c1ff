#include "snake/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "snake/trig.hpp"

namespace snake {

namespace {

// Value and gradient of sum_j v_j k(x, anchor_j) with respect to x.
double update_value_gradient(const KernelConfig& kernel, const Eigen::MatrixXd& anchors,
                             const Eigen::VectorXd& update, const Point& x, Eigen::VectorXd* grad) {
  constexpr double s5 = 2.23606797749978969640;
  const Eigen::Index n = anchors.rows(), d = anchors.cols();
  thread_local Eigen::VectorXd inv_l2, diff;
  inv_l2 = kernel.lengthscales.array().square().inverse().matrix();
  diff.resize(d);
  if (grad) grad->setZero(d);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double r2 = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      diff(k) = x(k) - anchors(j, k);
      r2 += diff(k) * diff(k) * inv_l2(k);
    }
    double value, slope;
    switch (kernel.family) {
      case KernelFamily::SquaredExponential:
        value = kernel.signal_variance * std::exp(-0.5 * r2);
        slope = value;
        break;
      case KernelFamily::Matern52:
      default: {
        const double r = std::sqrt(r2);
        const double e = kernel.signal_variance * std::exp(-s5 * r);
        value = (1.0 + s5 * r + 5.0 / 3.0 * r2) * e;
        slope = 5.0 / 3.0 * (1.0 + s5 * r) * e;
        break;
      }
    }
    total += update(j) * value;
    if (grad) grad->noalias() -= (update(j) * slope) * diff.cwiseProduct(inv_l2);
  }
  return total;
}

}  // namespace

Eigen::MatrixXd FeatureBasis::features(const Eigen::MatrixXd& points) const {
  Eigen::ArrayXXd arg = (points * frequencies.transpose()).array();
  arg.rowwise() += phases.transpose().array();
  Eigen::ArrayXXd s(arg.rows(), arg.cols()), c(arg.rows(), arg.cols());
  sincos_array(arg.data(), s.data(), c.data(), static_cast<std::size_t>(arg.size()));
  return (amplitude * c).matrix();
}

FeatureBasis FeatureBasis::draw(const KernelConfig& kernel, int feature_count, std::uint64_t seed) {
  if (feature_count < 1) throw ConfigError("feature count must be positive");
  kernel.validate();
  const int d = kernel.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::chi_squared_distribution<double> chi2(5.0);

  FeatureBasis basis;
  basis.frequencies.resize(feature_count, d);
  basis.phases.resize(feature_count);
  for (int i = 0; i < feature_count; ++i) {
    double scale = 1.0;
    switch (kernel.family) {
      case KernelFamily::SquaredExponential:
        break;
      case KernelFamily::Matern52:
        scale = 1.0 / std::sqrt(chi2(rng) / 5.0);
        break;
    }
    for (int k = 0; k < d; ++k)
      basis.frequencies(i, k) = normal(rng) * scale / kernel.lengthscales(k);
    basis.phases(i) = phase(rng);
  }
  basis.amplitude = std::sqrt(2.0 * kernel.signal_variance / feature_count);
  return basis;
}

PosteriorSample::PosteriorSample(std::shared_ptr<const FeatureBasis> basis, Eigen::VectorXd weights,
                                 KernelConfig kernel, std::shared_ptr<const Eigen::MatrixXd> anchors,
                                 Eigen::VectorXd update, SampleProvenance provenance)
    : basis_(std::move(basis)),
      weights_(std::move(weights)),
      kernel_(std::move(kernel)),
      anchors_(std::move(anchors)),
      update_(std::move(update)),
      provenance_(provenance) {
  if (!anchors_) anchors_ = std::make_shared<const Eigen::MatrixXd>(0, kernel_.dim());
  if (basis_ && weights_.size() != basis_->size())
    throw InputError("posterior sample: weight count does not match feature count");
  if (update_.size() != anchors_->rows())
    throw InputError("posterior sample: update coefficients do not match anchors");
}

double PosteriorSample::operator()(const Point& x) const {
  if (x.size() != dim()) throw InputError("posterior sample: dimension mismatch");
  return evaluate(x.transpose())(0);
}

Eigen::VectorXd PosteriorSample::evaluate(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.rows());
  if (basis_ && basis_->size() > 0) out += basis_->features(points) * weights_;
  if (anchors_->rows() > 0) out += kernel_matrix(kernel_, points, *anchors_) * update_;
  return out;
}

Eigen::VectorXd PosteriorSample::gradient(const Point& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  if (basis_ && basis_->size() > 0) {
    const Eigen::ArrayXd arg = (basis_->frequencies * x + basis_->phases).array();
    const Eigen::VectorXd coef = (-basis_->amplitude * weights_.array() * arg.sin()).matrix();
    g += basis_->frequencies.transpose() * coef;
  }
  if (anchors_->rows() > 0) {
    Eigen::VectorXd gk;
    update_value_gradient(kernel_, *anchors_, update_, x, &gk);
    g += gk;
  }
  return g;
}

double PosteriorSample::value_and_gradient(const Point& x, Eigen::VectorXd& grad) const {
  if (x.size() != dim()) throw InputError("posterior sample: dimension mismatch");
  double value = 0.0;
  grad.setZero(x.size());
  if (basis_ && basis_->size() > 0) {
    thread_local Eigen::VectorXd arg, s, c;
    arg.noalias() = basis_->frequencies * x;
    arg += basis_->phases;
    s.resize(arg.size());
    c.resize(arg.size());
    sincos_array(arg.data(), s.data(), c.data(), static_cast<std::size_t>(arg.size()));
    value += basis_->amplitude * weights_.dot(c);
    s.array() *= -weights_.array();
    grad.noalias() += basis_->amplitude * (basis_->frequencies.transpose() * s);
  }
  if (anchors_->rows() > 0) {
    thread_local Eigen::VectorXd gk;
    value += update_value_gradient(kernel_, *anchors_, update_, x, &gk);
    grad += gk;
  }
  return value;
}

Eigen::MatrixXd SampleBatch::evaluate(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd out = basis_->features(points) * weights_;
  if (anchors_->rows() > 0) out += kernel_matrix(kernel_, points, *anchors_) * update_;
  return out;
}

PosteriorSample SampleBatch::sample(int i) const {
  if (i < 0 || i >= size()) throw InputError("sample batch: index out of range");
  return PosteriorSample(basis_, weights_.col(i), kernel_, anchors_, update_.col(i),
                         SampleProvenance{model_id_, seed_, i});
}

SampleBatch draw_samples(const GaussianProcessModel& model, int count, std::uint64_t seed,
                         int feature_count) {
  if (count < 1) throw InputError("draw_samples: count must be positive");
  const KernelConfig& kernel = model.kernel();
  SampleBatch batch;
  batch.kernel_ = kernel;
  batch.model_id_ = model.id();
  batch.seed_ = seed;
  batch.basis_ = std::make_shared<const FeatureBasis>(
      FeatureBasis::draw(kernel, feature_count, derive_seed(seed, {1})));

  std::mt19937_64 rng(derive_seed(seed, {2}));
  std::normal_distribution<double> normal;
  batch.weights_.resize(feature_count, count);
  for (Eigen::Index j = 0; j < batch.weights_.cols(); ++j)
    for (Eigen::Index i = 0; i < batch.weights_.rows(); ++i) batch.weights_(i, j) = normal(rng);

  const auto& data = model.data();
  batch.anchors_ = std::make_shared<const Eigen::MatrixXd>(data.inputs());
  const int n = data.size();
  if (n == 0) {
    batch.anchors_ = std::make_shared<const Eigen::MatrixXd>(0, kernel.dim());
    batch.update_.resize(0, count);
    batch.anchor_values_.resize(0, count);
    return batch;
  }
  // Matheron update: v = (K + s^2 I)^{-1} (y - phi(X) w - eps), eps ~ N(0, s^2 I).
  const double noise_sd = std::sqrt(kernel.noise_variance);
  const Eigen::MatrixXd prior = batch.basis_->features(data.inputs()) * batch.weights_;
  Eigen::MatrixXd residual = -prior;
  residual.colwise() += data.outputs();
  if (noise_sd > 0.0)
    for (Eigen::Index j = 0; j < residual.cols(); ++j)
      for (Eigen::Index i = 0; i < residual.rows(); ++i) residual(i, j) -= noise_sd * normal(rng);
  batch.update_ = model.solve(residual);
  // At the anchors K v = r - (noise + jitter) v, so the sample values there need no
  // feature or kernel evaluation.
  batch.anchor_values_ = prior + residual - (kernel.noise_variance + model.jitter()) * batch.update_;
  return batch;
}

PosteriorSample draw_sample(const GaussianProcessModel& model, std::uint64_t seed, int feature_count) {
  return draw_samples(model, 1, seed, feature_count).sample(0);
}

Eigen::MatrixXd uniform_points(int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd pts(count, dim);
  for (int i = 0; i < count; ++i)
    for (int k = 0; k < dim; ++k) pts(i, k) = u(rng);
  return pts;
}

AscentResult adam_ascent(const SmoothObjective& f, Point x, int steps, double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  x = x.cwiseMax(0.0).cwiseMin(1.0);
  Eigen::VectorXd grad(x.size());
  double value = f(x, &grad);
  AscentResult best{x, value};
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  double b1t = 1.0, b2t = 1.0;
  for (int t = 0; t < steps; ++t) {
    if (!grad.allFinite()) break;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    b1t *= beta1;
    b2t *= beta2;
    const Eigen::ArrayXd step =
        learning_rate * (m.array() / (1.0 - b1t)) / ((v.array() / (1.0 - b2t)).sqrt() + eps);
    x = (x.array() + step).cwiseMax(0.0).cwiseMin(1.0).matrix();
    value = f(x, &grad);
    if (value > best.value) best = {x, value};
  }
  return best;
}

namespace {

SmoothObjective as_objective(const PosteriorSample& s) {
  return [&s](const Point& x, Eigen::VectorXd* g) {
    if (g) return s.value_and_gradient(x, *g);
    return s(x);
  };
}

// Indices of the k largest entries of `values`, ties broken by lowest index.
template <typename Vec>
std::vector<Eigen::Index> top_k(const Vec& values, int k) {
  k = std::min<int>(k, static_cast<int>(values.size()));
  std::vector<Eigen::Index> idx;
  idx.reserve(k + 1);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (static_cast<int>(idx.size()) == k && (k == 0 || !(values(i) > values(idx.back())))) continue;
    auto pos = idx.end();
    while (pos != idx.begin() && values(i) > values(*(pos - 1))) --pos;
    idx.insert(pos, i);
    if (static_cast<int>(idx.size()) > k) idx.pop_back();
  }
  return idx;
}

Eigen::MatrixXd candidate_pool(int pool, int dim, const Eigen::MatrixXd& anchors, std::uint64_t seed) {
  Eigen::MatrixXd cand(pool + anchors.rows(), dim);
  if (pool > 0) cand.topRows(pool) = uniform_points(pool, dim, seed);
  if (anchors.rows() > 0) cand.bottomRows(anchors.rows()) = anchors;
  return cand;
}

}  // namespace

Point maximize_sample(const PosteriorSample& sample, const MaximizeOptions& options) {
  if (options.restarts < 1) throw InputError("maximize_sample: restarts must be >= 1");
  const int d = sample.dim();
  std::vector<Point> starts;
  const Eigen::MatrixXd uniform = uniform_points(options.restarts, d, derive_seed(options.seed, {11}));
  for (int i = 0; i < uniform.rows(); ++i) starts.emplace_back(uniform.row(i).transpose());
  if (options.pool > 0 && options.pool_starts > 0) {
    const Eigen::MatrixXd cand =
        candidate_pool(options.pool, d, sample.anchors(), derive_seed(options.seed, {12}));
    const Eigen::VectorXd values = sample.evaluate(cand);
    for (auto i : top_k(values, options.pool_starts)) starts.emplace_back(cand.row(i).transpose());
  }
  const auto f = as_objective(sample);
  AscentResult best{starts.front(), -std::numeric_limits<double>::infinity()};
  for (const auto& s : starts) {
    auto r = adam_ascent(f, s, options.steps, options.learning_rate);
    if (r.value > best.value) best = std::move(r);
  }
  return best.point;
}

std::vector<Point> maximize_batch(const SampleBatch& batch, const MaximizeOptions& options) {
  const int d = batch.dim();
  const int S = batch.size();
  const Eigen::MatrixXd cand =
      candidate_pool(options.pool, d, batch.anchors(), derive_seed(options.seed, {12}));
  Eigen::MatrixXd values(cand.rows(), S);
  if (options.pool > 0) values.topRows(options.pool) = batch.evaluate(cand.topRows(options.pool));
  values.bottomRows(batch.anchors().rows()) = batch.anchor_values();
  std::vector<Point> out;
  out.reserve(S);
  for (int i = 0; i < S; ++i) {
    const PosteriorSample s = batch.sample(i);
    const auto f = as_objective(s);
    std::vector<Point> starts;
    for (auto j : top_k(values.col(i), options.pool_starts)) starts.emplace_back(cand.row(j).transpose());
    if (options.restarts > 0) {
      const Eigen::MatrixXd uniform =
          uniform_points(options.restarts, d, derive_seed(options.seed, {13, static_cast<std::uint64_t>(i)}));
      for (int r = 0; r < uniform.rows(); ++r) starts.emplace_back(uniform.row(r).transpose());
    }
    AscentResult best{starts.front(), -std::numeric_limits<double>::infinity()};
    for (const auto& st : starts) {
      auto r = adam_ascent(f, st, options.steps, options.learning_rate);
      if (r.value > best.value) best = std::move(r);
    }
    out.push_back(std::move(best.point));
  }
  return out;
}

}  // namespace snake
