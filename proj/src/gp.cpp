#include "snake/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace snake {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640;

// Covariance as a function of the scaled squared distance r2 = sum((a-b)/l)^2.
double kernel_of_r2(KernelFamily family, double sigma2, double r2) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return sigma2 * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
      const double r = std::sqrt(r2);
      return sigma2 * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
    }
  }
  return 0.0;
}

// -dk/d(r2) * 2, i.e. the factor g such that d k / d a_j = -g * (a_j - b_j) / l_j^2.
double kernel_slope(KernelFamily family, double sigma2, double r2) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return sigma2 * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
      const double r = std::sqrt(r2);
      return sigma2 * 5.0 / 3.0 * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
    }
  }
  return 0.0;
}

std::uint64_t hash_doubles(std::uint64_t h, const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, p + i, sizeof bits);
    h = mix_seed(h ^ bits);
  }
  return h;
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const KernelConfig& kernel, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  const Eigen::RowVectorXd inv_l = kernel.lengthscales.cwiseInverse().transpose();
  const Eigen::MatrixXd as = a.array().rowwise() * inv_l.array();
  const Eigen::MatrixXd bs = b.array().rowwise() * inv_l.array();
  Eigen::ArrayXXd r2 = (-2.0 * as * bs.transpose()).array();
  r2.colwise() += as.rowwise().squaredNorm().array();
  r2.rowwise() += bs.rowwise().squaredNorm().transpose().array();
  r2 = r2.max(0.0);
  const double s2 = kernel.signal_variance;
  switch (kernel.family) {
    case KernelFamily::SquaredExponential:
      return (s2 * (-0.5 * r2).exp()).matrix();
    case KernelFamily::Matern52: {
      const Eigen::ArrayXXd r = r2.sqrt();
      return (s2 * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * (-kSqrt5 * r).exp()).matrix();
    }
  }
  return {};
}

const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::SquaredExponential: return "squared-exponential";
    case KernelFamily::Matern52: return "matern-5/2";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "squared-exponential" || s == "se" || s == "rbf") return KernelFamily::SquaredExponential;
  if (s == "matern-5/2" || s == "matern52") return KernelFamily::Matern52;
  throw ConfigError("unknown kernel family '" + s + "'");
}

KernelConfig KernelConfig::isotropic(int dim, double lengthscale, double signal_variance,
                                     double noise_variance, KernelFamily family) {
  KernelConfig k;
  k.family = family;
  k.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
  k.signal_variance = signal_variance;
  k.noise_variance = noise_variance;
  return k;
}

void KernelConfig::validate() const {
  if (lengthscales.size() == 0) throw ConfigError("kernel needs at least one lengthscale");
  if (!(lengthscales.array() > 0.0).all()) throw ConfigError("lengthscales must be positive");
  if (!(signal_variance > 0.0)) throw ConfigError("signal variance must be positive");
  if (!(noise_variance >= 0.0)) throw ConfigError("noise variance must be non-negative");
}

double KernelConfig::operator()(const Point& a, const Point& b) const {
  const double r2 = ((a - b).array() / lengthscales.array()).square().sum();
  return kernel_of_r2(family, signal_variance, r2);
}

Eigen::VectorXd KernelConfig::grad_first(const Point& x, const Point& b) const {
  const Eigen::ArrayXd scaled = (x - b).array() / lengthscales.array().square();
  const double r2 = ((x - b).array() / lengthscales.array()).square().sum();
  return -kernel_slope(family, signal_variance, r2) * scaled.matrix();
}

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.rows() != outputs_.size())
    throw InputError("dataset: inputs and outputs differ in length");
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    require_unit_cube(inputs_.row(i).transpose(), "dataset");
}

void Dataset::add(const Point& x, double y) {
  if (inputs_.cols() == 0 && inputs_.rows() == 0) inputs_.resize(0, x.size());
  if (x.size() != inputs_.cols()) throw InputError("dataset: dimension mismatch");
  require_unit_cube(x, "dataset");
  const auto n = inputs_.rows();
  inputs_.conservativeResize(n + 1, Eigen::NoChange);
  inputs_.row(n) = x.transpose();
  outputs_.conservativeResize(n + 1);
  outputs_(n) = y;
}

Eigen::MatrixXd gram_matrix(const KernelConfig& kernel, const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd K = kernel_matrix(kernel, inputs, inputs);
  K.diagonal().setConstant(kernel.signal_variance + kernel.noise_variance);
  return K;
}

GaussianProcessModel::GaussianProcessModel(KernelConfig kernel, Dataset data)
    : kernel_(std::move(kernel)), data_(std::move(data)) {
  kernel_.validate();
  if (!data_.empty() && data_.dim() != kernel_.dim())
    throw InputError("GP: data dimension does not match kernel lengthscales");

  const int n = data_.size();
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(kernel_.family) + 1);
  h = hash_doubles(h, kernel_.lengthscales.data(), kernel_.lengthscales.size());
  h = hash_doubles(h, &kernel_.signal_variance, 1);
  h = hash_doubles(h, &kernel_.noise_variance, 1);
  h = hash_doubles(h, data_.inputs().data(), data_.inputs().size());
  h = hash_doubles(h, data_.outputs().data(), data_.outputs().size());
  id_ = h;

  if (n == 0) {
    log_ml_ = 0.0;
    return;
  }

  const Eigen::MatrixXd K = gram_matrix(kernel_, data_.inputs());
  // Escalate jitter 0, 1e-8, 1e-7, ..., 1e-4 until the factorization succeeds.
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    chol_.compute(Kj);
    if (chol_.info() == Eigen::Success && (chol_.matrixLLT().diagonal().array() > 0.0).all()) break;
    if (jitter >= kMaxJitter * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "GP: Gram matrix not positive definite at jitter " << jitter;
      throw NumericalError(msg.str());
    }
    jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0;
  }
  jitter_ = jitter;
  alpha_ = chol_.solve(data_.outputs());
  const double log_det = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
  log_ml_ = -0.5 * data_.outputs().dot(alpha_) - 0.5 * log_det -
            0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd GaussianProcessModel::cross_covariance(const Eigen::MatrixXd& points) const {
  if (data_.empty()) return Eigen::MatrixXd(points.rows(), 0);
  return kernel_matrix(kernel_, points, data_.inputs());
}

Eigen::MatrixXd GaussianProcessModel::solve(const Eigen::MatrixXd& rhs) const {
  if (data_.empty()) return Eigen::MatrixXd(0, rhs.cols());
  return chol_.solve(rhs);
}

Posterior GaussianProcessModel::posterior(const Point& x) const {
  if (x.size() != dim()) throw InputError("posterior: dimension mismatch");
  if (data_.empty()) return {0.0, kernel_.signal_variance};
  auto [mean, var] = posterior_batch(x.transpose());
  return {mean(0), var(0)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> GaussianProcessModel::posterior_batch(
    const Eigen::MatrixXd& points) const {
  if (points.cols() != dim()) throw InputError("posterior: dimension mismatch");
  const auto m = points.rows();
  if (data_.empty())
    return {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Constant(m, kernel_.signal_variance)};
  const Eigen::MatrixXd Ks = cross_covariance(points);
  Eigen::VectorXd mean = Ks * alpha_;
  const Eigen::MatrixXd V = chol_.matrixL().solve(Ks.transpose());
  Eigen::VectorXd var = (kernel_.signal_variance - V.colwise().squaredNorm().array()).max(0.0);
  return {std::move(mean), std::move(var)};
}

GaussianProcessModel GaussianProcessModel::with_observation(const Point& x, double y) const {
  Dataset d = data_;
  d.add(x, y);
  return GaussianProcessModel(kernel_, std::move(d));
}

LogLikelihood log_marginal_likelihood(const KernelConfig& kernel, const Dataset& data) {
  const int d = kernel.dim();
  LogLikelihood out{0.0, Eigen::VectorXd::Zero(d + 2)};
  if (data.empty()) return out;

  GaussianProcessModel model(kernel, data);
  out.value = model.log_marginal_likelihood();

  const auto n = data.size();
  Eigen::MatrixXd Linv = Eigen::MatrixXd::Identity(n, n);
  model.cholesky().matrixL().solveInPlace(Linv);
  Eigen::MatrixXd Kinv(n, n);
  Kinv.noalias() = Linv.transpose().triangularView<Eigen::Upper>() * Linv;
  const Eigen::VectorXd& alpha = model.alpha();
  // W = alpha alpha^T - K^{-1}; dL/dtheta = 0.5 tr(W dK/dtheta)
  const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;

  const Eigen::MatrixXd& X = data.inputs();
  const Eigen::ArrayXXd Kf = kernel_matrix(kernel, X, X).array();
  Eigen::ArrayXXd r2 = Eigen::ArrayXXd::Zero(n, n);
  std::vector<Eigen::ArrayXXd> per_dim(d);
  for (int k = 0; k < d; ++k) {
    const Eigen::ArrayXd col = X.col(k).array() / kernel.lengthscales(k);
    Eigen::ArrayXXd diff = col.replicate(1, n) - col.transpose().replicate(n, 1);
    per_dim[k] = diff.square();
    r2 += per_dim[k];
  }
  Eigen::ArrayXXd slope;
  switch (kernel.family) {
    case KernelFamily::SquaredExponential:
      slope = Kf;
      break;
    case KernelFamily::Matern52: {
      const Eigen::ArrayXXd r = r2.sqrt();
      slope = kernel.signal_variance * 5.0 / 3.0 * (1.0 + kSqrt5 * r) * (-kSqrt5 * r).exp();
      break;
    }
  }
  const Eigen::ArrayXXd WS = W.array() * slope;
  Eigen::VectorXd g_len(d);
  for (int k = 0; k < d; ++k) g_len(k) = 0.5 * (WS * per_dim[k]).sum();
  const double g_sig = 0.5 * (W.array() * Kf).sum();
  out.gradient.head(d) = g_len;
  out.gradient(d) = g_sig;
  out.gradient(d + 1) = 0.5 * W.trace() * kernel.noise_variance;
  return out;
}

namespace {

struct LogBox {
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const { return v.cwiseMax(lo).cwiseMin(hi); }
  // 1 where the coordinate sits on a bound and the gradient pushes outward
  Eigen::ArrayXd active(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad) const {
    Eigen::ArrayXd a(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      a(i) = (theta(i) <= lo(i) && grad(i) < 0.0) || (theta(i) >= hi(i) && grad(i) > 0.0) ? 1.0 : 0.0;
    return a;
  }
};

KernelConfig from_log(const KernelConfig& shape, const Eigen::VectorXd& theta) {
  KernelConfig k = shape;
  const int d = shape.dim();
  k.lengthscales = theta.head(d).array().exp();
  k.signal_variance = std::exp(theta(d));
  k.noise_variance = std::exp(theta(d + 1));
  return k;
}

Eigen::VectorXd to_log(const KernelConfig& k) {
  const int d = k.dim();
  Eigen::VectorXd theta(d + 2);
  theta.head(d) = k.lengthscales.array().log();
  theta(d) = std::log(k.signal_variance);
  theta(d + 1) = std::log(std::max(k.noise_variance, 1e-300));
  return theta;
}

struct Evaluated {
  Eigen::VectorXd theta;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
};

Evaluated evaluate(const KernelConfig& shape, const Dataset& data, const Eigen::VectorXd& theta,
                   bool& any_success) {
  Evaluated e;
  e.theta = theta;
  try {
    const auto ll = log_marginal_likelihood(from_log(shape, theta), data);
    if (std::isfinite(ll.value) && ll.gradient.allFinite()) {
      e.value = ll.value;
      e.grad = ll.gradient;
      any_success = true;
    }
  } catch (const NumericalError&) {
  }
  if (e.grad.size() == 0) e.grad = Eigen::VectorXd::Zero(theta.size());
  return e;
}

// Projected BFGS ascent with Armijo backtracking. Coordinates pinned at a bound are
// frozen; the inverse-Hessian estimate is reset when that set changes.
Evaluated ascend(const KernelConfig& shape, const Dataset& data, const LogBox& box,
                 Evaluated cur, int max_iterations, bool& any_success) {
  const auto p = cur.theta.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
  if (!std::isfinite(cur.value)) return cur;
  Eigen::ArrayXd act = box.active(cur.theta, cur.grad);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::ArrayXd free = 1.0 - act;
    const Eigen::VectorXd g = (cur.grad.array() * free).matrix();
    Eigen::VectorXd dir = ((H * g).array() * free).matrix();
    if (dir.dot(g) <= 0.0) {
      H.setIdentity();
      dir = g;
    }
    const double max_step = dir.cwiseAbs().maxCoeff();
    if (max_step < 1e-10) break;
    double step = std::min(1.0, 2.0 / max_step);
    Evaluated next;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Eigen::VectorXd cand = box.clamp(cur.theta + step * dir);
      next = evaluate(shape, data, cand, any_success);
      if (next.value >= cur.value + 1e-4 * cur.grad.dot(cand - cur.theta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = next.theta - cur.theta;
    const Eigen::VectorXd y = ((cur.grad - next.grad).array() * free).matrix();  // ascent: Hessian of -L
    const Eigen::ArrayXd next_act = box.active(next.theta, next.grad);
    const double improvement = next.value - cur.value;
    const double sy = s.dot(y);
    if ((next_act != act).any() || sy <= 1e-12) {
      H.setIdentity();
    } else {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    act = next_act;
    cur = std::move(next);
    if (improvement < 1e-7 * (1.0 + std::abs(cur.value))) break;
  }
  return cur;
}

}  // namespace

KernelConfig fit_hyperparameters(const Dataset& data, const KernelConfig& init, int restarts,
                                 const FitOptions& options) {
  if (data.empty()) throw InputError("fit_hyperparameters: empty dataset");
  if (restarts < 1) throw InputError("fit_hyperparameters: restarts must be >= 1");
  init.validate();
  if (init.dim() != data.dim()) throw InputError("fit_hyperparameters: dimension mismatch");

  const int d = init.dim();
  const auto& b = options.bounds;
  LogBox box;
  box.lo = Eigen::VectorXd(d + 2);
  box.hi = Eigen::VectorXd(d + 2);
  box.lo.head(d).setConstant(std::log(b.lengthscale_min));
  box.hi.head(d).setConstant(std::log(b.lengthscale_max));
  box.lo(d) = std::log(b.signal_min);
  box.hi(d) = std::log(b.signal_max);
  box.lo(d + 1) = std::log(b.noise_min);
  box.hi(d + 1) = std::log(b.noise_max);

  bool any_success = false;
  // The unclamped init participates so the monotone-improvement contract holds even
  // when init lies outside the search box.
  Evaluated best = evaluate(init, data, to_log(init), any_success);
  KernelConfig best_config = init;

  std::mt19937_64 rng(derive_seed(options.seed, {0x6670u, static_cast<std::uint64_t>(data.size())}));
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta(d + 2);
    if (r == 0) {
      theta = box.clamp(to_log(init));
    } else {
      for (int i = 0; i < d + 2; ++i) {
        std::uniform_real_distribution<double> u(box.lo(i), box.hi(i));
        theta(i) = u(rng);
      }
    }
    Evaluated start = evaluate(init, data, theta, any_success);
    Evaluated result = ascend(init, data, box, std::move(start), options.max_iterations, any_success);
    if (result.value > best.value) {
      best = std::move(result);
      best_config = from_log(init, best.theta);
    }
  }
  if (!any_success) {
    std::ostringstream msg;
    msg << "fit_hyperparameters: Gram matrix singular at every candidate (jitter reached "
        << GaussianProcessModel::kMaxJitter << ")";
    throw NumericalError(msg.str());
  }
  return best_config;
}

}  // namespace snake
