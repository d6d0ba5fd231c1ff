#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "snake/common.hpp"

namespace snake {

enum class KernelFamily { SquaredExponential, Matern52 };

const char* to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

struct KernelConfig {
  KernelFamily family = KernelFamily::Matern52;
  Eigen::VectorXd lengthscales;  // one per input dimension
  double signal_variance = 1.0;
  double noise_variance = 1e-6;

  static KernelConfig isotropic(int dim, double lengthscale, double signal_variance = 1.0,
                                double noise_variance = 1e-6,
                                KernelFamily family = KernelFamily::Matern52);

  int dim() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;

  /// Noise-free covariance k(a, b).
  double operator()(const Point& a, const Point& b) const;
  /// Gradient of k(x, b) with respect to x.
  Eigen::VectorXd grad_first(const Point& x, const Point& b) const;
};

/// Observations D_t; inputs stored row-wise.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(int dim) : inputs_(0, dim) {}
  Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd outputs);

  void add(const Point& x, double y);

  int dim() const { return static_cast<int>(inputs_.cols()); }
  int size() const { return static_cast<int>(inputs_.rows()); }
  bool empty() const { return inputs_.rows() == 0; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
};

struct Posterior {
  double mean;
  double variance;
};

/// Exact zero-mean GP posterior. Immutable: the Cholesky factor of K + (noise + jitter) I
/// is computed once at construction, so a model never disagrees with its data.
class GaussianProcessModel {
 public:
  static constexpr double kInitialJitter = 1e-8;
  static constexpr double kMaxJitter = 1e-4;

  GaussianProcessModel(KernelConfig kernel, Dataset data);

  const KernelConfig& kernel() const { return kernel_; }
  const Dataset& data() const { return data_; }
  int dim() const { return kernel_.dim(); }
  double jitter() const { return jitter_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return chol_; }
  /// (K + noise I)^{-1} y.
  const Eigen::VectorXd& alpha() const { return alpha_; }
  /// Fingerprint of (kernel, data); used for sample provenance.
  std::uint64_t id() const { return id_; }

  Posterior posterior(const Point& x) const;
  /// Means and variances at the rows of `points`.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_batch(const Eigen::MatrixXd& points) const;
  /// k(points_i, X_j), shape (m, n).
  Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& points) const;

  /// Solves (K + (noise + jitter) I) z = rhs using the cached factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  double log_marginal_likelihood() const { return log_ml_; }

  GaussianProcessModel with_observation(const Point& x, double y) const;

 private:
  KernelConfig kernel_;
  Dataset data_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double log_ml_ = 0.0;
  std::uint64_t id_ = 0;
};

/// Noise-free covariances k(a_i, b_j) between the rows of `a` and `b`.
Eigen::MatrixXd kernel_matrix(const KernelConfig& kernel, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

/// Gram matrix with noise on the diagonal (no jitter).
Eigen::MatrixXd gram_matrix(const KernelConfig& kernel, const Eigen::MatrixXd& inputs);

/// Log marginal likelihood and its gradient in log-parameter space, ordered
/// (log lengthscale_1..d, log signal_variance, log noise_variance).
struct LogLikelihood {
  double value;
  Eigen::VectorXd gradient;
};
LogLikelihood log_marginal_likelihood(const KernelConfig& kernel, const Dataset& data);

struct HyperparameterBounds {
  double lengthscale_min = 0.01;
  double lengthscale_max = 10.0;
  double signal_min = 1e-4;
  double signal_max = 10.0;  // outputs are standardized before fitting
  double noise_min = 1e-6;
  double noise_max = 1.0;
};

struct FitOptions {
  HyperparameterBounds bounds;
  int max_iterations = 60;
  std::uint64_t seed = 0;
};

/// Multi-start quasi-Newton ascent of the log marginal likelihood in log-parameter
/// space. Start 0 is `init` (clamped into bounds); the others are log-uniform draws.
/// The result never has a lower log marginal likelihood than `init`.
KernelConfig fit_hyperparameters(const Dataset& data, const KernelConfig& init, int restarts,
                                 const FitOptions& options = {});

}  // namespace snake
