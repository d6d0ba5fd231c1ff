#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "snake/gp.hpp"

namespace snake {

/// Random Fourier feature basis phi(x) = amplitude * cos(frequencies * x + phases).
struct FeatureBasis {
  Eigen::MatrixXd frequencies;  // (F, d)
  Eigen::VectorXd phases;       // (F)
  double amplitude = 0.0;       // sqrt(2 sigma^2 / F)

  int size() const { return static_cast<int>(phases.size()); }
  /// Features at the rows of `points`, shape (m, F).
  Eigen::MatrixXd features(const Eigen::MatrixXd& points) const;

  /// Spectral draw for the kernel: Gaussian for SE, multivariate Student-t (5 dof) for Matern-5/2.
  static FeatureBasis draw(const KernelConfig& kernel, int feature_count, std::uint64_t seed);
};

struct SampleProvenance {
  std::uint64_t model_id = 0;
  std::uint64_t seed = 0;
  int index = 0;  // position within a jointly drawn batch
};

/// One approximate posterior function draw in pathwise form:
///   f(x) = phi(x)^T w + sum_j v_j k(x, anchor_j).
/// Owns (shares) everything it needs; evaluation never touches the source model.
class PosteriorSample {
 public:
  PosteriorSample(std::shared_ptr<const FeatureBasis> basis, Eigen::VectorXd weights,
                  KernelConfig kernel, std::shared_ptr<const Eigen::MatrixXd> anchors,
                  Eigen::VectorXd update, SampleProvenance provenance);

  double operator()(const Point& x) const;
  Eigen::VectorXd gradient(const Point& x) const;
  /// Both at once; shares the feature evaluation.
  double value_and_gradient(const Point& x, Eigen::VectorXd& grad) const;
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;

  int dim() const { return kernel_.dim(); }
  int feature_count() const { return basis_ ? basis_->size() : 0; }
  const SampleProvenance& provenance() const { return provenance_; }
  const Eigen::MatrixXd& anchors() const { return *anchors_; }

 private:
  std::shared_ptr<const FeatureBasis> basis_;
  Eigen::VectorXd weights_;
  KernelConfig kernel_;
  std::shared_ptr<const Eigen::MatrixXd> anchors_;
  Eigen::VectorXd update_;
  SampleProvenance provenance_;
};

/// S posterior draws sharing one feature basis, with independent weights and
/// noise. Evaluating all draws on a point set is a pair of matrix products.
class SampleBatch {
 public:
  int size() const { return static_cast<int>(weights_.cols()); }
  int dim() const { return kernel_.dim(); }
  /// Values at the rows of `points`, shape (m, S).
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;
  PosteriorSample sample(int i) const;
  const Eigen::MatrixXd& anchors() const { return *anchors_; }
  /// Values at the anchors, shape (n, S), from the update identity.
  const Eigen::MatrixXd& anchor_values() const { return anchor_values_; }

 private:
  friend SampleBatch draw_samples(const GaussianProcessModel&, int, std::uint64_t, int);
  std::shared_ptr<const FeatureBasis> basis_;
  Eigen::MatrixXd weights_;  // (F, S)
  KernelConfig kernel_;
  std::shared_ptr<const Eigen::MatrixXd> anchors_;
  Eigen::MatrixXd update_;  // (n, S)
  Eigen::MatrixXd anchor_values_;
  std::uint64_t model_id_ = 0;
  std::uint64_t seed_ = 0;
};

inline constexpr int kDefaultFeatureCount = 1024;

PosteriorSample draw_sample(const GaussianProcessModel& model, std::uint64_t seed,
                            int feature_count = kDefaultFeatureCount);
SampleBatch draw_samples(const GaussianProcessModel& model, int count, std::uint64_t seed,
                         int feature_count = kDefaultFeatureCount);

struct MaximizeOptions {
  int restarts = 10;      // uniform random starts
  int steps = 200;        // Adam iterations per start
  int pool = 512;         // random candidates screened before ascent
  int pool_starts = 1;    // best pool candidates also used as starts
  double learning_rate = 0.02;
  std::uint64_t seed = 0;
};

/// Value and (optionally filled) gradient of a function on [0,1]^d.
using SmoothObjective = std::function<double(const Point&, Eigen::VectorXd*)>;

struct AscentResult {
  Point point;
  double value;
};

/// Projected Adam ascent on the unit box from one start; returns the best visited point.
AscentResult adam_ascent(const SmoothObjective& f, Point start, int steps, double learning_rate);

/// Uniform points in [0,1]^d, row-wise.
Eigen::MatrixXd uniform_points(int count, int dim, std::uint64_t seed);

/// Multi-start maximization over [0,1]^d. The returned value is never below the value
/// at any start point.
Point maximize_sample(const PosteriorSample& sample, const MaximizeOptions& options = {});

/// Maximizer of every draw in the batch. Starts per draw: the `pool_starts` best points of a
/// shared candidate pool (random points plus the model's training inputs) and
/// `restarts` uniform points.
std::vector<Point> maximize_batch(const SampleBatch& batch, const MaximizeOptions& options);

}  // namespace snake
