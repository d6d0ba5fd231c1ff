#include "snake/multi_objective.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace snake {

const char* to_string(ScalarizationKind k) {
  return k == ScalarizationKind::Linear ? "linear" : "tchebyshev";
}

ScalarizationKind scalarization_from_string(const std::string& s) {
  if (s == "linear") return ScalarizationKind::Linear;
  if (s == "tchebyshev" || s == "chebyshev") return ScalarizationKind::Tchebyshev;
  throw ConfigError("unknown scalarization '" + s + "'");
}

void Scalarization::validate() const {
  if (weights.size() == 0) throw InputError("scalarization: no weights");
  if ((weights.array() < 0.0).any()) throw InputError("scalarization: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw InputError("scalarization: weights must sum to 1");
  if (kind == ScalarizationKind::Tchebyshev && reference.size() != weights.size())
    throw InputError("scalarization: tchebyshev needs one reference value per objective");
  if (kind == ScalarizationKind::Linear && reference.size() != 0)
    throw InputError("scalarization: linear scalarization takes no reference point");
}

double scalarize(const Scalarization& s, const Eigen::VectorXd& values) {
  if (values.size() != s.weights.size()) throw InputError("scalarize: length mismatch");
  s.validate();
  if (s.kind == ScalarizationKind::Linear) return s.weights.dot(values);
  return (s.weights.array() * (values - s.reference).array()).minCoeff();
}

Eigen::VectorXd sample_simplex_weights(int K, std::uint64_t seed) {
  if (K < 1) throw InputError("simplex weights: K must be positive");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd w(K);
  for (int k = 0; k < K; ++k) w(k) = expo(rng);
  return w / w.sum();
}

Eigen::VectorXd tchebyshev_reference(const Eigen::MatrixXd& observed, double margin_fraction) {
  if (observed.rows() == 0) return Eigen::VectorXd::Zero(observed.cols());
  const Eigen::VectorXd lo = observed.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = observed.colwise().maxCoeff().transpose();
  return lo - margin_fraction * (hi - lo);
}

namespace {

void check_models(const std::vector<const GaussianProcessModel*>& models) {
  if (models.size() < 2) throw InputError("scalarized sampling needs at least two objective models");
  for (const auto* m : models) {
    if (!m) throw InputError("scalarized sampling: null model");
    if (m->dim() != models.front()->dim())
      throw InputError("scalarized sampling: models disagree on input dimension");
  }
}

// Scalarized value (columns of `values` are objectives) and the index of the active
// objective for Tchebyshev.
double combine(ScalarizationKind kind, const Eigen::VectorXd& w, const Eigen::VectorXd& z,
               const Eigen::VectorXd& values, int* active) {
  if (kind == ScalarizationKind::Linear) return w.dot(values);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double v = w(k) * (values(k) - z(k));
    if (v < best) {
      best = v;
      if (active) *active = static_cast<int>(k);
    }
  }
  return best;
}

std::vector<Point> maximize_scalarized(const std::vector<SampleBatch>& draws,
                                       const std::vector<Eigen::VectorXd>& weights,
                                       ScalarizationKind kind, const Eigen::VectorXd& reference,
                                       const MaximizeOptions& options) {
  const int K = static_cast<int>(draws.size());
  const int d = draws.front().dim();
  const int S = draws.front().size();

  Eigen::MatrixXd cand(options.pool + draws.front().anchors().rows(), d);
  if (options.pool > 0) cand.topRows(options.pool) = uniform_points(options.pool, d, derive_seed(options.seed, {12}));
  if (draws.front().anchors().rows() > 0) cand.bottomRows(draws.front().anchors().rows()) = draws.front().anchors();
  std::vector<Eigen::MatrixXd> pool_values;
  for (const auto& b : draws) {
    Eigen::MatrixXd v(cand.rows(), S);
    if (options.pool > 0) v.topRows(options.pool) = b.evaluate(cand.topRows(options.pool));
    v.bottomRows(b.anchors().rows()) = b.anchor_values();
    pool_values.push_back(std::move(v));
  }

  std::vector<Point> out;
  out.reserve(S);
  for (int i = 0; i < S; ++i) {
    std::vector<PosteriorSample> samples;
    for (const auto& b : draws) samples.push_back(b.sample(i));
    const Eigen::VectorXd& w = weights[i];

    Eigen::VectorXd scal(cand.rows());
    Eigen::VectorXd v(K);
    for (Eigen::Index r = 0; r < cand.rows(); ++r) {
      for (int k = 0; k < K; ++k) v(k) = pool_values[k](r, i);
      scal(r) = combine(kind, w, reference, v, nullptr);
    }

    const SmoothObjective f = [&](const Point& x, Eigen::VectorXd* g) {
      Eigen::VectorXd vals(K);
      if (!g) {
        for (int k = 0; k < K; ++k) vals(k) = samples[k](x);
        return combine(kind, w, reference, vals, nullptr);
      }
      std::vector<Eigen::VectorXd> grads(K);
      for (int k = 0; k < K; ++k) vals(k) = samples[k].value_and_gradient(x, grads[k]);
      int active = 0;
      const double value = combine(kind, w, reference, vals, &active);
      if (kind == ScalarizationKind::Linear) {
        g->setZero(x.size());
        for (int k = 0; k < K; ++k) *g += w(k) * grads[k];
      } else {
        *g = w(active) * grads[active];
      }
      return value;
    };

    std::vector<Point> starts;
    std::vector<Eigen::Index> idx(cand.rows());
    std::iota(idx.begin(), idx.end(), 0);
    const int top = std::min<int>(options.pool_starts, static_cast<int>(idx.size()));
    std::partial_sort(idx.begin(), idx.begin() + top, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return scal(a) > scal(b) || (scal(a) == scal(b) && a < b);
    });
    for (int t = 0; t < top; ++t) starts.emplace_back(cand.row(idx[t]).transpose());
    if (options.restarts > 0) {
      const Eigen::MatrixXd uni =
          uniform_points(options.restarts, d, derive_seed(options.seed, {13, static_cast<std::uint64_t>(i)}));
      for (int r = 0; r < uni.rows(); ++r) starts.emplace_back(uni.row(r).transpose());
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

std::vector<SampleBatch> draw_per_objective(const std::vector<const GaussianProcessModel*>& models,
                                            int count, std::uint64_t seed, int feature_count) {
  std::vector<SampleBatch> draws;
  for (std::size_t k = 0; k < models.size(); ++k)
    draws.push_back(draw_samples(*models[k], count, derive_seed(seed, {k}), feature_count));
  return draws;
}

}  // namespace

std::vector<Point> scalarized_batch(const std::vector<const GaussianProcessModel*>& models, int count,
                                    ScalarizationKind kind, const Eigen::VectorXd& reference,
                                    std::uint64_t seed, const MaximizeOptions& options,
                                    int feature_count) {
  check_models(models);
  if (count < 1) throw InputError("scalarized_batch: count must be positive");
  const int K = static_cast<int>(models.size());
  if (kind == ScalarizationKind::Tchebyshev && reference.size() != K)
    throw InputError("scalarized_batch: reference length must equal objective count");
  const auto draws = draw_per_objective(models, count, seed, feature_count);
  std::vector<Eigen::VectorXd> weights;
  for (int i = 0; i < count; ++i)
    weights.push_back(sample_simplex_weights(K, derive_seed(seed, {0x1a4bdaULL, static_cast<std::uint64_t>(i)})));
  MaximizeOptions opts = options;
  opts.seed = derive_seed(seed, {0x0b7ULL, options.seed});
  return maximize_scalarized(draws, weights, kind, reference, opts);
}

Point sample_scalarized_maximizer(const std::vector<const GaussianProcessModel*>& models,
                                  ScalarizationKind kind, const Eigen::VectorXd& reference,
                                  std::uint64_t seed, const MaximizeOptions& options,
                                  int feature_count) {
  return scalarized_batch(models, 1, kind, reference, seed, options, feature_count).front();
}

Point sample_scalarized_maximizer(const std::vector<const GaussianProcessModel*>& models,
                                  const Scalarization& scalarization, std::uint64_t seed,
                                  const MaximizeOptions& options, int feature_count) {
  check_models(models);
  scalarization.validate();
  if (scalarization.weights.size() != static_cast<Eigen::Index>(models.size()))
    throw InputError("scalarized maximizer: weight count must equal objective count");
  const auto draws = draw_per_objective(models, 1, seed, feature_count);
  MaximizeOptions opts = options;
  opts.seed = derive_seed(seed, {0x0b7ULL, options.seed});
  return maximize_scalarized(draws, {scalarization.weights}, scalarization.kind,
                             scalarization.reference, opts)
      .front();
}

}  // namespace snake
