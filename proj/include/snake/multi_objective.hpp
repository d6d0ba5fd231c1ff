#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snake/pareto.hpp"
#include "snake/sampling.hpp"

namespace snake {

enum class ScalarizationKind { Linear, Tchebyshev };

const char* to_string(ScalarizationKind k);
ScalarizationKind scalarization_from_string(const std::string& s);

struct Scalarization {
  ScalarizationKind kind = ScalarizationKind::Linear;
  Eigen::VectorXd weights;    // on the simplex
  Eigen::VectorXd reference;  // Tchebyshev only

  void validate() const;
};

/// linear: sum_k w_k v_k;  tchebyshev: min_k w_k (v_k - z_k).
double scalarize(const Scalarization& s, const Eigen::VectorXd& values);

/// Uniform draw from the (K-1)-simplex (flat Dirichlet).
Eigen::VectorXd sample_simplex_weights(int K, std::uint64_t seed);

/// Tchebyshev reference: per-objective minimum of observed values minus
/// `margin_fraction` of the observed range.
Eigen::VectorXd tchebyshev_reference(const Eigen::MatrixXd& observed, double margin_fraction = 0.01);

/// Random-scalarization Thompson step: one posterior draw per objective model,
/// weights from the uniform simplex, maximizer of the scalarized draw.
Point sample_scalarized_maximizer(const std::vector<const GaussianProcessModel*>& models,
                                  ScalarizationKind kind, const Eigen::VectorXd& reference,
                                  std::uint64_t seed, const MaximizeOptions& options = {},
                                  int feature_count = kDefaultFeatureCount);

/// Same with caller-chosen weights (no weight draw).
Point sample_scalarized_maximizer(const std::vector<const GaussianProcessModel*>& models,
                                  const Scalarization& scalarization, std::uint64_t seed,
                                  const MaximizeOptions& options = {},
                                  int feature_count = kDefaultFeatureCount);

/// `count` scalarized maximizers with independent weights; one draw per objective per point.
std::vector<Point> scalarized_batch(const std::vector<const GaussianProcessModel*>& models,
                                    int count, ScalarizationKind kind,
                                    const Eigen::VectorXd& reference, std::uint64_t seed,
                                    const MaximizeOptions& options,
                                    int feature_count = kDefaultFeatureCount);

}  // namespace snake
