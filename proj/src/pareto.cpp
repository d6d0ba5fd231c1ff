#include "snake/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace snake {

Eigen::MatrixXd ParetoFront::objective_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), num_objectives());
  for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = points[i].objectives.transpose();
  return m;
}

bool eps_dominates(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps) {
  bool strict = false;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double bar = p(k) + eps;
    if (q(k) < bar) return false;
    if (q(k) > bar) strict = true;
  }
  return strict;
}

namespace {

// Two objectives: sweep in decreasing f1, comparing against prefix maxima of f2.
std::vector<std::size_t> pareto_indices_2d(const Eigen::MatrixXd& f, double eps) {
  const auto n = static_cast<std::size_t>(f.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f(a, 0) != f(b, 0)) return f(a, 0) > f(b, 0);
    return a < b;
  });
  std::vector<double> prefix_max(n + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) prefix_max[i + 1] = std::max(prefix_max[i], f(order[i], 1));

  std::vector<std::size_t> keep;
  // `bar` is non-increasing along `order`, so both cut points only move forward.
  std::size_t gt = 0, ge = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t p = order[pos];
    const double bar1 = f(p, 0) + eps;
    const double bar2 = f(p, 1) + eps;
    while (gt < n && f(order[gt], 0) > bar1) ++gt;
    if (ge < gt) ge = gt;
    while (ge < n && f(order[ge], 0) >= bar1) ++ge;
    const bool dominated = prefix_max[gt] >= bar2 || prefix_max[ge] > bar2;
    if (!dominated) keep.push_back(p);
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace

std::vector<std::size_t> pareto_indices(const Eigen::MatrixXd& objectives, double tolerance) {
  if (tolerance < 0.0) throw InputError("pareto_front: tolerance must be non-negative");
  const auto n = static_cast<std::size_t>(objectives.rows());
  if (n == 0) return {};
  if (objectives.cols() == 2) return pareto_indices_2d(objectives, tolerance);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd p = objectives.row(static_cast<Eigen::Index>(i)).transpose();
    bool dominated = false;
    for (std::size_t j = 0; j < n && !dominated; ++j)
      dominated = j != i && eps_dominates(objectives.row(static_cast<Eigen::Index>(j)).transpose(), p, tolerance);
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

ParetoFront pareto_front(const std::vector<FrontPoint>& points, double tolerance) {
  ParetoFront front;
  front.tolerance = tolerance;
  if (points.empty()) return front;
  const auto K = points.front().objectives.size();
  Eigen::MatrixXd f(static_cast<Eigen::Index>(points.size()), K);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].objectives.size() != K) throw InputError("pareto_front: inconsistent objective count");
    f.row(static_cast<Eigen::Index>(i)) = points[i].objectives.transpose();
  }
  for (auto i : pareto_indices(f, tolerance)) front.points.push_back(points[i]);
  return front;
}

ParetoFront pareto_front(const Eigen::MatrixXd& objectives, const Eigen::MatrixXd& inputs,
                         double tolerance) {
  if (inputs.rows() != 0 && inputs.rows() != objectives.rows())
    throw InputError("pareto_front: inputs and objectives differ in length");
  ParetoFront front;
  front.tolerance = tolerance;
  for (auto i : pareto_indices(objectives, tolerance)) {
    const auto r = static_cast<Eigen::Index>(i);
    FrontPoint fp{objectives.row(r).transpose(), Point()};
    if (inputs.rows() != 0) fp.input = inputs.row(r).transpose();
    front.points.push_back(std::move(fp));
  }
  return front;
}

namespace {

// Distance from each point of `from` to its nearest point of `to`.
std::vector<double> nearest_distances(const ParetoFront& from, const ParetoFront& to) {
  if (from.empty() || to.empty()) throw InputError("front metrics: fronts must be non-empty");
  if (from.num_objectives() != to.num_objectives())
    throw InputError("front metrics: objective counts differ");
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& a : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : to.points) best = std::min(best, (a.objectives - b.objectives).norm());
    out.push_back(best);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double generational_distance(const ParetoFront& approx, const ParetoFront& truth) {
  return mean(nearest_distances(approx, truth));
}

double inverted_generational_distance(const ParetoFront& approx, const ParetoFront& truth) {
  return mean(nearest_distances(truth, approx));
}

double maximum_pareto_front_error(const ParetoFront& approx, const ParetoFront& truth) {
  const auto d = nearest_distances(approx, truth);
  return *std::max_element(d.begin(), d.end());
}

FrontMetrics front_metrics(const ParetoFront& approx, const ParetoFront& truth) {
  const auto forward = nearest_distances(approx, truth);
  const auto backward = nearest_distances(truth, approx);
  return {mean(forward), mean(backward), *std::max_element(forward.begin(), forward.end())};
}

}  // namespace snake
