#include "snake/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace snake {

Eigen::MatrixXd tour_cost_matrix(const std::vector<Point>& batch, const Point& current,
                                 const CostModel& cm) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n + 1, n + 1);
  auto node = [&](Eigen::Index i) -> const Point& { return i == 0 ? current : batch[i - 1]; };
  for (Eigen::Index i = 0; i <= n; ++i)
    for (Eigen::Index j = 0; j <= n; ++j)
      if (i != j) dist(i, j) = cm.transition_cost(node(i), node(j));
  return dist;
}

double open_tour_cost(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& order) {
  double c = 0.0;
  std::size_t prev = 0;
  for (auto i : order) {
    c += dist(prev, i + 1);
    prev = i + 1;
  }
  return c;
}

Tour nearest_neighbour_tour(const Eigen::MatrixXd& dist) {
  const auto n = static_cast<std::size_t>(dist.rows()) - 1;
  std::vector<bool> used(n, false);
  Tour t;
  std::size_t at = 0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!used[i] && (best == n || dist(at, i + 1) < dist(at, best + 1))) best = i;
    used[best] = true;
    t.order.push_back(best);
    at = best + 1;
  }
  t.cost = open_tour_cost(dist, t.order);
  return t;
}

namespace {

// Path representation: path[0] = 0 (start node), path[1..n] = node ids (batch index + 1).
class OpenTourSearch {
 public:
  OpenTourSearch(const Eigen::MatrixXd& dist, std::vector<std::size_t> path)
      : d_(dist), path_(std::move(path)), n_(path_.size() - 1) {
    symmetric_ = (dist - dist.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + dist.cwiseAbs().maxCoeff());
    cost_ = full_cost();
  }

  double cost() const { return cost_; }
  const std::vector<std::size_t>& path() const { return path_; }

  double full_cost() const {
    double c = 0.0;
    for (std::size_t k = 1; k <= n_; ++k) c += d_(path_[k - 1], path_[k]);
    return c;
  }

  // Reverse path[i..j], 1 <= i < j <= n.
  double two_opt_delta(std::size_t i, std::size_t j) const {
    if (!symmetric_) {
      auto copy = path_;
      std::reverse(copy.begin() + static_cast<long>(i), copy.begin() + static_cast<long>(j) + 1);
      return cost_of(copy) - cost_;
    }
    const auto a = path_[i - 1], b = path_[i], c = path_[j];
    double delta = d_(a, c) - d_(a, b);
    if (j < n_) {
      const auto e = path_[j + 1];
      delta += d_(b, e) - d_(c, e);
    }
    return delta;
  }
  void apply_two_opt(std::size_t i, std::size_t j, double delta) {
    std::reverse(path_.begin() + static_cast<long>(i), path_.begin() + static_cast<long>(j) + 1);
    cost_ += delta;
  }

  // Move the node at position i so it ends at position j (1 <= i, j <= n, i != j).
  double relocate_delta(std::size_t i, std::size_t j) const {
    if (!symmetric_) return cost_of(relocated(i, j)) - cost_;
    const auto x = path_[i];
    double delta = -d_(path_[i - 1], x);
    if (i < n_) delta += d_(path_[i - 1], path_[i + 1]) - d_(x, path_[i + 1]);
    // neighbours of x after insertion at position j of the reduced path
    auto reduced_at = [&](std::size_t k) { return k < i ? path_[k] : path_[k + 1]; };
    const auto before = reduced_at(j - 1);
    delta += d_(before, x);
    if (j < n_) {
      const auto after = reduced_at(j);
      delta += d_(x, after) - d_(before, after);
    }
    return delta;
  }
  void apply_relocate(std::size_t i, std::size_t j, double delta) {
    path_ = relocated(i, j);
    cost_ += delta;
  }

  // First-improvement 2-opt until no improving move (or pass cap).
  void local_search(int max_passes) {
    for (int pass = 0; pass < max_passes; ++pass) {
      bool improved = false;
      for (std::size_t i = 1; i < n_; ++i)
        for (std::size_t j = i + 1; j <= n_; ++j) {
          const double delta = two_opt_delta(i, j);
          if (delta < -1e-12) {
            apply_two_opt(i, j, delta);
            improved = true;
          }
        }
      if (!improved) break;
    }
    cost_ = full_cost();
  }

 private:
  double cost_of(const std::vector<std::size_t>& p) const {
    double c = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) c += d_(p[k - 1], p[k]);
    return c;
  }
  std::vector<std::size_t> relocated(std::size_t i, std::size_t j) const {
    auto p = path_;
    const auto x = p[i];
    p.erase(p.begin() + static_cast<long>(i));
    p.insert(p.begin() + static_cast<long>(j), x);
    return p;
  }

  const Eigen::MatrixXd& d_;
  std::vector<std::size_t> path_;
  std::size_t n_;
  bool symmetric_ = true;
  double cost_ = 0.0;
};

std::vector<std::size_t> to_path(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> p{0};
  for (auto i : order) p.push_back(i + 1);
  return p;
}

std::vector<std::size_t> to_order(const std::vector<std::size_t>& path) {
  std::vector<std::size_t> o;
  for (std::size_t k = 1; k < path.size(); ++k) o.push_back(path[k] - 1);
  return o;
}

}  // namespace

Tour solve_open_tour(const Eigen::MatrixXd& dist, const TspConfig& cfg) {
  const auto n = static_cast<std::size_t>(dist.rows()) - 1;
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  Tour best{identity, open_tour_cost(dist, identity)};
  if (n <= 1) return best;

  const Tour greedy = nearest_neighbour_tour(dist);
  OpenTourSearch search(dist, to_path(greedy.order));
  search.local_search(20);

  auto consider = [&best](std::vector<std::size_t> order, double cost) {
    if (cost < best.cost) best = {std::move(order), cost};
  };
  consider(greedy.order, greedy.cost);
  consider(to_order(search.path()), search.cost());

  double t0 = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      if (i != j) t0 += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  t0 /= static_cast<double>(n * (n - 1));
  const long proposals = std::min<long>(cfg.max_proposals, static_cast<long>(cfg.proposals_per_n2) *
                                                               static_cast<long>(n * n));
  if (t0 > 0.0 && proposals > 0) {
    const double cooling = std::pow(cfg.final_temperature_ratio, 1.0 / static_cast<double>(proposals));
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pos(1, n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double temperature = t0;
    std::vector<std::size_t> best_path = search.path();
    double best_cost = search.cost();
    for (long k = 0; k < proposals; ++k, temperature *= cooling) {
      std::size_t i = pos(rng), j = pos(rng);
      if (i == j) continue;
      const bool two_opt = unit(rng) < 0.5;
      if (two_opt && i > j) std::swap(i, j);
      const double delta = two_opt ? search.two_opt_delta(i, j) : search.relocate_delta(i, j);
      if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
        if (two_opt)
          search.apply_two_opt(i, j, delta);
        else
          search.apply_relocate(i, j, delta);
        if (search.cost() < best_cost - 1e-12) {
          best_cost = search.cost();
          best_path = search.path();
        }
      }
    }
    auto order = to_order(best_path);
    consider(order, open_tour_cost(dist, order));
  }
  return best;
}

std::vector<Point> order_batch(const std::vector<Point>& batch, const Point& current,
                               const CostModel& cm, const TspConfig& cfg) {
  if (batch.empty()) throw InputError("order_batch: batch must be non-empty");
  const Eigen::MatrixXd dist = tour_cost_matrix(batch, current, cm);
  const Tour tour = solve_open_tour(dist, cfg);
  std::vector<Point> out;
  out.reserve(batch.size());
  for (auto i : tour.order) out.push_back(batch[i]);
  return out;
}

}  // namespace snake
