#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/random.hpp"

namespace n2vrec {

struct KMeansOptions {
  std::size_t max_iterations = 300;
  /// Converged once no centroid moves farther than this.
  double tolerance = 1e-8;
  std::uint64_t seed = 1;
};

struct KMeansResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;  // k x dim
  /// Inertia after each assignment step, in order.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

namespace detail {

inline Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd centroids(k, points.cols());
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::size_t pick = uniform_index(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    centroids.row(c) = points.row(pick);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], (points.row(i) - centroids.row(c)).squaredNorm());
      total += best[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = uniform_index(rng, n);
      continue;
    }
    double target = uniform01(rng) * total;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= best[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm. Points are rows. Without `init` the centroids come from seeded k-means++.
/// An emptied cluster is re-seeded with the point farthest from its current centroid.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k,
                           const std::optional<Eigen::MatrixXd>& init = std::nullopt, const KMeansOptions& options = {}) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n) throw Error(ErrorKind::InvalidK, "k=" + std::to_string(k) + " with n=" + std::to_string(n));
  KMeansResult result;
  if (init) {
    if (static_cast<std::size_t>(init->rows()) != k || init->cols() != points.cols())
      throw Error(ErrorKind::InvalidArgument, "initial centroids have the wrong shape");
    result.centroids = *init;
  } else {
    Rng rng(mix_seed(options.seed, 0xC3));
    result.centroids = detail::kmeans_plus_plus(points, k, rng);
  }
  result.assignments.assign(n, 0);
  std::vector<double> dist2(n, 0.0);

  auto assign = [&] {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points.row(i) - result.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best_c = static_cast<int>(c);
        }
      }
      result.assignments[i] = best_c;
      dist2[i] = best_d;
      inertia += best_d;
    }
    return inertia;
  };

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    result.inertia_history.push_back(assign());
    result.iterations = it + 1;

    std::vector<std::size_t> sizes(k, 0);
    for (int a : result.assignments) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[result.assignments[i]] <= 1) continue;
        if (far == n || dist2[i] > dist2[far]) far = i;
      }
      if (far == n) continue;
      --sizes[result.assignments[far]];
      result.assignments[far] = static_cast<int>(c);
      dist2[far] = 0.0;
      sizes[c] = 1;
    }
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    for (std::size_t i = 0; i < n; ++i) next.row(result.assignments[i]) += points.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) next.row(c) /= static_cast<double>(sizes[c]);
      else next.row(c) = result.centroids.row(c);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, (next.row(c) - result.centroids.row(c)).norm());
    result.centroids = std::move(next);
    if (shift < options.tolerance) break;
  }
  const double final_inertia = assign();
  if (result.inertia_history.empty() || final_inertia != result.inertia_history.back())
    result.inertia_history.push_back(final_inertia);
  return result;
}

}  // namespace n2vrec
