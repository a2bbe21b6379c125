#pragma once

#include "ppdsc/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace ppdsc::clustering {

struct KMeansConfig {
  int restarts = 50;
  int max_iters = 100;
  double tol = 1e-8;  // relative objective change that counts as converged

  void validate() const {
    if (restarts < 1 || max_iters < 1 || !(tol > 0.0))
      throw std::invalid_argument("kmeans config: restarts, max_iters >= 1 and tol > 0");
  }
};

struct ClusterResult {
  std::vector<int> labels;  // 0-based, length n
  Matrix centroids;         // K × d
  double objective = 0.0;   // sum of squared point-to-centroid distances
};

namespace detail {

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm with
/// potentials, O(K^3)). Returns row -> column.
inline std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n < 1) throw dimension_error("hungarian: square matrix required");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return assignment;
}

inline Eigen::Index nearest_centroid(const Matrix& centroids, const Eigen::RowVectorXd& x) {
  Eigen::Index best = 0;
  double best_d = (x - centroids.row(0)).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = (x - centroids.row(c)).squaredNorm();
    if (d < best_d) {  // ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the chosen set. Degenerate all-zero weights fall back to the
/// lowest unused index.
inline Matrix kmeanspp_init(const Matrix& rows, int k, rng::engine& g) {
  const auto n = rows.rows();
  Matrix centroids(k, rows.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  auto take = [&](Eigen::Index idx, int c) {
    centroids.row(c) = rows.row(idx);
    chosen[static_cast<std::size_t>(idx)] = 1;
  };
  take(std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(rng::unit_double(g) * n)), 0);
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (rows.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index idx = -1;
    if (total > 0.0) {
      const double target = rng::unit_double(g) * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum > target && d2(i) > 0.0) {
          idx = i;
          break;
        }
      }
      if (idx < 0) {  // numerical tail: farthest point
        d2.maxCoeff(&idx);
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) {
          idx = i;
          break;
        }
      if (idx < 0) idx = 0;
    }
    take(idx, c);
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (rows.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

/// One Lloyd run from a k-means++ start. The objective is non-increasing
/// across iterations; an empty cluster steals the point farthest from its
/// stale centroid (donor clusters must keep at least one member).
inline ClusterResult lloyd_once(const Matrix& rows, int k, int max_iters, double tol,
                                rng::engine& g) {
  const auto n = rows.rows();
  Matrix centroids = kmeanspp_init(rows, k, g);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  double prev = std::numeric_limits<double>::infinity();
  double objective = prev;
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = nearest_centroid(centroids, rows.row(i));
      labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<char> moved(static_cast<std::size_t>(n), 0);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
        if (moved[static_cast<std::size_t>(i)] || counts[owner] <= 1) continue;
        const double d = (rows.row(i) - centroids.row(c)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) continue;  // nothing to steal; keep the cluster empty
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      moved[static_cast<std::size_t>(far)] = 1;
    }
    centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
      centroids.row(labels[static_cast<std::size_t>(i)]) += rows.row(i);
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      objective += (rows.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    if (std::isfinite(prev) && prev - objective <= tol * prev) break;
    prev = objective;
  }
  return ClusterResult{std::move(labels), std::move(centroids), objective};
}

}  // namespace detail

/// Best-of-restarts Lloyd's algorithm with k-means++ seeding. Restart r draws
/// from the substream derive(seed, r); ties keep the earliest restart.
inline ClusterResult kmeans(const Matrix& rows, int k, const KMeansConfig& config,
                            std::uint64_t seed) {
  config.validate();
  if (k < 1) throw dimension_error("kmeans: K must be >= 1");
  if (rows.rows() < k) throw dimension_error("kmeans: fewer points than clusters");
  ClusterResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    rng::engine g(rng::derive(seed, static_cast<std::uint64_t>(r)));
    ClusterResult cur = detail::lloyd_once(rows, k, config.max_iters, config.tol, g);
    if (cur.objective < best.objective) best = std::move(cur);
  }
  return best;
}

/// Fraction of nodes mislabelled under the best label permutation, found by
/// maximum-agreement assignment on the confusion matrix.
inline double misclassification_rate(const std::vector<int>& predicted,
                                     const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw dimension_error("misclassification_rate: label vectors must match and be nonempty");
  int k = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0)
      throw dimension_error("misclassification_rate: label out of range");
    k = std::max({k, predicted[i] + 1, truth[i] + 1});
  }
  Matrix confusion = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < predicted.size(); ++i)
    confusion(predicted[i], truth[i]) += 1.0;
  const std::vector<int> perm = detail::hungarian(-confusion);
  double agree = 0.0;
  for (int a = 0; a < k; ++a) agree += confusion(a, perm[static_cast<std::size_t>(a)]);
  return 1.0 - agree / static_cast<double>(predicted.size());
}

}  // namespace ppdsc::clustering
