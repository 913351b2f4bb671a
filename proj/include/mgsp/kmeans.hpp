#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mgsp/errors.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp {

struct KMeansOptions {
  int maxIter = 300;
  double tol = 1e-6;  // stop when relative inertia improvement drops below
  int restarts = 1;
};

struct KMeansResult {
  std::vector<int> labels;   // 0-based cluster per point
  Eigen::MatrixXd centers;   // k x d
  double inertia = 0;
  int iterations = 0;
};

namespace detail {

inline Index weightedPick(const Eigen::VectorXd& weights, std::mt19937_64& rng) {
  const double total = weights.sum();
  if (!(total > 0)) return 0;
  std::uniform_real_distribution<double> u(0.0, total);
  double target = u(rng);
  for (Index k = 0; k < weights.size(); ++k) {
    target -= weights[k];
    if (target <= 0) return k;
  }
  return weights.size() - 1;
}

}  // namespace detail

/// Lloyd's algorithm over the rows of `points` (n x d) with k-means++
/// seeding.  Fully deterministic for a given seed: ties in assignment go to
/// the lowest cluster index, an emptied cluster is reseeded with the point
/// farthest from its center, and restarts consume the generator in order
/// (best inertia wins, earlier restart on ties).
inline KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                           KMeansOptions opts = {}) {
  const Index n = points.rows();
  if (k < 1) throw ShapeError("kmeans: k must be >= 1");
  if (n < k) throw ShapeError("kmeans: fewer points than clusters");

  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    // k-means++ seeding
    Eigen::MatrixXd centers(k, points.cols());
    {
      std::uniform_int_distribution<Index> first(0, n - 1);
      centers.row(0) = points.row(first(rng));
      Eigen::VectorXd d2 =
          (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
      for (int c = 1; c < k; ++c) {
        centers.row(c) = points.row(detail::weightedPick(d2, rng));
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
      }
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    double inertia = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.maxIter; ++iter) {
      // assignment
      double newInertia = 0;
      for (Index p = 0; p < n; ++p) {
        int bestC = 0;
        double bestD = (points.row(p) - centers.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d = (points.row(p) - centers.row(c)).squaredNorm();
          if (d < bestD) {
            bestD = d;
            bestC = c;
          }
        }
        labels[static_cast<std::size_t>(p)] = bestC;
        newInertia += bestD;
      }
      // update
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<Index> counts(static_cast<std::size_t>(k), 0);
      for (Index p = 0; p < n; ++p) {
        sums.row(labels[static_cast<std::size_t>(p)]) += points.row(p);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(p)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        } else {
          // Reseed an emptied cluster with the worst-fit point.
          Index farthest = 0;
          double worst = -1;
          for (Index p = 0; p < n; ++p) {
            const double d =
                (points.row(p) - centers.row(labels[static_cast<std::size_t>(p)])).squaredNorm();
            if (d > worst) {
              worst = d;
              farthest = p;
            }
          }
          centers.row(c) = points.row(farthest);
        }
      }
      if (newInertia <= 0 ||
          (std::isfinite(inertia) && inertia - newInertia < opts.tol * inertia)) {
        inertia = newInertia;
        ++iter;
        break;
      }
      inertia = newInertia;
    }
    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centers = std::move(centers);
      best.inertia = inertia;
      best.iterations = iter;
    }
  }
  return best;
}

}  // namespace mgsp
