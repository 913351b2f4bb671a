#pragma once

#include <cstdint>
#include <vector>

#include "mgsp/image.hpp"
#include "mgsp/mlg.hpp"

namespace mgsp {

/// Multilayer grid: each layer is the 4-neighbor lattice on rows x cols
/// pixels (entities in row-major order, unit weights); counterpart pixels in
/// different layers are linked with unit weight.
template <typename Scalar>
MultilayerGraph<Scalar> gridMlg(Index rows, Index cols, Index layers,
                                Representation rep = Representation::adjacency) {
  if (rows < 1 || cols < 1 || layers < 1)
    throw ShapeError("gridMlg: rows, cols and layers must be positive");
  const Index n = rows * cols;
  Tensor4<Scalar> t(layers, n);
  const auto node = [cols](Index y, Index x) { return y * cols + x; };
  for (Index a = 0; a < layers; ++a)
    for (Index y = 0; y < rows; ++y)
      for (Index x = 0; x < cols; ++x) {
        if (x + 1 < cols) {
          t(a, node(y, x), a, node(y, x + 1)) = Scalar(1);
          t(a, node(y, x + 1), a, node(y, x)) = Scalar(1);
        }
        if (y + 1 < rows) {
          t(a, node(y, x), a, node(y + 1, x)) = Scalar(1);
          t(a, node(y + 1, x), a, node(y, x)) = Scalar(1);
        }
      }
  for (Index a = 0; a < layers; ++a)
    for (Index b = 0; b < layers; ++b)
      if (a != b)
        for (Index i = 0; i < n; ++i) t(a, i, b, i) = Scalar(1);
  if (rep == Representation::laplacian)
    return MultilayerGraph<Scalar>::laplacian(buildLaplacian(t));
  return MultilayerGraph<Scalar>::adjacency(std::move(t));
}

/// Bands grouped into layer clusters by seeded k-means on the vectorized
/// frames; layerSignals holds the per-cluster mean frame.  Clusters are
/// renumbered by their lowest member band so labels are canonical.
struct LayerClustering {
  std::vector<int> assignment;              // band -> layer, 0-based
  std::vector<Eigen::MatrixXd> layerSignals;
};

LayerClustering clusterFramesToLayers(const ImageCube& cube, int layers,
                                      std::uint64_t seed);

/// SLIC-style superpixels on a single intensity plane: grid-seeded local
/// k-means on (y, x, intensity) features followed by connectivity cleanup.
/// Always yields exactly `count` 4-connected, nonempty regions labeled 1..count.
/// Deterministic; the seed only breaks pathological reseeding ties.
struct SuperpixelMap {
  Eigen::MatrixXi labels;    // H x W, values 1..count
  Eigen::MatrixXd features;  // count x 3: mean intensity, cx/W, cy/H
  Index count = 0;
};

SuperpixelMap computeSuperpixels(const Eigen::MatrixXd& intensity, Index count,
                                 std::uint64_t seed);

/// Per-(layer, superpixel) mean signal, layers x count.
Eigen::MatrixXd superpixelLayerFeatures(const LayerClustering& clustering,
                                        const SuperpixelMap& superpixels);

struct GaussianMlgOptions {
  double sigmaIntra = 0;       // 0 = median pairwise distance
  double sigmaInter = 0;       // 0 = median counterpart gap
  Index knn = 8;               // intralayer neighbors kept per node (0 = dense)
  bool crossEntityInterlayer = false;
};

/// Gaussian-weighted MLG over superpixels: intralayer weights
/// exp(-d^2/sigma^2) on (signal, centroid) features pruned to a symmetric
/// k-NN graph; interlayer weights couple counterpart superpixels through
/// their signal gap (optionally all pairs).  Entries lie in [0, 1] with a
/// zero diagonal.
MultilayerGraph<double> gaussianMlg(const LayerClustering& clustering,
                                    const SuperpixelMap& superpixels,
                                    const GaussianMlgOptions& options = {});

}  // namespace mgsp
