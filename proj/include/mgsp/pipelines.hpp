#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgsp/convolution.hpp"
#include "mgsp/graph_builders.hpp"
#include "mgsp/image.hpp"
#include "mgsp/sampling.hpp"

namespace mgsp {

struct Metrics {
  double mse = 0;
  double psnr = 0;  // dB against peak 1.0, capped at 999
};

Metrics metrics(const Eigen::MatrixXd& original, const Eigen::MatrixXd& recovered);
Metrics metrics(const RgbImage& original, const RgbImage& recovered);

// --- compression -----------------------------------------------------------

/// Methods: "MLN-EIG" (orthogonal-CP basis), "MLN-HOSVD", "GFT" (per-layer
/// pixel-grid transform, budget split evenly across layers, remainder to the
/// earlier layers), "GFT2" (separate frame and pixel-grid transforms).  All
/// of them run on the Laplacian representation of their graphs.

struct CompressionOptions {
  std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  Ordering ordering = Ordering::byCoefficientEnergy;
  Direction direction = Direction::blockWise;
  Index blockLayers = 0;  // 0 = all layers
  int cpMaxIter = 100;
  double cpTol = 1e-8;
  int jobs = 1;
};

struct CompressionEntry {
  std::string method;
  double fraction = 0;
  double mse = 0;
  double psnr = 0;
};

struct RecoveredImage {
  std::string method;
  double fraction = 0;
  RgbImage image;
};

struct PayloadRecord {
  std::string method;
  double fraction = 0;
  std::string basisKind;
  SamplingPlan plan;
  std::vector<SampleResult<double>::Coefficient> kept;
};

struct CompressionReport {
  std::vector<CompressionEntry> entries;      // method-major, fraction-minor
  std::vector<RecoveredImage> recovered;
  std::vector<PayloadRecord> payloads;        // plan-based methods only
  double cpResidual = -1;                     // set when MLN-EIG ran
  int cpIterations = 0;
};

CompressionReport compressRgb(const RgbImage& img, const std::vector<std::string>& methods,
                              const CompressionOptions& options);

// --- edge detection ---------------------------------------------------------

struct EdgePanel {
  Eigen::MatrixXi mlgC1, mlgC2, gsp, sobel, prewitt;  // 0/1 maps
  Eigen::MatrixXd diffC1, diffC2;                     // |luma - smoothed|
};

Eigen::MatrixXd sobelMagnitude(const Eigen::MatrixXd& gray);
Eigen::MatrixXd prewittMagnitude(const Eigen::MatrixXd& gray);

/// Five labeled maps over one image: window-MLG convolution with kernels c1
/// and c2, the single-layer variant on luma, and Sobel/Prewitt magnitudes,
/// all thresholded by the same policy.
EdgePanel edgeDetectPipeline(const RgbImage& img, const WindowSpec& spec,
                             const ThresholdPolicy& policy);

// --- segmentation -----------------------------------------------------------

/// Count of leading singular values before the largest consecutive gap
/// (ties to the earliest gap).
Index singularGapSelect(const Eigen::VectorXd& values);

/// 0/1 map of pixels whose 4-neighborhood crosses a label boundary.
Eigen::MatrixXi boundaryMap(const Eigen::MatrixXi& labels);

/// Fraction of pixels whose boundary status agrees within `tolerance`
/// pixels (Chebyshev): a boundary pixel counts as matched when the other
/// map has a boundary pixel within that radius.
double boundaryAccuracy(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth,
                        Index tolerance = 1);

struct SegmentationOptions {
  int layers = 10;        // M: band clusters
  Index superpixels = 100; // N
  int classes = 2;        // Q
  std::uint64_t seed = 42;
  GaussianMlgOptions graph;
  int kmeansRestarts = 20;
};

struct SegmentationResult {
  std::string method;
  Eigen::MatrixXi labelMap;    // H x W, values 1..Q
  Eigen::MatrixXi boundaries;  // 0/1
};

struct HsiSegmentation {
  SegmentationResult mgsp;        // entity-basis spectral clustering
  SegmentationResult gsp;         // single-layer spectral clustering
  SegmentationResult kmeansOnly;  // k-means on superpixel features
  Index spectralRank = 0;         // P picked by the singular gap
  Eigen::VectorXd singularValues; // entity singular values of the MLG
  SuperpixelMap superpixelMap;
  LayerClustering clustering;
};

/// Unsupervised cube segmentation: band clustering into layers, superpixel
/// entities, Gaussian MLG, entity basis via tensor decomposition, k-means on
/// the leading P basis rows; plus single-layer-graph and plain k-means
/// baselines over the same superpixels.
HsiSegmentation segmentHsi(const ImageCube& cube, const SegmentationOptions& options);

}  // namespace mgsp
