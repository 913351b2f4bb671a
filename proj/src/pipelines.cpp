#include "mgsp/pipelines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <numeric>

#include "mgsp/kmeans.hpp"

namespace mgsp {

Metrics metrics(const Eigen::MatrixXd& original, const Eigen::MatrixXd& recovered) {
  if (original.rows() != recovered.rows() || original.cols() != recovered.cols())
    throw ShapeError("metrics: shapes differ");
  if (original.size() == 0) throw ShapeError("metrics: empty signal");
  Metrics m;
  m.mse = (original - recovered).squaredNorm() / static_cast<double>(original.size());
  m.psnr = m.mse > 0 ? std::min(999.0, 10.0 * std::log10(1.0 / m.mse)) : 999.0;
  return m;
}

Metrics metrics(const RgbImage& original, const RgbImage& recovered) {
  Eigen::MatrixXd a(original.height(), 3 * original.width());
  a << original.r, original.g, original.b;
  Eigen::MatrixXd b(recovered.height(), 3 * recovered.width());
  b << recovered.r, recovered.g, recovered.b;
  return metrics(a, b);
}

// --- compression -----------------------------------------------------------

namespace {

struct GftBaseline {
  Eigen::MatrixXd basis;       // pixel-grid Laplacian eigenvectors
  Eigen::VectorXd values;      // matching eigenvalues, |.| descending
};

GftBaseline pixelGridEigen(Index h, Index w) {
  const Eigen::MatrixXd lap =
      flatten(gridMlg<double>(h, w, 1, Representation::laplacian).tensor());
  auto [u, vals] = detail::sortedSymmetricEigen<double>(lap);
  return {std::move(u), std::move(vals)};
}

/// Per-layer transform coding: each layer gets K/M coefficients (remainder
/// to the earlier layers), picked by the requested ordering.
Eigen::MatrixXd gftReconstruct(const Eigen::MatrixXd& s, const GftBaseline& gft,
                               Ordering ordering, Index totalKeep) {
  const Index m = s.rows(), n = s.cols();
  const Eigen::MatrixXd coef = s * gft.basis;  // row a = basis^T s_a
  Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(m, n);
  for (Index a = 0; a < m; ++a) {
    Index quota = totalKeep / m + (a < totalKeep % m ? 1 : 0);
    quota = std::min(quota, n);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    if (ordering == Ordering::byCoefficientEnergy) {
      std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) {
        return std::abs(coef(a, p)) > std::abs(coef(a, q));
      });
    }  // bySpectralValue: the basis is already sorted by |eigenvalue|
    for (Index k = 0; k < quota; ++k)
      kept(a, order[static_cast<std::size_t>(k)]) = coef(a, order[static_cast<std::size_t>(k)]);
  }
  return kept * gft.basis.transpose();
}

std::string canonicalMethod(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (name == "MLN-EIG" || name == "MLN-HOSVD" || name == "GFT" || name == "GFT2")
    return name;
  throw std::invalid_argument("unsupported compression method '" + name + "'");
}

}  // namespace

CompressionReport compressRgb(const RgbImage& img, const std::vector<std::string>& methods,
                              const CompressionOptions& options) {
  const Index h = img.height(), w = img.width();
  if (h < 2 || w < 2) throw ShapeError("compressRgb: image too small");
  const Index n = h * w;
  if (3 * n > 6144)
    throw std::invalid_argument("compressRgb handles desk-scale images only (3*H*W <= 6144)");
  if (methods.empty()) throw std::invalid_argument("compressRgb: no methods given");
  for (const double f : options.fractions)
    if (!(f > 0.0) || f > 1.0)
      throw std::invalid_argument("compression fractions must lie in (0, 1]");

  std::vector<std::string> tags;
  tags.reserve(methods.size());
  for (const auto& m : methods) tags.push_back(canonicalMethod(m));

  const Eigen::MatrixXd s = imageToSignal(img);
  const bool needMln = std::find(tags.begin(), tags.end(), "MLN-HOSVD") != tags.end() ||
                       std::find(tags.begin(), tags.end(), "MLN-EIG") != tags.end();
  const bool needGrid = std::find(tags.begin(), tags.end(), "GFT") != tags.end() ||
                        std::find(tags.begin(), tags.end(), "GFT2") != tags.end();

  CompressionReport report;

  SpectralBasis<double> hosvdBasis, cpBasis;
  if (needMln) {
    const Tensor4<double> lap = gridMlg<double>(h, w, 3, Representation::laplacian).tensor();
    if (std::find(tags.begin(), tags.end(), "MLN-HOSVD") != tags.end())
      hosvdBasis = hosvd(lap).basis;
    if (std::find(tags.begin(), tags.end(), "MLN-EIG") != tags.end()) {
      const auto cp = orthogonalCp(lap, options.cpMaxIter, options.cpTol);
      cpBasis = cp.basis;
      report.cpResidual = cp.residual;
      report.cpIterations = cp.iterations;
    }
  }
  GftBaseline grid;
  SpectralBasis<double> gft2Basis;
  if (needGrid) {
    grid = pixelGridEigen(h, w);
    if (std::find(tags.begin(), tags.end(), "GFT2") != tags.end()) {
      // Frame graph: all three channels mutually linked.
      const Eigen::MatrixXd frameLap =
          flatten(gridMlg<double>(1, 1, 3, Representation::laplacian).tensor());
      auto [fu, fvals] = detail::sortedSymmetricEigen<double>(frameLap);
      gft2Basis.layerBasis = std::move(fu);
      gft2Basis.layerValues = std::move(fvals);
      gft2Basis.entityBasis = grid.basis;
      gft2Basis.entityValues = grid.values;
      gft2Basis.kind = BasisKind::hosvd;
    }
  }

  struct Cell {
    CompressionEntry entry;
    RecoveredImage rec;
    PayloadRecord payload;
    bool hasPayload = false;
  };

  const auto runOne = [&](const std::string& tag, double fraction) {
    Cell cell;
    cell.entry.method = tag;
    cell.entry.fraction = fraction;
    cell.rec.method = tag;
    cell.rec.fraction = fraction;
    Eigen::MatrixXd recovered;
    if (tag == "GFT") {
      const Index keep = static_cast<Index>(std::llround(fraction * static_cast<double>(3 * n)));
      recovered = gftReconstruct(s, grid, options.ordering, keep);
    } else {
      const SpectralBasis<double>* basis = tag == "MLN-HOSVD" ? &hosvdBasis
                                           : tag == "MLN-EIG" ? &cpBasis
                                                              : &gft2Basis;
      const SamplingPlan plan = planForFraction(s, *basis, options.ordering,
                                                options.direction, fraction,
                                                options.blockLayers);
      const auto res = spectralSample(s, *basis, plan);
      recovered = res.recovered;
      cell.payload.method = tag;
      cell.payload.fraction = fraction;
      cell.payload.basisKind = tag == "MLN-EIG" ? "cp" : tag == "MLN-HOSVD" ? "hosvd" : "gft2";
      cell.payload.plan = plan;
      cell.payload.kept = res.kept;
      cell.hasPayload = true;
    }
    cell.rec.image = signalToImage(recovered, h, w);
    const Metrics m = metrics(img, cell.rec.image);
    cell.entry.mse = m.mse;
    cell.entry.psnr = m.psnr;
    return cell;
  };

  for (const auto& tag : tags) {
    std::vector<Cell> cells(options.fractions.size());
    if (options.jobs > 1 && options.fractions.size() > 1) {
      std::vector<std::future<Cell>> futs;
      futs.reserve(options.fractions.size());
      for (const double f : options.fractions)
        futs.push_back(std::async(std::launch::async, runOne, tag, f));
      for (std::size_t k = 0; k < futs.size(); ++k) cells[k] = futs[k].get();
    } else {
      for (std::size_t k = 0; k < options.fractions.size(); ++k)
        cells[k] = runOne(tag, options.fractions[k]);
    }
    for (auto& cell : cells) {
      report.entries.push_back(cell.entry);
      report.recovered.push_back(std::move(cell.rec));
      if (cell.hasPayload) report.payloads.push_back(std::move(cell.payload));
    }
  }
  return report;
}

// --- edge detection ---------------------------------------------------------

namespace {

Eigen::MatrixXd gradientMagnitude(const Eigen::MatrixXd& gray, const Eigen::Matrix3d& gx) {
  const Eigen::Matrix3d gy = gx.transpose();
  const Index h = gray.rows(), w = gray.cols();
  Eigen::MatrixXd mag(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      double sx = 0, sy = 0;
      for (Index dy = -1; dy <= 1; ++dy)
        for (Index dx = -1; dx <= 1; ++dx) {
          const Index yy = std::clamp<Index>(y + dy, 0, h - 1);
          const Index xx = std::clamp<Index>(x + dx, 0, w - 1);
          sx += gx(dy + 1, dx + 1) * gray(yy, xx);
          sy += gy(dy + 1, dx + 1) * gray(yy, xx);
        }
      mag(y, x) = std::hypot(sx, sy);
    }
  return mag;
}

}  // namespace

Eigen::MatrixXd sobelMagnitude(const Eigen::MatrixXd& gray) {
  Eigen::Matrix3d gx;
  gx << -1, 0, 1, -2, 0, 2, -1, 0, 1;
  return gradientMagnitude(gray, gx);
}

Eigen::MatrixXd prewittMagnitude(const Eigen::MatrixXd& gray) {
  Eigen::Matrix3d gx;
  gx << -1, 0, 1, -1, 0, 1, -1, 0, 1;
  return gradientMagnitude(gray, gx);
}

EdgePanel edgeDetectPipeline(const RgbImage& img, const WindowSpec& spec,
                             const ThresholdPolicy& policy) {
  const Eigen::MatrixXd gray = luma(img);
  EdgePanel panel;

  const SpectralBasis<double> basis3 = windowBasis(spec.k, 3);
  const Eigen::MatrixXd smoothC1 = smoothImage(img, spec, KernelVariant::c1, basis3);
  const Eigen::MatrixXd smoothC2 = smoothImage(img, spec, KernelVariant::c2, basis3);
  panel.diffC1 = (gray - smoothC1).cwiseAbs();
  panel.diffC2 = (gray - smoothC2).cwiseAbs();
  panel.mlgC1 = detectEdges(gray, smoothC1, policy);
  panel.mlgC2 = detectEdges(gray, smoothC2, policy);

  const SpectralBasis<double> basis1 = windowBasis(spec.k, 1);
  const Eigen::MatrixXd kernel1 = makeLocalizationKernel<double>(spec.k, 1, KernelVariant::c1);
  const Eigen::MatrixXd smooth1 = smoothImage({gray}, spec, kernel1, basis1);
  panel.gsp = detectEdges(gray, smooth1, policy);

  const auto thresholdMap = [&](const Eigen::MatrixXd& mag) {
    const double thr = resolveThreshold(mag, policy);
    Eigen::MatrixXi out(mag.rows(), mag.cols());
    for (Index y = 0; y < mag.rows(); ++y)
      for (Index x = 0; x < mag.cols(); ++x) out(y, x) = mag(y, x) > thr ? 1 : 0;
    return out;
  };
  panel.sobel = thresholdMap(sobelMagnitude(gray));
  panel.prewitt = thresholdMap(prewittMagnitude(gray));
  return panel;
}

// --- segmentation -----------------------------------------------------------

Index singularGapSelect(const Eigen::VectorXd& values) {
  if (values.size() < 2)
    throw ShapeError("singularGapSelect needs at least two values");
  Index best = 0;
  double bestGap = values[0] - values[1];
  for (Index k = 1; k + 1 < values.size(); ++k) {
    const double gap = values[k] - values[k + 1];
    if (gap > bestGap) {
      bestGap = gap;
      best = k;
    }
  }
  return best + 1;
}

Eigen::MatrixXi boundaryMap(const Eigen::MatrixXi& labels) {
  const Index h = labels.rows(), w = labels.cols();
  Eigen::MatrixXi b = Eigen::MatrixXi::Zero(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if ((y > 0 && labels(y - 1, x) != labels(y, x)) ||
          (y + 1 < h && labels(y + 1, x) != labels(y, x)) ||
          (x > 0 && labels(y, x - 1) != labels(y, x)) ||
          (x + 1 < w && labels(y, x + 1) != labels(y, x)))
        b(y, x) = 1;
    }
  return b;
}

namespace {

Eigen::MatrixXi dilate(const Eigen::MatrixXi& mask, Index radius) {
  if (radius <= 0) return mask;
  const Index h = mask.rows(), w = mask.cols();
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      for (Index dy = -radius; dy <= radius; ++dy)
        for (Index dx = -radius; dx <= radius; ++dx) {
          const Index yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) out(yy, xx) = 1;
        }
    }
  return out;
}

}  // namespace

double boundaryAccuracy(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth,
                        Index tolerance) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw ShapeError("boundaryAccuracy: label maps differ in shape");
  if (predicted.size() == 0) throw ShapeError("boundaryAccuracy: empty maps");
  const Eigen::MatrixXi bp = boundaryMap(predicted), bt = boundaryMap(truth);
  const Eigen::MatrixXi dp = dilate(bp, tolerance), dt = dilate(bt, tolerance);
  Index mismatches = 0;
  for (Index y = 0; y < predicted.rows(); ++y)
    for (Index x = 0; x < predicted.cols(); ++x) {
      if (bp(y, x) && !dt(y, x)) ++mismatches;
      else if (bt(y, x) && !dp(y, x)) ++mismatches;
    }
  return 1.0 - static_cast<double>(mismatches) / static_cast<double>(predicted.size());
}

namespace {

Eigen::MatrixXi paintSuperpixels(const Eigen::MatrixXi& spLabels,
                                 const std::vector<int>& clusterOf) {
  Eigen::MatrixXi out(spLabels.rows(), spLabels.cols());
  for (Index y = 0; y < spLabels.rows(); ++y)
    for (Index x = 0; x < spLabels.cols(); ++x)
      out(y, x) = clusterOf[static_cast<std::size_t>(spLabels(y, x) - 1)] + 1;
  return out;
}

SegmentationResult makeResult(std::string method, const Eigen::MatrixXi& spLabels,
                              const std::vector<int>& clusterOf) {
  SegmentationResult r;
  r.method = std::move(method);
  r.labelMap = paintSuperpixels(spLabels, clusterOf);
  r.boundaries = boundaryMap(r.labelMap);
  return r;
}

}  // namespace

HsiSegmentation segmentHsi(const ImageCube& cube, const SegmentationOptions& options) {
  if (cube.bandCount() < 1) throw ShapeError("segmentHsi: empty cube");
  if (options.classes < 1) throw ShapeError("segmentHsi: classes must be >= 1");
  if (static_cast<Index>(options.classes) > options.superpixels)
    throw ShapeError("segmentHsi: more classes than superpixels");

  // Work on a globally min-max normalized copy so feature scales and the
  // Gaussian bandwidths are data-independent.
  ImageCube norm = cube;
  double lo = cube.bands[0].minCoeff(), hi = cube.bands[0].maxCoeff();
  for (const auto& b : cube.bands) {
    lo = std::min(lo, b.minCoeff());
    hi = std::max(hi, b.maxCoeff());
  }
  if (hi > lo)
    for (auto& b : norm.bands) b = ((b.array() - lo) / (hi - lo)).matrix();

  HsiSegmentation out;
  out.clustering = clusterFramesToLayers(norm, options.layers, options.seed);
  out.superpixelMap = computeSuperpixels(bandMean(norm), options.superpixels, options.seed);

  const auto graph = gaussianMlg(out.clustering, out.superpixelMap, options.graph);
  const auto h = hosvd(graph.tensor());
  out.singularValues = h.basis.entityValues;
  Index p = singularGapSelect(out.singularValues);
  p = std::clamp<Index>(p, std::min<Index>(options.classes, options.superpixels),
                        options.superpixels);
  out.spectralRank = p;

  KMeansOptions km;
  km.restarts = options.kmeansRestarts;

  {  // M-GSP: cluster superpixels by the leading entity-basis rows
    const Eigen::MatrixXd pts = h.basis.entityBasis.leftCols(p);
    const KMeansResult r = kmeans(pts, options.classes, options.seed, km);
    out.mgsp = makeResult("M-GSP", out.superpixelMap.labels, r.labels);
  }

  const Eigen::MatrixXd sig = superpixelLayerFeatures(out.clustering, out.superpixelMap);
  {  // GSP baseline: spectral clustering of a single-layer superpixel graph
    const Index n = options.superpixels;
    Eigen::MatrixXd feats(n, sig.rows() + 2);
    feats.leftCols(sig.rows()) = sig.transpose();
    feats.col(sig.rows()) = out.superpixelMap.features.col(1);
    feats.col(sig.rows() + 1) = out.superpixelMap.features.col(2);
    std::vector<double> dists;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        dists.push_back((feats.row(i) - feats.row(j)).norm());
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                     dists.end());
    double sigma = dists.empty() ? 1.0 : dists[dists.size() / 2];
    if (sigma <= 0) sigma = 1.0;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) {
          const double d = (feats.row(i) - feats.row(j)).norm();
          w(i, j) = std::exp(-(d * d) / (sigma * sigma));
        }
    Eigen::VectorXd deg = w.rowwise().sum();
    Eigen::VectorXd dinv = deg.array().max(1e-12).pow(-0.5);
    Eigen::MatrixXd lsym = Eigen::MatrixXd::Identity(n, n) -
                           dinv.asDiagonal() * w * dinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lsym);
    Eigen::MatrixXd embed = es.eigenvectors().leftCols(options.classes);
    for (Index i = 0; i < n; ++i) {
      const double len = embed.row(i).norm();
      if (len > 0) embed.row(i) /= len;
    }
    const KMeansResult r = kmeans(embed, options.classes, options.seed, km);
    out.gsp = makeResult("GSP", out.superpixelMap.labels, r.labels);
  }

  {  // plain k-means on the per-layer superpixel signals
    const KMeansResult r = kmeans(sig.transpose(), options.classes, options.seed, km);
    out.kmeansOnly = makeResult("k-means", out.superpixelMap.labels, r.labels);
  }
  return out;
}

}  // namespace mgsp
