#include "mgsp/convolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mgsp/graph_builders.hpp"

namespace mgsp {

SpectralBasis<double> windowBasis(Index k, Index layers) {
  if (k < 1 || k % 2 == 0) throw ShapeError("window size must be odd and positive");
  return hosvd(gridMlg<double>(k, k, layers, Representation::laplacian).tensor()).basis;
}

Eigen::MatrixXd smoothImage(const std::vector<Eigen::MatrixXd>& planes,
                            const WindowSpec& spec, const Eigen::MatrixXd& kernel,
                            const SpectralBasis<double>& basis) {
  const Index layers = static_cast<Index>(planes.size());
  if (layers == 0) throw ShapeError("smoothImage: no planes");
  const Index h = planes[0].rows(), w = planes[0].cols();
  for (const auto& p : planes)
    if (p.rows() != h || p.cols() != w)
      throw ShapeError("smoothImage: planes differ in shape");
  const Index k = spec.k;
  if (k < 1 || k % 2 == 0) throw ShapeError("smoothImage: window size must be odd");
  if (h < k || w < k) throw ShapeError("smoothImage: image smaller than the window");
  if (spec.stride < 1) throw ShapeError("smoothImage: stride must be >= 1");
  if (kernel.rows() != layers || kernel.cols() != k * k)
    throw ShapeError("smoothImage: kernel shape does not match window");
  if (basis.layerBasis.rows() != layers || basis.entityBasis.rows() != k * k)
    throw ShapeError("smoothImage: basis does not match window");

  const Eigen::MatrixXd kernelHat = mgft(kernel, basis);
  const Index r = k / 2;
  const Index oh = (h - 1) / spec.stride + 1;
  const Index ow = (w - 1) / spec.stride + 1;
  Eigen::MatrixXd out(oh, ow);
  Eigen::MatrixXd window(layers, k * k);
  for (Index oy = 0; oy < oh; ++oy)
    for (Index ox = 0; ox < ow; ++ox) {
      const Index y = oy * spec.stride, x = ox * spec.stride;
      for (Index wy = 0; wy < k; ++wy)
        for (Index wx = 0; wx < k; ++wx) {
          const Index sy = std::clamp<Index>(y + wy - r, 0, h - 1);
          const Index sx = std::clamp<Index>(x + wx - r, 0, w - 1);
          for (Index a = 0; a < layers; ++a)
            window(a, wy * k + wx) = planes[static_cast<std::size_t>(a)](sy, sx);
        }
      const Eigen::MatrixXd conv =
          imgft(Eigen::MatrixXd(mgft(window, basis).cwiseProduct(kernelHat)), basis);
      out(oy, ox) = conv.mean();
    }
  return out;
}

Eigen::MatrixXd smoothImage(const RgbImage& img, const WindowSpec& spec,
                            KernelVariant variant, const SpectralBasis<double>& basis) {
  const Eigen::MatrixXd kernel = makeLocalizationKernel<double>(spec.k, 3, variant);
  return smoothImage({img.r, img.g, img.b}, spec, kernel, basis);
}

double resolveThreshold(const Eigen::MatrixXd& difference, const ThresholdPolicy& policy) {
  const Index n = difference.size();
  if (n == 0) throw ShapeError("resolveThreshold: empty difference map");
  switch (policy.kind) {
    case ThresholdPolicy::Kind::fixedValue:
      return policy.value;
    case ThresholdPolicy::Kind::percentile: {
      if (policy.value < 0.0 || policy.value > 100.0)
        throw ShapeError("percentile must lie in [0, 100]");
      std::vector<double> v(difference.data(), difference.data() + n);
      const Index rank = std::clamp<Index>(
          static_cast<Index>(std::ceil(policy.value / 100.0 * static_cast<double>(n))) - 1,
          0, n - 1);
      std::nth_element(v.begin(), v.begin() + rank, v.end());
      return v[static_cast<std::size_t>(rank)];
    }
    case ThresholdPolicy::Kind::otsu:
      break;
  }
  // Otsu: maximize between-class variance over a 256-bin histogram.
  const double lo = difference.minCoeff(), hi = difference.maxCoeff();
  if (hi <= lo) return lo;
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  for (Index p = 0; p < n; ++p) {
    const int bin = std::min<int>(
        kBins - 1, static_cast<int>((difference(p) - lo) / (hi - lo) * kBins));
    hist[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double total = static_cast<double>(n);
  double sumAll = 0;
  for (int b = 0; b < kBins; ++b) sumAll += b * hist[static_cast<std::size_t>(b)];
  double wB = 0, sumB = 0, bestVar = -1;
  int bestBin = 0;
  for (int b = 0; b < kBins; ++b) {
    wB += hist[static_cast<std::size_t>(b)];
    if (wB == 0) continue;
    const double wF = total - wB;
    if (wF == 0) break;
    sumB += b * hist[static_cast<std::size_t>(b)];
    const double mB = sumB / wB, mF = (sumAll - sumB) / wF;
    const double var = wB * wF * (mB - mF) * (mB - mF);
    if (var > bestVar) {
      bestVar = var;
      bestBin = b;
    }
  }
  return lo + (bestBin + 1) * (hi - lo) / kBins;
}

Eigen::MatrixXi detectEdges(const Eigen::MatrixXd& gray, const Eigen::MatrixXd& smoothed,
                            const ThresholdPolicy& policy) {
  if (gray.rows() != smoothed.rows() || gray.cols() != smoothed.cols())
    throw ShapeError("detectEdges: plane shapes differ");
  const Eigen::MatrixXd diff = (gray - smoothed).cwiseAbs();
  const double thr = resolveThreshold(diff, policy);
  Eigen::MatrixXi edges(gray.rows(), gray.cols());
  for (Index y = 0; y < gray.rows(); ++y)
    for (Index x = 0; x < gray.cols(); ++x) edges(y, x) = diff(y, x) > thr ? 1 : 0;
  return edges;
}

}  // namespace mgsp
