#pragma once

#include <vector>

#include "mgsp/image.hpp"
#include "mgsp/spectra.hpp"

namespace mgsp {

/// Spectral convolution on a multilayer graph: transform both signals,
/// multiply entrywise, transform back.
template <typename Scalar>
MatrixX<Scalar> mlgConvolve(const MatrixX<Scalar>& x, const MatrixX<Scalar>& y,
                            const SpectralBasis<Scalar>& basis) {
  return imgft(MatrixX<Scalar>(mgft(x, basis).cwiseProduct(mgft(y, basis))), basis);
}

enum class KernelVariant { c1, c2 };

/// Localization kernel over a layers x (k*k) window signal.  Window nodes
/// are numbered row-major; the window center carries weight 1 in the middle
/// layer only (c1) or in every layer (c2).
template <typename Scalar>
MatrixX<Scalar> makeLocalizationKernel(Index k, Index layers, KernelVariant variant) {
  if (k < 1 || k % 2 == 0) throw ShapeError("kernel window size must be odd and positive");
  if (layers < 1) throw ShapeError("kernel needs at least one layer");
  MatrixX<Scalar> kernel = MatrixX<Scalar>::Zero(layers, k * k);
  const Index center = (k * k) / 2;
  if (variant == KernelVariant::c2)
    kernel.col(center).setOnes();
  else
    kernel(layers / 2, center) = Scalar(1);
  return kernel;
}

struct WindowSpec {
  Index k = 3;       // odd window side
  Index stride = 1;  // output keeps input dims at stride 1 (replicate border)
};

struct ThresholdPolicy {
  enum class Kind { fixedValue, percentile, otsu };
  Kind kind = Kind::percentile;
  double value = 95.0;  // threshold for fixedValue, percent rank otherwise
};

/// Spectral basis of the k x k pixel grid MLG (Laplacian representation)
/// with the given number of layers; shared by every window of an image.
SpectralBasis<double> windowBasis(Index k, Index layers);

/// Slides a layers x k x k window across the planes (replicate border),
/// convolves each window signal with the kernel on the window MLG, and
/// stores the mean of the convolved window.  All planes must share one
/// shape of at least k x k.
Eigen::MatrixXd smoothImage(const std::vector<Eigen::MatrixXd>& planes,
                            const WindowSpec& spec, const Eigen::MatrixXd& kernel,
                            const SpectralBasis<double>& basis);

/// RGB convenience: planes R,G,B with a 3-layer kernel variant.
Eigen::MatrixXd smoothImage(const RgbImage& img, const WindowSpec& spec,
                            KernelVariant variant, const SpectralBasis<double>& basis);

/// Threshold |gray - smoothed|; strictly-greater comparison so constant
/// regions (difference exactly at the threshold) stay off.
double resolveThreshold(const Eigen::MatrixXd& difference, const ThresholdPolicy& policy);
Eigen::MatrixXi detectEdges(const Eigen::MatrixXd& gray, const Eigen::MatrixXd& smoothed,
                            const ThresholdPolicy& policy);

}  // namespace mgsp
