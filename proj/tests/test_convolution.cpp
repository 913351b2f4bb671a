#include <doctest.h>

#include <random>

#include "mgsp/convolution.hpp"
#include "mgsp/graph_builders.hpp"
#include "mgsp/pipelines.hpp"
#include "helpers.hpp"

using namespace mgsp;
using Eigen::MatrixXd;

namespace {

RgbImage constantImage(Index h, Index w, double v) {
  RgbImage img;
  img.r = MatrixXd::Constant(h, w, v);
  img.g = MatrixXd::Constant(h, w, v);
  img.b = MatrixXd::Constant(h, w, v);
  return img;
}

}  // namespace

TEST_CASE("localization kernels place unit weights at the window center") {
  const MatrixXd c1 = makeLocalizationKernel<double>(3, 3, KernelVariant::c1);
  REQUIRE(c1.rows() == 3);
  REQUIRE(c1.cols() == 9);
  CHECK(c1.sum() == 1.0);
  CHECK(c1(1, 4) == 1.0);
  CHECK((c1.array() != 0.0).count() == 1);

  const MatrixXd c2 = makeLocalizationKernel<double>(3, 3, KernelVariant::c2);
  CHECK(c2.sum() == 3.0);
  CHECK((c2.array() != 0.0).count() == 3);
  for (Index a = 0; a < 3; ++a) CHECK(c2(a, 4) == 1.0);

  CHECK_THROWS_AS(makeLocalizationKernel<double>(4, 3, KernelVariant::c1), ShapeError);
  CHECK_THROWS_AS(makeLocalizationKernel<double>(-1, 3, KernelVariant::c1), ShapeError);
  CHECK_THROWS_AS(makeLocalizationKernel<double>(3, 0, KernelVariant::c1), ShapeError);
}

TEST_CASE("convolving with the spectral identity returns the signal") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  const MatrixXd ones = MatrixXd::Ones(3, 9);
  const MatrixXd identityKernel = imgft(ones, basis);

  std::mt19937_64 rng(11);
  const MatrixXd x = testing::randomSignal(3, 9, rng);
  CHECK(((mlgConvolve(x, identityKernel, basis) - x).cwiseAbs().maxCoeff()) < 1e-12);

  const MatrixXd zero = MatrixXd::Zero(3, 9);
  CHECK(mlgConvolve(zero, identityKernel, basis).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral convolution is commutative and linear") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd x1 = testing::randomSignal(3, 9, rng);
    const MatrixXd x2 = testing::randomSignal(3, 9, rng);
    const MatrixXd y = testing::randomSignal(3, 9, rng);
    CHECK((mlgConvolve(x1, y, basis) - mlgConvolve(y, x1, basis)).cwiseAbs().maxCoeff() <
          1e-12);
    const MatrixXd lhs = mlgConvolve(MatrixXd(2.0 * x1 - 0.5 * x2), y, basis);
    const MatrixXd rhs =
        2.0 * mlgConvolve(x1, y, basis) - 0.5 * mlgConvolve(x2, y, basis);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("single-layer convolution matches the matrix filtering form") {
  // 5-node path graph: 1x5 grid with one layer.
  const auto g = gridMlg<double>(1, 5, 1, Representation::laplacian);
  const SpectralBasis<double> basis = hosvd(g.tensor()).basis;
  const MatrixXd v = basis.entityBasis;

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd x = testing::randomSignal(1, 5, rng);
    const MatrixXd y = testing::randomSignal(1, 5, rng);
    const Eigen::VectorXd yHat = v.transpose() * y.transpose();
    const Eigen::VectorXd filtered = v * yHat.asDiagonal() * v.transpose() * x.transpose();
    const MatrixXd conv = mlgConvolve(x, y, basis);
    CHECK((conv.transpose() - filtered).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("smoothing a 3x3 image matches a hand-rolled center-window oracle") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  const MatrixXd kernel = makeLocalizationKernel<double>(3, 3, KernelVariant::c1);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  RgbImage img;
  img.r.resize(3, 3);
  img.g.resize(3, 3);
  img.b.resize(3, 3);
  for (Index y = 0; y < 3; ++y)
    for (Index x = 0; x < 3; ++x) {
      img.r(y, x) = uni(rng);
      img.g(y, x) = uni(rng);
      img.b(y, x) = uni(rng);
    }

  WindowSpec spec;
  const MatrixXd out = smoothImage(img, spec, KernelVariant::c1, basis);
  REQUIRE(out.rows() == 3);
  REQUIRE(out.cols() == 3);

  // Center window: the full image, no replication.  Explicit index loops
  // for the transform pair, independent of the library's matrix products.
  MatrixXd sig(3, 9);
  for (Index y = 0; y < 3; ++y)
    for (Index x = 0; x < 3; ++x) {
      sig(0, y * 3 + x) = img.r(y, x);
      sig(1, y * 3 + x) = img.g(y, x);
      sig(2, y * 3 + x) = img.b(y, x);
    }
  const auto transform = [&](const MatrixXd& s) {
    MatrixXd hat = MatrixXd::Zero(3, 9);
    for (Index a = 0; a < 3; ++a)
      for (Index i = 0; i < 9; ++i)
        for (Index b = 0; b < 3; ++b)
          for (Index j = 0; j < 9; ++j)
            hat(a, i) += basis.layerBasis(b, a) * s(b, j) * basis.entityBasis(j, i);
    return hat;
  };
  const MatrixXd prod = transform(sig).cwiseProduct(transform(kernel));
  double mean = 0;
  for (Index a = 0; a < 3; ++a)
    for (Index i = 0; i < 9; ++i) {
      double val = 0;
      for (Index b = 0; b < 3; ++b)
        for (Index j = 0; j < 9; ++j)
          val += basis.layerBasis(a, b) * prod(b, j) * basis.entityBasis(i, j);
      mean += val;
    }
  mean /= 27.0;
  CHECK(out(1, 1) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("smoothing keeps input dims at stride 1 and subsamples at stride 2") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  RgbImage img;
  img.r.resize(5, 7);
  img.g.resize(5, 7);
  img.b.resize(5, 7);
  for (Index y = 0; y < 5; ++y)
    for (Index x = 0; x < 7; ++x) {
      img.r(y, x) = uni(rng);
      img.g(y, x) = uni(rng);
      img.b(y, x) = uni(rng);
    }

  WindowSpec dense;
  const MatrixXd full = smoothImage(img, dense, KernelVariant::c2, basis);
  REQUIRE(full.rows() == 5);
  REQUIRE(full.cols() == 7);

  WindowSpec coarse;
  coarse.stride = 2;
  const MatrixXd sub = smoothImage(img, coarse, KernelVariant::c2, basis);
  REQUIRE(sub.rows() == 3);
  REQUIRE(sub.cols() == 4);
  for (Index y = 0; y < sub.rows(); ++y)
    for (Index x = 0; x < sub.cols(); ++x) CHECK(sub(y, x) == full(2 * y, 2 * x));
}

TEST_CASE("smoothing a constant image yields an exactly constant image") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  const RgbImage img = constantImage(6, 6, 0.37);
  WindowSpec spec;
  for (const auto variant : {KernelVariant::c1, KernelVariant::c2}) {
    const MatrixXd out = smoothImage(img, spec, variant, basis);
    for (Index y = 0; y < out.rows(); ++y)
      for (Index x = 0; x < out.cols(); ++x) CHECK(out(y, x) == out(0, 0));
  }
}

TEST_CASE("smoothing validates window and image shapes") {
  const SpectralBasis<double> basis = windowBasis(3, 3);
  WindowSpec spec;
  CHECK_THROWS_AS(smoothImage(constantImage(2, 5, 0.1), spec, KernelVariant::c1, basis),
                  ShapeError);
  spec.k = 4;
  CHECK_THROWS_AS(smoothImage(constantImage(6, 6, 0.1), spec, KernelVariant::c1, basis),
                  ShapeError);
  spec.k = 3;
  spec.stride = 0;
  CHECK_THROWS_AS(smoothImage(constantImage(6, 6, 0.1), spec, KernelVariant::c1, basis),
                  ShapeError);

  std::vector<MatrixXd> ragged{MatrixXd::Zero(4, 4), MatrixXd::Zero(4, 5)};
  WindowSpec ok;
  const SpectralBasis<double> basis2 = windowBasis(3, 2);
  CHECK_THROWS_AS(smoothImage(ragged, ok, MatrixXd::Zero(2, 9), basis2), ShapeError);
}

TEST_CASE("threshold policies resolve as documented") {
  MatrixXd diff(2, 2);
  diff << 0, 1, 2, 3;

  ThresholdPolicy fixed;
  fixed.kind = ThresholdPolicy::Kind::fixedValue;
  fixed.value = 0.0;
  const Eigen::MatrixXi all = detectEdges(MatrixXd::Zero(2, 2), -diff, fixed);
  CHECK(all.sum() == 3);  // strictly greater: the zero pixel stays off

  ThresholdPolicy median;
  median.kind = ThresholdPolicy::Kind::percentile;
  median.value = 50.0;
  CHECK(resolveThreshold(diff, median) == 1.0);

  ThresholdPolicy top;
  top.kind = ThresholdPolicy::Kind::percentile;
  top.value = 100.0;
  CHECK(resolveThreshold(diff, top) == 3.0);

  ThresholdPolicy bottom;
  bottom.kind = ThresholdPolicy::Kind::percentile;
  bottom.value = 0.0;
  CHECK(resolveThreshold(diff, bottom) == 0.0);

  ThresholdPolicy bad;
  bad.kind = ThresholdPolicy::Kind::percentile;
  bad.value = 101.0;
  CHECK_THROWS_AS(resolveThreshold(diff, bad), ShapeError);

  // Otsu separates a heavy zero class from two large outliers.
  MatrixXd bimodal(2, 4);
  bimodal << 0, 0, 0, 0.9, 0, 0, 0, 1.0;
  ThresholdPolicy otsu;
  otsu.kind = ThresholdPolicy::Kind::otsu;
  const double thr = resolveThreshold(bimodal, otsu);
  CHECK(thr > 0.0);
  CHECK(thr < 0.9);
  // Constant difference map: threshold lands on the value, nothing passes.
  CHECK(resolveThreshold(MatrixXd::Constant(3, 3, 0.4), otsu) == 0.4);
}

TEST_CASE("edge maps are empty when smoothing reproduces the gray image") {
  MatrixXd gray(3, 3);
  gray << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9;
  ThresholdPolicy fixed;
  fixed.kind = ThresholdPolicy::Kind::fixedValue;
  fixed.value = 1e-9;
  CHECK(detectEdges(gray, gray, fixed).sum() == 0);
  CHECK_THROWS_AS(detectEdges(gray, MatrixXd::Zero(2, 2), fixed), ShapeError);
}

TEST_CASE("two-tone images flag edges only near the step") {
  const Index h = 12, w = 12;
  RgbImage img = constantImage(h, w, 0.0);
  for (Index y = 0; y < h; ++y)
    for (Index x = 6; x < w; ++x) {
      img.r(y, x) = 1.0;
      img.g(y, x) = 1.0;
      img.b(y, x) = 1.0;
    }
  WindowSpec spec;
  // Interior windows on either side of the step see identical content, so
  // their differences form exact tie blocks; a percentile threshold landing
  // inside the plateau block keeps only the strictly-larger boundary pixels.
  ThresholdPolicy policy;
  policy.kind = ThresholdPolicy::Kind::percentile;
  policy.value = 80.0;
  const EdgePanel panel = edgeDetectPipeline(img, spec, policy);

  // Step between columns 5 and 6.
  for (const auto* map : {&panel.mlgC1, &panel.mlgC2, &panel.gsp, &panel.sobel,
                          &panel.prewitt}) {
    CHECK(map->sum() > 0);
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x)
        if ((*map)(y, x) == 1) CHECK((x >= 5 && x <= 6));
  }
  for (Index y = 0; y < h; ++y) {
    CHECK(panel.mlgC1.row(y).segment(5, 2).sum() > 0);
    CHECK(panel.mlgC2.row(y).segment(5, 2).sum() > 0);
  }
  CHECK(panel.diffC1.rows() == h);
  CHECK(panel.diffC2.cols() == w);
}
