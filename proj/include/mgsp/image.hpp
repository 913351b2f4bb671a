#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mgsp/errors.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp {

/// RGB raster with channel planes in [0, 1], each H x W.
struct RgbImage {
  Eigen::MatrixXd r, g, b;

  Index height() const { return r.rows(); }
  Index width() const { return r.cols(); }
};

/// Multiband raster (e.g. a hyperspectral cube): one H x W plane per band.
/// Values are whatever the source stored; loaders do not rescale.
struct ImageCube {
  std::vector<Eigen::MatrixXd> bands;

  Index height() const { return bands.empty() ? 0 : bands.front().rows(); }
  Index width() const { return bands.empty() ? 0 : bands.front().cols(); }
  Index bandCount() const { return static_cast<Index>(bands.size()); }
};

/// Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B.
Eigen::MatrixXd luma(const RgbImage& img);

Eigen::MatrixXd bandMean(const ImageCube& cube);

/// 3 x (H*W) signal with layers R,G,B and entities in row-major pixel order.
Eigen::MatrixXd imageToSignal(const RgbImage& img);
RgbImage signalToImage(const Eigen::MatrixXd& s, Index height, Index width);

// --- file IO ------------------------------------------------------------
// PNG (8/16-bit gray/palette/RGB/RGBA collapse to 8-bit RGB in [0,1]) and
// binary PPM (P6).  Writers emit fixed settings so identical inputs yield
// byte-identical files.

RgbImage loadRgbImage(const std::string& path);
void savePng(const std::string& path, const RgbImage& img);
void savePngGray(const std::string& path, const Eigen::MatrixXd& gray);
void savePpm(const std::string& path, const RgbImage& img);
void savePgm(const std::string& path, const Eigen::MatrixXd& gray);

/// Binary 0/1 mask as an 8-bit PNG (0 or 255).
void savePngMask(const std::string& path, const Eigen::MatrixXi& mask);

/// Label map rendered through a fixed categorical palette (labels >= 1;
/// 0 renders black).
void savePngLabels(const std::string& path, const Eigen::MatrixXi& labels);

/// CSV cube: header line "height,width,bands", then one row per pixel in
/// row-major order with one column per band.
ImageCube loadCubeCsv(const std::string& path);
void saveCubeCsv(const std::string& path, const ImageCube& cube);

/// ENVI-style cube: text .hdr with samples/lines/bands/data type/interleave,
/// raw data file alongside.  Little-endian only; data types 4 (float32),
/// 5 (float64) and 12 (uint16) are accepted.
ImageCube loadCubeEnvi(const std::string& hdrPath);

/// Dispatch on extension: .hdr -> ENVI, anything else -> CSV.
ImageCube loadCube(const std::string& path);

/// Integer label raster as CSV (one row per image row).
Eigen::MatrixXi loadLabelsCsv(const std::string& path);
void saveLabelsCsv(const std::string& path, const Eigen::MatrixXi& labels);

}  // namespace mgsp
