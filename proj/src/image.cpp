#include "mgsp/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace mgsp {

namespace {

std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RgbImage fromInterleaved(const std::vector<std::uint8_t>& px, Index h, Index w) {
  RgbImage img;
  img.r.resize(h, w);
  img.g.resize(h, w);
  img.b.resize(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const std::size_t o = 3 * static_cast<std::size_t>(y * w + x);
      img.r(y, x) = px[o] / 255.0;
      img.g(y, x) = px[o + 1] / 255.0;
      img.b(y, x) = px[o + 2] / 255.0;
    }
  return img;
}

RgbImage loadPngFile(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);          // palette -> rgb, low-bit gray -> 8 bit
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const Index h = static_cast<Index>(png_get_image_height(png, info));
  const Index w = static_cast<Index>(png_get_image_width(png, info));
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(3 * w)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unexpected PNG layout in " + path);
  }
  data.resize(static_cast<std::size_t>(3 * h * w));
  rows.resize(static_cast<std::size_t>(h));
  for (Index y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = data.data() + 3 * y * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return fromInterleaved(data, h, w);
}

RgbImage loadPpmFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError(path + ": expected binary PPM (P6)");
  const auto nextInt = [&in, &path]() {
    // Skips whitespace and '#' comment lines between header fields.
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw IoError(path + ": bad PPM header");
    return static_cast<Index>(v);
  };
  const Index w = nextInt(), h = nextInt(), maxval = nextInt();
  if (maxval != 255) throw IoError(path + ": only maxval 255 PPM supported");
  in.get();  // single whitespace before the raster
  std::vector<std::uint8_t> data(static_cast<std::size_t>(3 * h * w));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw IoError(path + ": truncated PPM raster");
  return fromInterleaved(data, h, w);
}

void writePngRgb8(const std::string& path, Index h, Index w,
                  const std::vector<std::uint8_t>& data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG " + path);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index y = 0; y < h; ++y)
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(data.data() + 3 * y * w);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// 20-entry categorical palette for label maps.
constexpr std::array<std::array<std::uint8_t, 3>, 20> kPalette{{
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},
    {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
    {188, 189, 34},  {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
    {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {196, 156, 148},
    {247, 182, 210}, {199, 199, 199}, {219, 219, 141}, {158, 218, 229},
}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Eigen::MatrixXd luma(const RgbImage& img) {
  return 0.299 * img.r + 0.587 * img.g + 0.114 * img.b;
}

Eigen::MatrixXd bandMean(const ImageCube& cube) {
  if (cube.bands.empty()) throw ShapeError("bandMean: empty cube");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(cube.height(), cube.width());
  for (const auto& b : cube.bands) m += b;
  return m / static_cast<double>(cube.bandCount());
}

Eigen::MatrixXd imageToSignal(const RgbImage& img) {
  const Index h = img.height(), w = img.width();
  if (img.g.rows() != h || img.g.cols() != w || img.b.rows() != h || img.b.cols() != w)
    throw ShapeError("imageToSignal: channel planes differ in shape");
  Eigen::MatrixXd s(3, h * w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const Index i = y * w + x;
      s(0, i) = img.r(y, x);
      s(1, i) = img.g(y, x);
      s(2, i) = img.b(y, x);
    }
  return s;
}

RgbImage signalToImage(const Eigen::MatrixXd& s, Index height, Index width) {
  if (s.rows() != 3 || s.cols() != height * width)
    throw ShapeError("signalToImage: signal must be 3 x (height*width)");
  RgbImage img;
  img.r.resize(height, width);
  img.g.resize(height, width);
  img.b.resize(height, width);
  for (Index y = 0; y < height; ++y)
    for (Index x = 0; x < width; ++x) {
      const Index i = y * width + x;
      img.r(y, x) = s(0, i);
      img.g(y, x) = s(1, i);
      img.b(y, x) = s(2, i);
    }
  return img;
}

RgbImage loadRgbImage(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  std::array<char, 2> magic{};
  probe.read(magic.data(), 2);
  probe.close();
  if (magic[0] == '\x89' && magic[1] == 'P') return loadPngFile(path);
  if (magic[0] == 'P' && magic[1] == '6') return loadPpmFile(path);
  throw IoError(path + ": unsupported image format (expected PNG or P6 PPM)");
}

void savePng(const std::string& path, const RgbImage& img) {
  const Index h = img.height(), w = img.width();
  std::vector<std::uint8_t> data(static_cast<std::size_t>(3 * h * w));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const std::size_t o = 3 * static_cast<std::size_t>(y * w + x);
      data[o] = quantize(img.r(y, x));
      data[o + 1] = quantize(img.g(y, x));
      data[o + 2] = quantize(img.b(y, x));
    }
  writePngRgb8(path, h, w, data);
}

void savePngGray(const std::string& path, const Eigen::MatrixXd& gray) {
  savePng(path, RgbImage{gray, gray, gray});
}

void savePpm(const std::string& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  for (Index y = 0; y < img.height(); ++y)
    for (Index x = 0; x < img.width(); ++x) {
      const std::uint8_t px[3] = {quantize(img.r(y, x)), quantize(img.g(y, x)),
                                  quantize(img.b(y, x))};
      out.write(reinterpret_cast<const char*>(px), 3);
    }
  if (!out) throw IoError("failed writing " + path);
}

void savePgm(const std::string& path, const Eigen::MatrixXd& gray) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << gray.cols() << " " << gray.rows() << "\n255\n";
  for (Index y = 0; y < gray.rows(); ++y)
    for (Index x = 0; x < gray.cols(); ++x) {
      const std::uint8_t px = quantize(gray(y, x));
      out.write(reinterpret_cast<const char*>(&px), 1);
    }
  if (!out) throw IoError("failed writing " + path);
}

void savePngMask(const std::string& path, const Eigen::MatrixXi& mask) {
  Eigen::MatrixXd gray(mask.rows(), mask.cols());
  for (Index y = 0; y < mask.rows(); ++y)
    for (Index x = 0; x < mask.cols(); ++x) gray(y, x) = mask(y, x) != 0 ? 1.0 : 0.0;
  savePngGray(path, gray);
}

void savePngLabels(const std::string& path, const Eigen::MatrixXi& labels) {
  const Index h = labels.rows(), w = labels.cols();
  std::vector<std::uint8_t> data(static_cast<std::size_t>(3 * h * w), 0);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const int lbl = labels(y, x);
      if (lbl <= 0) continue;
      const auto& rgb = kPalette[static_cast<std::size_t>((lbl - 1) % 20)];
      const std::size_t o = 3 * static_cast<std::size_t>(y * w + x);
      data[o] = rgb[0];
      data[o + 1] = rgb[1];
      data[o + 2] = rgb[2];
    }
  writePngRgb8(path, h, w, data);
}

ImageCube loadCubeCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty cube CSV");
  Index h = 0, w = 0, b = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> h >> comma >> w >> comma >> b) || h <= 0 || w <= 0 || b <= 0)
      throw IoError(path + ": bad cube header, expected height,width,bands");
  }
  ImageCube cube;
  cube.bands.assign(static_cast<std::size_t>(b), Eigen::MatrixXd::Zero(h, w));
  for (Index p = 0; p < h * w; ++p) {
    if (!std::getline(in, line)) throw IoError(path + ": truncated cube CSV");
    std::istringstream ls(line);
    for (Index k = 0; k < b; ++k) {
      double v = 0;
      char comma = 0;
      if (k > 0 && !(ls >> comma)) throw IoError(path + ": short cube row");
      if (!(ls >> v)) throw IoError(path + ": short cube row");
      cube.bands[static_cast<std::size_t>(k)](p / w, p % w) = v;
    }
  }
  return cube;
}

void saveCubeCsv(const std::string& path, const ImageCube& cube) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const Index h = cube.height(), w = cube.width(), b = cube.bandCount();
  out << h << "," << w << "," << b << "\n";
  char buf[64];
  for (Index p = 0; p < h * w; ++p) {
    for (Index k = 0; k < b; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", cube.bands[static_cast<std::size_t>(k)](p / w, p % w));
      if (k) out << ",";
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

ImageCube loadCubeEnvi(const std::string& hdrPath) {
  std::ifstream in(hdrPath);
  if (!in) throw IoError("cannot open " + hdrPath);
  std::map<std::string, std::string> fields;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    fields[lower(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  const auto need = [&](const char* key) {
    const auto it = fields.find(key);
    if (it == fields.end())
      throw IoError(hdrPath + ": missing header field '" + key + "'");
    return it->second;
  };
  const Index w = std::stoll(need("samples"));
  const Index h = std::stoll(need("lines"));
  const Index b = std::stoll(need("bands"));
  const int dtype = std::stoi(need("data type"));
  const std::string interleave = lower(need("interleave"));
  if (w <= 0 || h <= 0 || b <= 0) throw IoError(hdrPath + ": bad cube dimensions");
  if (fields.count("byte order") && std::stoi(fields["byte order"]) != 0)
    throw IoError(hdrPath + ": only little-endian cubes supported");
  std::size_t offset = 0;
  if (fields.count("header offset")) offset = std::stoull(fields["header offset"]);

  // Data file: same stem, or common raw-data extensions.
  namespace fs = std::filesystem;
  const fs::path hp(hdrPath);
  std::vector<fs::path> candidates{hp.parent_path() / hp.stem()};
  for (const char* ext : {".img", ".raw", ".dat", ".bin"}) {
    fs::path c = hp;
    c.replace_extension(ext);
    candidates.push_back(c);
  }
  std::string dataPath;
  for (const auto& c : candidates)
    if (fs::exists(c) && !fs::is_directory(c)) {
      dataPath = c.string();
      break;
    }
  if (dataPath.empty()) throw IoError(hdrPath + ": no data file found next to header");

  std::ifstream raw(dataPath, std::ios::binary);
  if (!raw) throw IoError("cannot open " + dataPath);
  raw.seekg(static_cast<std::streamoff>(offset));
  const std::size_t count = static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                            static_cast<std::size_t>(b);
  std::vector<double> values(count);
  const auto readAll = [&](auto* tmp, std::size_t bytesPer) {
    std::vector<char> buf(count * bytesPer);
    raw.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (raw.gcount() != static_cast<std::streamsize>(buf.size()))
      throw IoError(dataPath + ": truncated cube data");
    std::memcpy(tmp, buf.data(), buf.size());
  };
  if (dtype == 4) {
    std::vector<float> tmp(count);
    readAll(tmp.data(), 4);
    for (std::size_t k = 0; k < count; ++k) values[k] = tmp[k];
  } else if (dtype == 5) {
    readAll(values.data(), 8);
  } else if (dtype == 12) {
    std::vector<std::uint16_t> tmp(count);
    readAll(tmp.data(), 2);
    for (std::size_t k = 0; k < count; ++k) values[k] = tmp[k];
  } else {
    throw IoError(hdrPath + ": unsupported data type " + std::to_string(dtype));
  }

  ImageCube cube;
  cube.bands.assign(static_cast<std::size_t>(b), Eigen::MatrixXd::Zero(h, w));
  const auto at = [&](Index y, Index x, Index k) -> std::size_t {
    if (interleave == "bsq")
      return static_cast<std::size_t>((k * h + y) * w + x);
    if (interleave == "bil")
      return static_cast<std::size_t>((y * b + k) * w + x);
    if (interleave == "bip")
      return static_cast<std::size_t>((y * w + x) * b + k);
    throw IoError(hdrPath + ": unknown interleave '" + interleave + "'");
  };
  for (Index k = 0; k < b; ++k)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x)
        cube.bands[static_cast<std::size_t>(k)](y, x) = values[at(y, x, k)];
  return cube;
}

ImageCube loadCube(const std::string& path) {
  const std::string ext = lower(std::filesystem::path(path).extension().string());
  return ext == ".hdr" ? loadCubeEnvi(path) : loadCubeCsv(path);
}

Eigen::MatrixXi loadLabelsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<int> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stoi(trim(cell)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ": ragged label CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty label CSV");
  Eigen::MatrixXi labels(static_cast<Index>(rows.size()),
                         static_cast<Index>(rows.front().size()));
  for (Index y = 0; y < labels.rows(); ++y)
    for (Index x = 0; x < labels.cols(); ++x)
      labels(y, x) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
  return labels;
}

void saveLabelsCsv(const std::string& path, const Eigen::MatrixXi& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (Index y = 0; y < labels.rows(); ++y) {
    for (Index x = 0; x < labels.cols(); ++x) {
      if (x) out << ",";
      out << labels(y, x);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace mgsp
