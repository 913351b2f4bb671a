#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "mgsp/mlg.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp::testing {

// Self-cleaning scratch directory for file-based tests.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "mgsp-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string readFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 2-layer, 2-entity ring: entities linked within each layer, counterpart
// entities linked across layers.  Flattens to the 4-cycle adjacency matrix.
inline Tensor4d fourCycleAdjacency() {
  Tensor4d t(2, 2);
  for (Index a = 0; a < 2; ++a)
    for (Index i = 0; i < 2; ++i)
      for (Index b = 0; b < 2; ++b)
        for (Index j = 0; j < 2; ++j)
          if ((a == b) != (i == j)) t(a, i, b, j) = 1.0;
  return t;
}

inline Tensor4d randomTensor(Index d0, Index d1, Index d2, Index d3,
                             std::mt19937_64& rng) {
  Tensor4d t({d0, d1, d2, d3});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index k = 0; k < t.size(); ++k) t.vec()[k] = u(rng);
  return t;
}

// Random MLG-shaped tensor with the pairwise symmetry T(a,i,b,j)=T(b,j,a,i).
inline Tensor4d randomSymmetricTensor(Index m, Index n, std::mt19937_64& rng) {
  Tensor4d t = randomTensor(m, n, m, n, rng);
  Tensor4d s(m, n);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j)
          s(a, i, b, j) = 0.5 * (t(a, i, b, j) + t(b, j, a, i));
  return s;
}

// Random undirected adjacency tensor: symmetric, nonnegative, no self-loops.
inline Tensor4d randomAdjacencyTensor(Index m, Index n, std::mt19937_64& rng) {
  Tensor4d t = randomSymmetricTensor(m, n, rng);
  for (Index k = 0; k < t.size(); ++k) t.vec()[k] = std::abs(t.vec()[k]);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i) t(a, i, a, i) = 0.0;
  return t;
}

inline Eigen::MatrixXd randomSignal(Index m, Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd s(m, n);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < n; ++c) s(r, c) = u(rng);
  return s;
}

}  // namespace mgsp::testing
