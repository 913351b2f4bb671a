#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

#include "mgsp/errors.hpp"

namespace mgsp {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

inline int checkMode4(int mode) {
  if (mode < 1 || mode > 4)
    throw ShapeError("tensor mode must be in 1..4, got " + std::to_string(mode));
  return mode - 1;
}

inline int checkMode2(int mode) {
  if (mode < 1 || mode > 2)
    throw ShapeError("signal mode must be 1 or 2, got " + std::to_string(mode));
  return mode - 1;
}

}  // namespace detail

/// Dense 4th-order tensor stored row-major over (a, i, b, j).
///
/// A multilayer graph with M layers and N entities per layer is represented
/// by the shape (M, N, M, N); entry (a, i, b, j) couples entity i of layer a
/// with entity j of layer b.  Mode arguments follow the usual 1..4 n-mode
/// convention, element indices are 0-based.
template <typename Scalar>
class Tensor4 {
 public:
  using Dims = std::array<Index, 4>;

  Tensor4() : dims_{0, 0, 0, 0} {}

  explicit Tensor4(const Dims& dims) : dims_(dims) {
    for (Index d : dims_)
      if (d < 0) throw ShapeError("tensor dimensions must be nonnegative");
    data_ = VectorX<Scalar>::Zero(dims_[0] * dims_[1] * dims_[2] * dims_[3]);
  }

  /// Zero MLG-shaped tensor (layers, entities, layers, entities).
  Tensor4(Index layers, Index entities)
      : Tensor4(Dims{layers, entities, layers, entities}) {}

  const Dims& dims() const { return dims_; }
  Index dim(int mode) const {
    return dims_[static_cast<std::size_t>(detail::checkMode4(mode))];
  }
  Index size() const { return data_.size(); }

  bool isMlgShaped() const { return dims_[0] == dims_[2] && dims_[1] == dims_[3]; }
  Index layers() const { return dims_[0]; }
  Index entities() const { return dims_[1]; }

  Scalar operator()(Index a, Index i, Index b, Index j) const {
    return data_[offset(a, i, b, j)];
  }
  Scalar& operator()(Index a, Index i, Index b, Index j) {
    return data_[offset(a, i, b, j)];
  }

  /// Flat view, row-major over (a, i, b, j).
  const VectorX<Scalar>& vec() const { return data_; }
  VectorX<Scalar>& vec() { return data_; }

  Scalar norm() const { return data_.norm(); }
  bool allFinite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor4& x, const Tensor4& y) {
    return x.dims_ == y.dims_ && x.data_ == y.data_;
  }

 private:
  Index offset(Index a, Index i, Index b, Index j) const {
    eigen_assert(a >= 0 && a < dims_[0] && i >= 0 && i < dims_[1] &&
                 b >= 0 && b < dims_[2] && j >= 0 && j < dims_[3]);
    return ((a * dims_[1] + i) * dims_[2] + b) * dims_[3] + j;
  }

  Dims dims_;
  VectorX<Scalar> data_;
};

/// Mode-n matricization.  Rows run over the requested mode; columns run over
/// the remaining modes in cyclic order (mode+1, mode+2, mode+3, wrapping),
/// with the first cyclic mode varying slowest and the last fastest.  fold()
/// is the exact inverse.
template <typename Scalar>
MatrixX<Scalar> unfold(const Tensor4<Scalar>& t, int mode) {
  const int m = detail::checkMode4(mode);
  const auto& d = t.dims();
  const int o1 = (m + 1) % 4, o2 = (m + 2) % 4, o3 = (m + 3) % 4;
  MatrixX<Scalar> out(d[m], d[o1] * d[o2] * d[o3]);
  std::array<Index, 4> ix{};
  for (ix[0] = 0; ix[0] < d[0]; ++ix[0])
    for (ix[1] = 0; ix[1] < d[1]; ++ix[1])
      for (ix[2] = 0; ix[2] < d[2]; ++ix[2])
        for (ix[3] = 0; ix[3] < d[3]; ++ix[3])
          out(ix[m], (ix[o1] * d[o2] + ix[o2]) * d[o3] + ix[o3]) =
              t(ix[0], ix[1], ix[2], ix[3]);
  return out;
}

template <typename Scalar>
Tensor4<Scalar> fold(const MatrixX<Scalar>& x, int mode,
                     const typename Tensor4<Scalar>::Dims& dims) {
  const int m = detail::checkMode4(mode);
  const int o1 = (m + 1) % 4, o2 = (m + 2) % 4, o3 = (m + 3) % 4;
  if (x.rows() != dims[m] || x.cols() != dims[o1] * dims[o2] * dims[o3])
    throw ShapeError("fold: " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) +
                     " matrix does not match target dims for mode " +
                     std::to_string(mode));
  Tensor4<Scalar> t(dims);
  std::array<Index, 4> ix{};
  for (ix[0] = 0; ix[0] < dims[0]; ++ix[0])
    for (ix[1] = 0; ix[1] < dims[1]; ++ix[1])
      for (ix[2] = 0; ix[2] < dims[2]; ++ix[2])
        for (ix[3] = 0; ix[3] < dims[3]; ++ix[3])
          t(ix[0], ix[1], ix[2], ix[3]) =
              x(ix[m], (ix[o1] * dims[o2] + ix[o2]) * dims[o3] + ix[o3]);
  return t;
}

/// MN x MN matrix pairing modes (1,2) against (3,4): entry (a,i,b,j) lands
/// at row a*N+i, column b*N+j.  Undirected MLG tensors flatten to symmetric
/// matrices.
template <typename Scalar>
MatrixX<Scalar> flatten(const Tensor4<Scalar>& t) {
  if (!t.isMlgShaped())
    throw ShapeError("flatten requires an MLG-shaped (M,N,M,N) tensor");
  const Index m = t.layers(), n = t.entities();
  MatrixX<Scalar> out(m * n, m * n);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) out(a * n + i, b * n + j) = t(a, i, b, j);
  return out;
}

template <typename Scalar>
Tensor4<Scalar> unflatten(const MatrixX<Scalar>& x, Index layers, Index entities) {
  if (x.rows() != layers * entities || x.cols() != layers * entities)
    throw ShapeError("unflatten: matrix must be MN x MN");
  Tensor4<Scalar> t(layers, entities);
  for (Index a = 0; a < layers; ++a)
    for (Index i = 0; i < entities; ++i)
      for (Index b = 0; b < layers; ++b)
        for (Index j = 0; j < entities; ++j)
          t(a, i, b, j) = x(a * entities + i, b * entities + j);
  return t;
}

/// n-mode product t x_mode a: contracts the requested mode with the columns
/// of `a`; that mode of the result has size a.rows().
template <typename Scalar>
Tensor4<Scalar> modeProduct(const Tensor4<Scalar>& t, const MatrixX<Scalar>& a,
                            int mode) {
  const int m = detail::checkMode4(mode);
  if (a.cols() != t.dims()[m])
    throw ShapeError("mode-" + std::to_string(mode) + " product: matrix has " +
                     std::to_string(a.cols()) + " columns, tensor mode has size " +
                     std::to_string(t.dims()[m]));
  auto dims = t.dims();
  dims[m] = a.rows();
  return fold<Scalar>(a * unfold(t, mode), mode, dims);
}

/// n-mode product for a 2-D signal: mode 1 gives a*s, mode 2 gives s*a^T.
template <typename Scalar>
MatrixX<Scalar> modeProduct(const MatrixX<Scalar>& s, const MatrixX<Scalar>& a,
                            int mode) {
  const int m = detail::checkMode2(mode);
  if (a.cols() != (m == 0 ? s.rows() : s.cols()))
    throw ShapeError("mode-" + std::to_string(mode) +
                     " product: matrix columns do not match signal");
  return m == 0 ? MatrixX<Scalar>(a * s) : MatrixX<Scalar>(s * a.transpose());
}

/// Rank-1 signal f e^T from a layer vector and an entity vector.
template <typename Scalar>
MatrixX<Scalar> outerRank1(const VectorX<Scalar>& f, const VectorX<Scalar>& e) {
  return f * e.transpose();
}

/// Rank-1 MLG-shaped tensor f o e o f o e.
template <typename Scalar>
Tensor4<Scalar> symmetricRank1(const VectorX<Scalar>& f, const VectorX<Scalar>& e) {
  const Index m = f.size(), n = e.size();
  Tensor4<Scalar> t(m, n);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) t(a, i, b, j) = f[a] * e[i] * f[b] * e[j];
  return t;
}

using Tensor4d = Tensor4<double>;

}  // namespace mgsp
