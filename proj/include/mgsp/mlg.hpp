#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "mgsp/tensor.hpp"

namespace mgsp {

enum class Representation { adjacency, laplacian };

template <typename Scalar>
struct SymmetryReport {
  Scalar maxDeviation = 0;
  bool pass = true;
};

/// Largest |T(a,i,b,j) - T(b,j,a,i)| checked against tol.
template <typename Scalar>
SymmetryReport<Scalar> checkUndirected(const Tensor4<Scalar>& t, Scalar tol) {
  if (!t.isMlgShaped())
    throw ShapeError("undirectedness is defined for MLG-shaped tensors only");
  const Index m = t.layers(), n = t.entities();
  SymmetryReport<Scalar> rep;
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) {
          const Scalar dev = std::abs(t(a, i, b, j) - t(b, j, a, i));
          if (dev > rep.maxDeviation) rep.maxDeviation = dev;
        }
  rep.pass = rep.maxDeviation <= tol;
  return rep;
}

/// An undirected multilayer graph: a validated MLG-shaped tensor plus the
/// representation it carries.  Immutable after construction.
///
/// Adjacency tensors must be symmetric within tol, entrywise nonnegative and
/// free of self-loops (T(a,i,a,i) = 0).  Laplacian tensors must be symmetric
/// within tol.
template <typename Scalar>
class MultilayerGraph {
 public:
  static MultilayerGraph adjacency(Tensor4<Scalar> t, Scalar tol = Scalar(1e-9)) {
    validateCommon(t, tol);
    if (t.vec().minCoeff() < Scalar(0))
      throw InvalidGraphError("adjacency tensor has negative entries");
    for (Index a = 0; a < t.layers(); ++a)
      for (Index i = 0; i < t.entities(); ++i)
        if (t(a, i, a, i) != Scalar(0))
          throw InvalidGraphError("adjacency tensor has a nonzero self-loop at layer " +
                                  std::to_string(a) + ", entity " + std::to_string(i));
    return MultilayerGraph(std::move(t), Representation::adjacency);
  }

  static MultilayerGraph laplacian(Tensor4<Scalar> t, Scalar tol = Scalar(1e-9)) {
    validateCommon(t, tol);
    return MultilayerGraph(std::move(t), Representation::laplacian);
  }

  const Tensor4<Scalar>& tensor() const { return tensor_; }
  Representation representation() const { return rep_; }
  Index layers() const { return tensor_.layers(); }
  Index entities() const { return tensor_.entities(); }

 private:
  MultilayerGraph(Tensor4<Scalar> t, Representation rep)
      : tensor_(std::move(t)), rep_(rep) {}

  static void validateCommon(const Tensor4<Scalar>& t, Scalar tol) {
    if (!t.isMlgShaped())
      throw InvalidGraphError("graph tensor must be MLG-shaped (M,N,M,N)");
    if (!t.allFinite())
      throw InvalidGraphError("graph tensor has non-finite entries");
    const auto rep = checkUndirected(t, tol);
    if (!rep.pass)
      throw InvalidGraphError("graph tensor is asymmetric: max deviation " +
                              std::to_string(rep.maxDeviation));
  }

  Tensor4<Scalar> tensor_;
  Representation rep_;
};

/// Combinatorial Laplacian L = D - A where D(a,i,a,i) is the total contraction
/// degree sum_{b,j} A(a,i,b,j).  Rows of the flattening sum to zero.
template <typename Scalar>
Tensor4<Scalar> buildLaplacian(const Tensor4<Scalar>& adj, Scalar tol = Scalar(1e-9)) {
  if (!checkUndirected(adj, tol).pass)
    throw InvalidGraphError("Laplacian requires a symmetric adjacency tensor");
  if (adj.vec().minCoeff() < Scalar(0))
    throw InvalidGraphError("Laplacian requires nonnegative adjacency entries");
  const Index m = adj.layers(), n = adj.entities();
  Tensor4<Scalar> lap(m, n);
  lap.vec() = -adj.vec();
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i) {
      Scalar deg = 0;
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) deg += adj(a, i, b, j);
      lap(a, i, a, i) += deg;
    }
  return lap;
}

template <typename Scalar>
MultilayerGraph<Scalar> buildLaplacian(const MultilayerGraph<Scalar>& g) {
  if (g.representation() != Representation::adjacency)
    throw InvalidGraphError("buildLaplacian expects an adjacency-representation graph");
  return MultilayerGraph<Scalar>::laplacian(buildLaplacian(g.tensor()));
}

/// Contraction of a graph tensor with a signal:
/// out(a,i) = sum_{b,j} T(a,i,b,j) s(b,j).
template <typename Scalar>
MatrixX<Scalar> contract(const Tensor4<Scalar>& t, const MatrixX<Scalar>& s) {
  if (!t.isMlgShaped() || s.rows() != t.layers() || s.cols() != t.entities())
    throw ShapeError("contract: signal shape does not match graph tensor");
  const Index m = t.layers(), n = t.entities();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(m, n);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) out(a, i) += t(a, i, b, j) * s(b, j);
  return out;
}

}  // namespace mgsp
