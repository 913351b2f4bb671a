#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "mgsp/mlg.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp {

enum class BasisKind { hosvd, cp };

/// Joint layer/entity spectral basis of a multilayer graph.
///
/// layerBasis (M x M) and entityBasis (N x N) have orthonormal columns sorted
/// by descending magnitude of the paired values.  Sign convention: in each
/// column the largest-magnitude entry is positive (ties to the lowest index);
/// exact value ties are ordered lexicographically by column entries.
template <typename Scalar>
struct SpectralBasis {
  MatrixX<Scalar> layerBasis;
  MatrixX<Scalar> entityBasis;
  VectorX<Scalar> layerValues;
  VectorX<Scalar> entityValues;
  BasisKind kind = BasisKind::hosvd;
};

template <typename Scalar>
struct HosvdFactorization {
  Tensor4<Scalar> core;
  SpectralBasis<Scalar> basis;
};

template <typename Scalar>
struct CpFactorization {
  MatrixX<Scalar> weights;  // lambda(a,i), M x N
  SpectralBasis<Scalar> basis;
  Scalar residual = 0;      // Frobenius residual of the returned iterate
  int iterations = 0;
};

template <typename Scalar>
struct FlattenedEigen {
  VectorX<Scalar> values;                 // signed, descending
  std::vector<MatrixX<Scalar>> vectors;   // each M x N, reshaped from MN rows
};

namespace detail {

/// Flips the column so its largest-magnitude entry (lowest index on ties)
/// is positive.
template <typename Derived>
void fixColumnSign(Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return;
  Index arg = 0;
  Scalar best = std::abs(v[0]);
  for (Index k = 1; k < v.size(); ++k) {
    const Scalar mag = std::abs(v[k]);
    if (mag > best) {
      best = mag;
      arg = k;
    }
  }
  if (v[arg] < Scalar(0)) v = -v;
}

template <typename Scalar>
bool lexGreater(const MatrixX<Scalar>& basis, Index a, Index b) {
  for (Index k = 0; k < basis.rows(); ++k) {
    if (basis(k, a) != basis(k, b)) return basis(k, a) > basis(k, b);
  }
  return false;
}

/// Sorts columns by |value| descending; exact ties fall back to lexicographic
/// comparison of the (sign-normalized) columns so degenerate spectra still
/// come out in one deterministic order.
template <typename Scalar>
void sortSpectrum(VectorX<Scalar>& values, MatrixX<Scalar>& basis) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const Scalar ma = std::abs(values[a]), mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    if (values[a] != values[b]) return values[a] > values[b];
    return lexGreater(basis, a, b);
  });
  VectorX<Scalar> v(values.size());
  MatrixX<Scalar> m(basis.rows(), basis.cols());
  for (Index k = 0; k < values.size(); ++k) {
    v[k] = values[order[static_cast<std::size_t>(k)]];
    m.col(k) = basis.col(order[static_cast<std::size_t>(k)]);
  }
  values.swap(v);
  basis.swap(m);
}

/// Orthonormal left singular basis and singular values of x, via the Gram
/// matrix.  Deterministic: signs and degenerate orders are normalized.
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> leftSingular(const MatrixX<Scalar>& x) {
  MatrixX<Scalar> g = x * x.transpose();
  g = ((g + g.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  VectorX<Scalar> vals = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  MatrixX<Scalar> u = es.eigenvectors();
  for (Index c = 0; c < u.cols(); ++c) {
    auto col = u.col(c);
    fixColumnSign(col);
  }
  sortSpectrum(vals, u);
  return {std::move(u), std::move(vals)};
}

/// Symmetric eigendecomposition with the same sign/order normalization,
/// sorted by |eigenvalue| descending (signed values kept).
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> sortedSymmetricEigen(MatrixX<Scalar> g) {
  g = ((g + g.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  VectorX<Scalar> vals = es.eigenvalues();
  MatrixX<Scalar> u = es.eigenvectors();
  for (Index c = 0; c < u.cols(); ++c) {
    auto col = u.col(c);
    fixColumnSign(col);
  }
  sortSpectrum(vals, u);
  return {std::move(u), std::move(vals)};
}

/// Closest orthogonal matrix to c in Frobenius norm (polar factor U V^T).
template <typename Scalar>
MatrixX<Scalar> polarFactor(const MatrixX<Scalar>& c) {
  if (c.rows() <= 16) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

template <typename Scalar>
void requireMlgSymmetric(const Tensor4<Scalar>& f, Scalar symTol) {
  if (!f.isMlgShaped())
    throw InvalidGraphError("decomposition requires an MLG-shaped tensor");
  const auto rep = checkUndirected(f, symTol);
  if (!rep.pass)
    throw InvalidGraphError("decomposition requires a symmetric tensor: max deviation " +
                            std::to_string(rep.maxDeviation));
}

}  // namespace detail

/// Higher-order SVD of an MLG-shaped symmetric tensor.  The layer basis is
/// shared by modes 1 and 3, the entity basis by modes 2 and 4; the core is
/// F x1 Ef' x2 Ee' x3 Ef' x4 Ee'.
template <typename Scalar>
HosvdFactorization<Scalar> hosvd(const Tensor4<Scalar>& f, Scalar symTol = Scalar(1e-9)) {
  detail::requireMlgSymmetric(f, symTol);
  auto [ef, gamma] = detail::leftSingular(unfold(f, 1));
  auto [ee, sigma] = detail::leftSingular(unfold(f, 2));
  HosvdFactorization<Scalar> out;
  out.basis.layerBasis = std::move(ef);
  out.basis.entityBasis = std::move(ee);
  out.basis.layerValues = std::move(gamma);
  out.basis.entityValues = std::move(sigma);
  out.basis.kind = BasisKind::hosvd;
  const MatrixX<Scalar> eft = out.basis.layerBasis.transpose();
  const MatrixX<Scalar> eet = out.basis.entityBasis.transpose();
  out.core = modeProduct(modeProduct(modeProduct(modeProduct(f, eft, 1), eet, 2), eft, 3), eet, 4);
  return out;
}

template <typename Scalar>
Tensor4<Scalar> reconstruct(const HosvdFactorization<Scalar>& h) {
  return modeProduct(modeProduct(modeProduct(modeProduct(h.core, h.basis.layerBasis, 1),
                                             h.basis.entityBasis, 2),
                                 h.basis.layerBasis, 3),
                     h.basis.entityBasis, 4);
}

template <typename Scalar>
Tensor4<Scalar> reconstruct(const CpFactorization<Scalar>& c) {
  const Index m = c.basis.layerBasis.rows(), n = c.basis.entityBasis.rows();
  Tensor4<Scalar> out(m, n);
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i) {
      if (c.weights(a, i) == Scalar(0)) continue;
      const VectorX<Scalar> f = c.basis.layerBasis.col(a);
      const VectorX<Scalar> e = c.basis.entityBasis.col(i);
      Tensor4<Scalar> r1 = symmetricRank1<Scalar>(f, e);
      out.vec() += c.weights(a, i) * r1.vec();
    }
  return out;
}

/// Eigendecomposition of the MN x MN flattening; eigenvectors come back
/// reshaped to M x N signals, sorted by |eigenvalue| descending.
template <typename Scalar>
FlattenedEigen<Scalar> flattenedEigen(const Tensor4<Scalar>& f, Scalar symTol = Scalar(1e-9)) {
  detail::requireMlgSymmetric(f, symTol);
  auto [u, vals] = detail::sortedSymmetricEigen<Scalar>(flatten(f));
  FlattenedEigen<Scalar> out;
  out.values = std::move(vals);
  const Index m = f.layers(), n = f.entities();
  out.vectors.reserve(static_cast<std::size_t>(m * n));
  for (Index k = 0; k < m * n; ++k) {
    MatrixX<Scalar> v(m, n);
    for (Index a = 0; a < m; ++a)
      for (Index i = 0; i < n; ++i) v(a, i) = u(a * n + i, k);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

/// Joint graph Fourier transform of a signal: s_hat = Ef^T s Ee.
template <typename Scalar>
MatrixX<Scalar> mgft(const MatrixX<Scalar>& s, const SpectralBasis<Scalar>& basis) {
  if (s.rows() != basis.layerBasis.rows() || s.cols() != basis.entityBasis.rows())
    throw ShapeError("mgft: signal is " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()) + ", basis expects " +
                     std::to_string(basis.layerBasis.rows()) + "x" +
                     std::to_string(basis.entityBasis.rows()));
  return basis.layerBasis.transpose() * s * basis.entityBasis;
}

/// Inverse transform: s = Ef s_hat Ee^T.
template <typename Scalar>
MatrixX<Scalar> imgft(const MatrixX<Scalar>& shat, const SpectralBasis<Scalar>& basis) {
  if (shat.rows() != basis.layerBasis.cols() || shat.cols() != basis.entityBasis.cols())
    throw ShapeError("imgft: spectrum shape does not match basis");
  return basis.layerBasis * shat * basis.entityBasis.transpose();
}

/// Diagonal weights lambda(a,i) = S(a,i,a,i) of a core tensor.
template <typename Scalar>
MatrixX<Scalar> coreDiagonal(const Tensor4<Scalar>& core) {
  if (!core.isMlgShaped()) throw ShapeError("coreDiagonal requires an MLG-shaped core");
  MatrixX<Scalar> lam(core.layers(), core.entities());
  for (Index a = 0; a < core.layers(); ++a)
    for (Index i = 0; i < core.entities(); ++i) lam(a, i) = core(a, i, a, i);
  return lam;
}

/// Orthogonal CP approximation F ~ sum_ai lambda(a,i) f_a o e_i o f_a o e_i
/// with orthonormal layer/entity factors, fitted by alternating polar-factor
/// updates from the HOSVD initialization.  Updates are accepted only when
/// they lower the residual, so the residual is non-increasing and never
/// exceeds the HOSVD-diagonal starting point.
template <typename Scalar>
CpFactorization<Scalar> orthogonalCp(const Tensor4<Scalar>& f, int maxIter = 100,
                                     Scalar tol = Scalar(1e-8),
                                     Scalar symTol = Scalar(1e-9)) {
  if (maxIter < 0) throw ShapeError("orthogonalCp: maxIter must be nonnegative");
  auto h = hosvd(f, symTol);
  const Index m = f.layers(), n = f.entities();
  const Scalar normF2 = f.vec().squaredNorm();

  MatrixX<Scalar> ef = h.basis.layerBasis;
  MatrixX<Scalar> ee = h.basis.entityBasis;
  MatrixX<Scalar> lam = coreDiagonal(h.core);
  Scalar obj = lam.squaredNorm();  // residual^2 = normF2 - obj

  // Entity-contracted view G(b,i,d,i') used by the layer step; its (.,i,.,i)
  // slices are the matrices W_i with lambda(a,i) = f_a^T W_i f_a.
  const auto layerSlices = [&](const MatrixX<Scalar>& eeCur) {
    const MatrixX<Scalar> eet = eeCur.transpose();
    Tensor4<Scalar> g = modeProduct(modeProduct(f, eet, 2), eet, 4);
    std::vector<MatrixX<Scalar>> w(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      MatrixX<Scalar> wi(m, m);
      for (Index b = 0; b < m; ++b)
        for (Index d = 0; d < m; ++d) wi(b, d) = g(b, i, d, i);
      w[static_cast<std::size_t>(i)] = std::move(wi);
    }
    return w;
  };
  const auto entitySlices = [&](const MatrixX<Scalar>& efCur) {
    const MatrixX<Scalar> eft = efCur.transpose();
    Tensor4<Scalar> g = modeProduct(modeProduct(f, eft, 1), eft, 3);
    std::vector<MatrixX<Scalar>> w(static_cast<std::size_t>(m));
    for (Index a = 0; a < m; ++a) {
      MatrixX<Scalar> wa(n, n);
      for (Index p = 0; p < n; ++p)
        for (Index q = 0; q < n; ++q) wa(p, q) = g(a, p, a, q);
      w[static_cast<std::size_t>(a)] = std::move(wa);
    }
    return w;
  };

  int iter = 0;
  for (; iter < maxIter; ++iter) {
    const Scalar prevObj = obj;
    bool improved = false;

    {  // layer factor update at fixed entities
      const auto w = layerSlices(ee);
      MatrixX<Scalar> c = MatrixX<Scalar>::Zero(m, m);
      for (Index a = 0; a < m; ++a)
        for (Index i = 0; i < n; ++i)
          c.col(a) += lam(a, i) * (w[static_cast<std::size_t>(i)] * ef.col(a));
      const MatrixX<Scalar> efCand = detail::polarFactor(c);
      MatrixX<Scalar> lamCand(m, n);
      for (Index a = 0; a < m; ++a)
        for (Index i = 0; i < n; ++i)
          lamCand(a, i) = efCand.col(a).dot(w[static_cast<std::size_t>(i)] * efCand.col(a));
      if (lamCand.squaredNorm() > obj) {
        ef = efCand;
        lam = std::move(lamCand);
        obj = lam.squaredNorm();
        improved = true;
      }
    }
    {  // entity factor update at fixed layers
      const auto w = entitySlices(ef);
      MatrixX<Scalar> c = MatrixX<Scalar>::Zero(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < m; ++a)
          c.col(i) += lam(a, i) * (w[static_cast<std::size_t>(a)] * ee.col(i));
      const MatrixX<Scalar> eeCand = detail::polarFactor(c);
      MatrixX<Scalar> lamCand(m, n);
      for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < m; ++a)
          lamCand(a, i) = eeCand.col(i).dot(w[static_cast<std::size_t>(a)] * eeCand.col(i));
      if (lamCand.squaredNorm() > obj) {
        ee = eeCand;
        lam = std::move(lamCand);
        obj = lam.squaredNorm();
        improved = true;
      }
    }

    if (!improved) {
      ++iter;
      break;
    }
    const Scalar resPrev = std::sqrt(std::max(normF2 - prevObj, Scalar(0)));
    const Scalar res = std::sqrt(std::max(normF2 - obj, Scalar(0)));
    if (resPrev - res < tol * std::max(resPrev, Scalar(1))) {
      ++iter;
      break;
    }
  }

  // Canonical form: sign-normalized columns (lambda is sign-invariant),
  // layers ordered by row energy of lambda, entities by column energy.
  for (Index c = 0; c < ef.cols(); ++c) {
    auto col = ef.col(c);
    detail::fixColumnSign(col);
  }
  for (Index c = 0; c < ee.cols(); ++c) {
    auto col = ee.col(c);
    detail::fixColumnSign(col);
  }
  VectorX<Scalar> layerVals = lam.rowwise().norm();
  VectorX<Scalar> entityVals = lam.colwise().norm();
  {
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (layerVals[a] != layerVals[b]) return layerVals[a] > layerVals[b];
      return detail::lexGreater(ef, a, b);
    });
    MatrixX<Scalar> ef2(m, m);
    MatrixX<Scalar> lam2(m, n);
    VectorX<Scalar> lv2(m);
    for (Index k = 0; k < m; ++k) {
      ef2.col(k) = ef.col(order[static_cast<std::size_t>(k)]);
      lam2.row(k) = lam.row(order[static_cast<std::size_t>(k)]);
      lv2[k] = layerVals[order[static_cast<std::size_t>(k)]];
    }
    ef = std::move(ef2);
    lam = std::move(lam2);
    layerVals = std::move(lv2);
  }
  {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (entityVals[a] != entityVals[b]) return entityVals[a] > entityVals[b];
      return detail::lexGreater(ee, a, b);
    });
    MatrixX<Scalar> ee2(n, n);
    MatrixX<Scalar> lam2(m, n);
    VectorX<Scalar> ev2(n);
    for (Index k = 0; k < n; ++k) {
      ee2.col(k) = ee.col(order[static_cast<std::size_t>(k)]);
      lam2.col(k) = lam.col(order[static_cast<std::size_t>(k)]);
      ev2[k] = entityVals[order[static_cast<std::size_t>(k)]];
    }
    ee = std::move(ee2);
    lam = std::move(lam2);
    entityVals = std::move(ev2);
  }

  CpFactorization<Scalar> out;
  out.weights = std::move(lam);
  out.basis.layerBasis = std::move(ef);
  out.basis.entityBasis = std::move(ee);
  out.basis.layerValues = std::move(layerVals);
  out.basis.entityValues = std::move(entityVals);
  out.basis.kind = BasisKind::cp;
  out.residual = std::sqrt(std::max(normF2 - obj, Scalar(0)));
  out.iterations = iter;
  return out;
}

}  // namespace mgsp
