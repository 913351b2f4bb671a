#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mgsp/spectra.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp {

/// Strictly increasing 0-based vertex picks per direction.
struct SelectionPair {
  std::vector<Index> layerIndices;
  std::vector<Index> entityIndices;
};

namespace detail {

inline void checkSelection(const std::vector<Index>& idx, Index bound,
                           const char* what) {
  Index prev = -1;
  for (Index v : idx) {
    if (v < 0 || v >= bound)
      throw ShapeError(std::string(what) + " selection index " + std::to_string(v) +
                       " out of range [0," + std::to_string(bound) + ")");
    if (v <= prev)
      throw ShapeError(std::string(what) + " selection must be strictly increasing");
    prev = v;
  }
}

}  // namespace detail

/// 0/1 selection matrix with one row per kept index: S(r, idx[r]) = 1.
template <typename Scalar>
MatrixX<Scalar> selectionMatrix(const std::vector<Index>& idx, Index n) {
  detail::checkSelection(idx, n, "vertex");
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(static_cast<Index>(idx.size()), n);
  for (Index r = 0; r < static_cast<Index>(idx.size()); ++r) s(r, idx[static_cast<std::size_t>(r)]) = Scalar(1);
  return s;
}

/// Down-sampled signal s_D = s x1 S_P x2 S_Q (a pure gather).
template <typename Scalar>
MatrixX<Scalar> vertexSample(const MatrixX<Scalar>& s, const SelectionPair& sel) {
  detail::checkSelection(sel.layerIndices, s.rows(), "layer");
  detail::checkSelection(sel.entityIndices, s.cols(), "entity");
  MatrixX<Scalar> out(static_cast<Index>(sel.layerIndices.size()),
                      static_cast<Index>(sel.entityIndices.size()));
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c)
      out(r, c) = s(sel.layerIndices[static_cast<std::size_t>(r)],
                    sel.entityIndices[static_cast<std::size_t>(c)]);
  return out;
}

/// Interpolation operators mapping a down-sampled signal back to full shape:
/// s_R = layerMap * s_D * entityMap^T.
template <typename Scalar>
struct InterpolationPair {
  MatrixX<Scalar> layerMap;   // M x P
  MatrixX<Scalar> entityMap;  // N x Q

  /// Zero-fill interpolation: transposes of the selection matrices.
  static InterpolationPair zeroFill(const SelectionPair& sel, Index layers, Index entities) {
    return {selectionMatrix<Scalar>(sel.layerIndices, layers).transpose(),
            selectionMatrix<Scalar>(sel.entityIndices, entities).transpose()};
  }
};

template <typename Scalar>
MatrixX<Scalar> vertexInterpolate(const MatrixX<Scalar>& sd,
                                  const InterpolationPair<Scalar>& ip) {
  if (ip.layerMap.cols() != sd.rows() || ip.entityMap.cols() != sd.cols())
    throw ShapeError("vertexInterpolate: operator shapes do not match sample");
  return ip.layerMap * sd * ip.entityMap.transpose();
}

enum class Ordering { bySpectralValue, byCoefficientEnergy };
enum class Direction { layerWise, entityWise, blockWise };

/// How to keep spectral coefficients: a reorder of the transformed signal
/// (rowPerm/colPerm map permuted position -> original index) plus a keep rule.
/// blockWise keeps the top-left keepLayers x keepEntities block; layerWise
/// keeps the first keepCount entries row-major; entityWise column-major.
struct SamplingPlan {
  Ordering ordering = Ordering::byCoefficientEnergy;
  Direction direction = Direction::blockWise;
  Index keepLayers = 0;
  Index keepEntities = 0;
  Index keepCount = 0;
  std::vector<Index> rowPerm;
  std::vector<Index> colPerm;
};

namespace detail {

inline void checkPermutation(const std::vector<Index>& perm, Index n, const char* what) {
  if (static_cast<Index>(perm.size()) != n)
    throw ShapeError(std::string(what) + " permutation has size " +
                     std::to_string(perm.size()) + ", expected " + std::to_string(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index v : perm) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
      throw ShapeError(std::string(what) + " permutation is not a bijection");
    seen[static_cast<std::size_t>(v)] = true;
  }
}

inline void checkPlan(const SamplingPlan& plan, Index m, Index n) {
  checkPermutation(plan.rowPerm, m, "row");
  checkPermutation(plan.colPerm, n, "column");
  if (plan.direction == Direction::blockWise) {
    if (plan.keepLayers < 0 || plan.keepLayers > m)
      throw ShapeError("keepLayers " + std::to_string(plan.keepLayers) +
                       " out of range [0," + std::to_string(m) + "]");
    if (plan.keepEntities < 0 || plan.keepEntities > n)
      throw ShapeError("keepEntities " + std::to_string(plan.keepEntities) +
                       " out of range [0," + std::to_string(n) + "]");
  } else {
    if (plan.keepCount < 0 || plan.keepCount > m * n)
      throw ShapeError("keepCount " + std::to_string(plan.keepCount) +
                       " out of range [0," + std::to_string(m * n) + "]");
  }
}

template <typename Scalar>
std::vector<Index> energyOrder(const std::vector<Scalar>& energy) {
  std::vector<Index> order(energy.size());
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return energy[static_cast<std::size_t>(a)] > energy[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace detail

/// Permutations sorting the spectrum rows/columns to descending importance.
/// bySpectralValue ranks by |basis value|; byCoefficientEnergy ranks by the
/// L2 energy of the transformed signal along each row/column.  Ties keep the
/// lower original index first.
template <typename Scalar>
void orderCoefficients(const MatrixX<Scalar>& shat, const SpectralBasis<Scalar>& basis,
                       Ordering ordering, std::vector<Index>& rowPerm,
                       std::vector<Index>& colPerm) {
  const Index m = shat.rows(), n = shat.cols();
  if (basis.layerValues.size() != m || basis.entityValues.size() != n)
    throw ShapeError("orderCoefficients: basis values do not match spectrum shape");
  std::vector<Scalar> rowKey(static_cast<std::size_t>(m)), colKey(static_cast<std::size_t>(n));
  if (ordering == Ordering::bySpectralValue) {
    for (Index r = 0; r < m; ++r) rowKey[static_cast<std::size_t>(r)] = std::abs(basis.layerValues[r]);
    for (Index c = 0; c < n; ++c) colKey[static_cast<std::size_t>(c)] = std::abs(basis.entityValues[c]);
  } else {
    for (Index r = 0; r < m; ++r) rowKey[static_cast<std::size_t>(r)] = shat.row(r).squaredNorm();
    for (Index c = 0; c < n; ++c) colKey[static_cast<std::size_t>(c)] = shat.col(c).squaredNorm();
  }
  rowPerm = detail::energyOrder(rowKey);
  colPerm = detail::energyOrder(colKey);
}

/// Helper building a full plan (permutations included) for a signal.
template <typename Scalar>
SamplingPlan makePlan(const MatrixX<Scalar>& s, const SpectralBasis<Scalar>& basis,
                      Ordering ordering, Direction direction, Index keepLayers,
                      Index keepEntities, Index keepCount) {
  SamplingPlan plan;
  plan.ordering = ordering;
  plan.direction = direction;
  plan.keepLayers = keepLayers;
  plan.keepEntities = keepEntities;
  plan.keepCount = keepCount;
  const MatrixX<Scalar> shat = mgft(s, basis);
  orderCoefficients(shat, basis, ordering, plan.rowPerm, plan.colPerm);
  detail::checkPlan(plan, shat.rows(), shat.cols());
  return plan;
}

/// Fraction of coefficients a plan keeps, kept / (M*N).
inline double samplingFraction(const SamplingPlan& plan, Index m, Index n) {
  if (m <= 0 || n <= 0) throw ShapeError("samplingFraction: empty signal shape");
  detail::checkPlan(plan, m, n);
  const Index kept = plan.direction == Direction::blockWise
                         ? plan.keepLayers * plan.keepEntities
                         : plan.keepCount;
  return static_cast<double>(kept) / static_cast<double>(m * n);
}

template <typename Scalar>
struct SampleResult {
  struct Coefficient {
    Index row;  // original spectrum row (layer index)
    Index col;  // original spectrum column (entity index)
    Scalar value;
  };
  std::vector<Coefficient> kept;  // deterministic scan order of the keep rule
  MatrixX<Scalar> recovered;
  Scalar relativeError = 0;
};

/// Spectral sampling: transform, reorder by the plan's permutations, zero
/// everything outside the keep region, undo the reorder, inverse-transform.
/// relativeError is ||s - recovered||_F / ||s||_F (0 for a zero signal).
template <typename Scalar>
SampleResult<Scalar> spectralSample(const MatrixX<Scalar>& s,
                                    const SpectralBasis<Scalar>& basis,
                                    const SamplingPlan& plan) {
  const MatrixX<Scalar> shat = mgft(s, basis);
  const Index m = shat.rows(), n = shat.cols();
  detail::checkPlan(plan, m, n);

  const auto keepAt = [&](Index r, Index c) {
    switch (plan.direction) {
      case Direction::blockWise:
        return r < plan.keepLayers && c < plan.keepEntities;
      case Direction::layerWise:
        return r * n + c < plan.keepCount;
      case Direction::entityWise:
        return c * m + r < plan.keepCount;
    }
    return false;
  };

  SampleResult<Scalar> out;
  MatrixX<Scalar> masked = MatrixX<Scalar>::Zero(m, n);
  const auto emit = [&](Index r, Index c) {
    const Index orow = plan.rowPerm[static_cast<std::size_t>(r)];
    const Index ocol = plan.colPerm[static_cast<std::size_t>(c)];
    masked(orow, ocol) = shat(orow, ocol);
    out.kept.push_back({orow, ocol, shat(orow, ocol)});
  };
  if (plan.direction == Direction::entityWise) {
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < m; ++r)
        if (keepAt(r, c)) emit(r, c);
  } else {
    for (Index r = 0; r < m; ++r)
      for (Index c = 0; c < n; ++c)
        if (keepAt(r, c)) emit(r, c);
  }

  out.recovered = imgft(masked, basis);
  const Scalar denom = s.norm();
  out.relativeError = denom > Scalar(0) ? (s - out.recovered).norm() / denom : Scalar(0);
  return out;
}

/// Plan for a target fraction of kept coefficients.  blockWise fixes the
/// layer count (0 = all layers) and rounds the entity count; the count
/// directions round keepCount = fraction * M * N.
template <typename Scalar>
SamplingPlan planForFraction(const MatrixX<Scalar>& s, const SpectralBasis<Scalar>& basis,
                             Ordering ordering, Direction direction, double fraction,
                             Index blockLayers = 0) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ShapeError("sampling fraction must lie in (0, 1]");
  const Index m = s.rows(), n = s.cols();
  Index keepLayers = 0, keepEntities = 0, keepCount = 0;
  if (direction == Direction::blockWise) {
    keepLayers = blockLayers > 0 ? blockLayers : m;
    if (keepLayers > m) throw ShapeError("blockLayers exceeds layer count");
    keepEntities = std::min<Index>(
        n, static_cast<Index>(std::llround(fraction * static_cast<double>(m * n) /
                                           static_cast<double>(keepLayers))));
  } else {
    keepCount = static_cast<Index>(std::llround(fraction * static_cast<double>(m * n)));
  }
  return makePlan(s, basis, ordering, direction, keepLayers, keepEntities, keepCount);
}

}  // namespace mgsp
