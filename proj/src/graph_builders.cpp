#include "mgsp/graph_builders.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "mgsp/kmeans.hpp"

namespace mgsp {

LayerClustering clusterFramesToLayers(const ImageCube& cube, int layers,
                                      std::uint64_t seed) {
  const Index b = cube.bandCount();
  if (layers < 1) throw ShapeError("clusterFramesToLayers: layers must be >= 1");
  if (layers > b)
    throw ShapeError("clusterFramesToLayers: more layers (" + std::to_string(layers) +
                     ") than bands (" + std::to_string(b) + ")");
  const Index h = cube.height(), w = cube.width();
  Eigen::MatrixXd points(b, h * w);
  for (Index k = 0; k < b; ++k)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x)
        points(k, y * w + x) = cube.bands[static_cast<std::size_t>(k)](y, x);

  KMeansOptions opts;
  opts.restarts = 5;
  opts.maxIter = 100;
  const KMeansResult km = kmeans(points, layers, seed, opts);

  // Canonical cluster numbers: order of first appearance over band index.
  std::vector<int> renumber(static_cast<std::size_t>(layers), -1);
  int next = 0;
  for (Index k = 0; k < b; ++k) {
    int& slot = renumber[static_cast<std::size_t>(km.labels[static_cast<std::size_t>(k)])];
    if (slot < 0) slot = next++;
  }

  LayerClustering out;
  out.assignment.resize(static_cast<std::size_t>(b));
  out.layerSignals.assign(static_cast<std::size_t>(layers), Eigen::MatrixXd::Zero(h, w));
  std::vector<Index> counts(static_cast<std::size_t>(layers), 0);
  for (Index k = 0; k < b; ++k) {
    const int lbl = renumber[static_cast<std::size_t>(km.labels[static_cast<std::size_t>(k)])];
    out.assignment[static_cast<std::size_t>(k)] = lbl;
    out.layerSignals[static_cast<std::size_t>(lbl)] += cube.bands[static_cast<std::size_t>(k)];
    ++counts[static_cast<std::size_t>(lbl)];
  }
  for (int c = 0; c < layers; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0)
      out.layerSignals[static_cast<std::size_t>(c)] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  return out;
}

namespace {

struct SlicState {
  Eigen::VectorXd cy, cx, ci;  // cluster centers: row, col, intensity
};

}  // namespace

SuperpixelMap computeSuperpixels(const Eigen::MatrixXd& intensity, Index count,
                                 std::uint64_t seed) {
  const Index h = intensity.rows(), w = intensity.cols();
  if (count < 1) throw ShapeError("computeSuperpixels: count must be >= 1");
  if (count > h * w)
    throw ShapeError("computeSuperpixels: more superpixels than pixels");
  (void)seed;  // deterministic grid seeding; kept for interface symmetry

  const double cell = std::sqrt(static_cast<double>(h * w) / static_cast<double>(count));
  const double compactness = 10.0;

  // Grid seeding: gr x gc cell centers, first `count` in row-major order.
  Index gr = static_cast<Index>(std::lround(
      std::sqrt(static_cast<double>(count) * static_cast<double>(h) / static_cast<double>(w))));
  gr = std::clamp<Index>(gr, 1, std::min<Index>(count, h));
  Index gc = (count + gr - 1) / gr;
  while (gc > w && gr < std::min<Index>(count, h)) {
    ++gr;
    gc = (count + gr - 1) / gr;
  }
  if (gc > w) throw ShapeError("computeSuperpixels: count does not fit the image");

  SlicState st;
  st.cy.resize(count);
  st.cx.resize(count);
  st.ci.resize(count);
  for (Index k = 0; k < count; ++k) {
    const Index r = k / gc, c = k % gc;
    // Seed at the centroid of the ideal grid cell (fractional) so midline
    // pixels are never equidistant from two seeds on flat images.
    st.cy[k] = (static_cast<double>(r) + 0.5) * static_cast<double>(h) / static_cast<double>(gr) - 0.5;
    st.cx[k] = (static_cast<double>(c) + 0.5) * static_cast<double>(w) / static_cast<double>(gc) - 0.5;
    const Index y = std::clamp<Index>(static_cast<Index>(std::lround(st.cy[k])), 0, h - 1);
    const Index x = std::clamp<Index>(static_cast<Index>(std::lround(st.cx[k])), 0, w - 1);
    st.ci[k] = intensity(y, x);
  }

  Eigen::MatrixXi labels(h, w);
  const auto dist2 = [&](Index y, Index x, Index k) {
    const double dy = (static_cast<double>(y) - st.cy[k]) / cell;
    const double dx = (static_cast<double>(x) - st.cx[k]) / cell;
    const double di = (intensity(y, x) - st.ci[k]) * compactness;
    return dy * dy + dx * dx + di * di;
  };
  for (int iter = 0; iter < 10; ++iter) {
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        Index bestK = 0;
        double bestD = dist2(y, x, 0);
        for (Index k = 1; k < count; ++k) {
          const double d = dist2(y, x, k);
          if (d < bestD) {
            bestD = d;
            bestK = k;
          }
        }
        labels(y, x) = static_cast<int>(bestK);
      }
    Eigen::VectorXd sy = Eigen::VectorXd::Zero(count), sx = sy, si = sy, cnt = sy;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        const Index k = labels(y, x);
        sy[k] += static_cast<double>(y);
        sx[k] += static_cast<double>(x);
        si[k] += intensity(y, x);
        cnt[k] += 1.0;
      }
    for (Index k = 0; k < count; ++k) {
      if (cnt[k] > 0) {
        st.cy[k] = sy[k] / cnt[k];
        st.cx[k] = sx[k] / cnt[k];
        st.ci[k] = si[k] / cnt[k];
      }
      // An emptied cluster keeps its stale center and may re-acquire pixels.
    }
  }

  // Guarantee every label owns at least one pixel: give an empty label the
  // worst-fit pixel from a multi-pixel label, lowest pixel index on ties.
  {
    Eigen::VectorXi cnt = Eigen::VectorXi::Zero(count);
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) ++cnt[labels(y, x)];
    for (Index k = 0; k < count; ++k) {
      if (cnt[k] > 0) continue;
      Index pick = -1;
      double worst = -1;
      for (Index p = 0; p < h * w; ++p) {
        const Index y = p / w, x = p % w;
        if (cnt[labels(y, x)] < 2) continue;
        const double d = dist2(y, x, labels(y, x));
        if (d > worst) {
          worst = d;
          pick = p;
        }
      }
      if (pick < 0) throw ShapeError("computeSuperpixels: cannot place all superpixels");
      --cnt[labels(pick / w, pick % w)];
      labels(pick / w, pick % w) = static_cast<int>(k);
      ++cnt[k];
    }
  }

  // Connectivity cleanup: keep each label's largest 4-connected component
  // (lowest first pixel on ties), then flood the orphans from the kept
  // regions in deterministic BFS order.
  {
    Eigen::MatrixXi comp = Eigen::MatrixXi::Constant(h, w, -1);
    struct CompInfo {
      int label;
      Index size;
      Index firstPixel;
    };
    std::vector<CompInfo> comps;
    for (Index p = 0; p < h * w; ++p) {
      const Index y0 = p / w, x0 = p % w;
      if (comp(y0, x0) >= 0) continue;
      const int id = static_cast<int>(comps.size());
      comps.push_back({labels(y0, x0), 0, p});
      std::deque<Index> queue{p};
      comp(y0, x0) = id;
      while (!queue.empty()) {
        const Index q = queue.front();
        queue.pop_front();
        ++comps[static_cast<std::size_t>(id)].size;
        const Index y = q / w, x = q % w;
        const Index nb[4][2] = {{y - 1, x}, {y, x - 1}, {y, x + 1}, {y + 1, x}};
        for (const auto& yx : nb) {
          if (yx[0] < 0 || yx[0] >= h || yx[1] < 0 || yx[1] >= w) continue;
          if (comp(yx[0], yx[1]) >= 0 || labels(yx[0], yx[1]) != labels(y, x)) continue;
          comp(yx[0], yx[1]) = id;
          queue.push_back(yx[0] * w + yx[1]);
        }
      }
    }
    std::vector<int> keep(static_cast<std::size_t>(count), -1);
    for (int id = 0; id < static_cast<int>(comps.size()); ++id) {
      const auto& c = comps[static_cast<std::size_t>(id)];
      int& cur = keep[static_cast<std::size_t>(c.label)];
      if (cur < 0) {
        cur = id;
        continue;
      }
      const auto& held = comps[static_cast<std::size_t>(cur)];
      if (c.size > held.size || (c.size == held.size && c.firstPixel < held.firstPixel))
        cur = id;
    }
    Eigen::MatrixXi cleaned = Eigen::MatrixXi::Constant(h, w, -1);
    std::deque<Index> frontier;
    for (Index p = 0; p < h * w; ++p) {
      const Index y = p / w, x = p % w;
      if (keep[static_cast<std::size_t>(labels(y, x))] == comp(y, x)) {
        cleaned(y, x) = labels(y, x);
        frontier.push_back(p);
      }
    }
    while (!frontier.empty()) {
      const Index q = frontier.front();
      frontier.pop_front();
      const Index y = q / w, x = q % w;
      const Index nb[4][2] = {{y - 1, x}, {y, x - 1}, {y, x + 1}, {y + 1, x}};
      for (const auto& yx : nb) {
        if (yx[0] < 0 || yx[0] >= h || yx[1] < 0 || yx[1] >= w) continue;
        if (cleaned(yx[0], yx[1]) >= 0) continue;
        cleaned(yx[0], yx[1]) = cleaned(y, x);
        frontier.push_back(yx[0] * w + yx[1]);
      }
    }
    labels = cleaned;
  }

  SuperpixelMap out;
  out.count = count;
  out.labels.resize(h, w);
  Eigen::VectorXd sy = Eigen::VectorXd::Zero(count), sx = sy, si = sy, cnt = sy;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      out.labels(y, x) = labels(y, x) + 1;
      const Index k = labels(y, x);
      sy[k] += static_cast<double>(y);
      sx[k] += static_cast<double>(x);
      si[k] += intensity(y, x);
      cnt[k] += 1.0;
    }
  out.features.resize(count, 3);
  for (Index k = 0; k < count; ++k) {
    out.features(k, 0) = si[k] / cnt[k];
    out.features(k, 1) = sx[k] / cnt[k] / static_cast<double>(w);
    out.features(k, 2) = sy[k] / cnt[k] / static_cast<double>(h);
  }
  return out;
}

Eigen::MatrixXd superpixelLayerFeatures(const LayerClustering& clustering,
                                        const SuperpixelMap& superpixels) {
  const Index m = static_cast<Index>(clustering.layerSignals.size());
  const Index n = superpixels.count;
  if (m == 0 || n == 0) throw ShapeError("superpixelLayerFeatures: empty inputs");
  const Index h = superpixels.labels.rows(), w = superpixels.labels.cols();
  Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const Index i = superpixels.labels(y, x) - 1;
      if (i < 0 || i >= n) throw ShapeError("superpixelLayerFeatures: label out of range");
      cnt[i] += 1.0;
      for (Index a = 0; a < m; ++a)
        feats(a, i) += clustering.layerSignals[static_cast<std::size_t>(a)](y, x);
    }
  for (Index i = 0; i < n; ++i) {
    if (cnt[i] == 0) throw ShapeError("superpixelLayerFeatures: empty superpixel");
    feats.col(i) /= cnt[i];
  }
  return feats;
}

namespace {

double medianOf(std::vector<double>& v, double fallback) {
  if (v.empty()) return fallback;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double med = v[mid];
  if (v.size() % 2 == 0) {
    const auto lo = std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + *lo);
  }
  return med > 0 ? med : fallback;
}

}  // namespace

MultilayerGraph<double> gaussianMlg(const LayerClustering& clustering,
                                    const SuperpixelMap& superpixels,
                                    const GaussianMlgOptions& options) {
  const Eigen::MatrixXd sig = superpixelLayerFeatures(clustering, superpixels);
  const Index m = sig.rows(), n = sig.cols();

  // Intralayer features: signal plus normalized centroid.
  std::vector<Eigen::MatrixXd> feat(static_cast<std::size_t>(m));
  for (Index a = 0; a < m; ++a) {
    Eigen::MatrixXd f(n, 3);
    f.col(0) = sig.row(a).transpose();
    f.col(1) = superpixels.features.col(1);
    f.col(2) = superpixels.features.col(2);
    feat[static_cast<std::size_t>(a)] = std::move(f);
  }

  double sigmaIntra = options.sigmaIntra;
  if (sigmaIntra <= 0) {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m * n * (n - 1) / 2));
    for (Index a = 0; a < m; ++a)
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          dists.push_back((feat[static_cast<std::size_t>(a)].row(i) -
                           feat[static_cast<std::size_t>(a)].row(j))
                              .norm());
    sigmaIntra = medianOf(dists, 1.0);
  }
  double sigmaInter = options.sigmaInter;
  if (sigmaInter <= 0 && m > 1) {
    std::vector<double> gaps;
    for (Index a = 0; a < m; ++a)
      for (Index b = a + 1; b < m; ++b)
        for (Index i = 0; i < n; ++i) gaps.push_back(std::abs(sig(a, i) - sig(b, i)));
    sigmaInter = medianOf(gaps, 1.0);
  }
  if (sigmaInter <= 0) sigmaInter = 1.0;

  Tensor4<double> t(m, n);
  for (Index a = 0; a < m; ++a) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const double d = (feat[static_cast<std::size_t>(a)].row(i) -
                          feat[static_cast<std::size_t>(a)].row(j))
                             .norm();
        const double wij = std::exp(-(d * d) / (sigmaIntra * sigmaIntra));
        w(i, j) = wij;
        w(j, i) = wij;
      }
    // Symmetric k-NN pruning: keep (i,j) if j is among i's strongest knn or
    // vice versa; ties resolved toward lower index by the stable sort.
    Eigen::MatrixXd kept = w;
    if (options.knn > 0 && options.knn < n - 1) {
      Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(n, n);
      std::vector<Index> order(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Index(0));
        std::stable_sort(order.begin(), order.end(),
                         [&](Index p, Index q) { return w(i, p) > w(i, q); });
        Index taken = 0;
        for (Index j : order) {
          if (j == i) continue;
          mask(i, j) = 1;
          if (++taken == options.knn) break;
        }
      }
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          if (!mask(i, j) && !mask(j, i)) kept(i, j) = 0.0;
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) t(a, i, a, j) = kept(i, j);
  }

  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) {
      if (a == b) continue;
      if (!options.crossEntityInterlayer) {
        for (Index i = 0; i < n; ++i) {
          const double gap = sig(a, i) - sig(b, i);
          t(a, i, b, i) = std::exp(-(gap * gap) / (sigmaInter * sigmaInter));
        }
      } else {
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j) {
            const double d = (feat[static_cast<std::size_t>(a)].row(i) -
                              feat[static_cast<std::size_t>(b)].row(j))
                                 .norm();
            t(a, i, b, j) = std::exp(-(d * d) / (sigmaInter * sigmaInter));
          }
      }
    }

  return MultilayerGraph<double>::adjacency(std::move(t));
}

}  // namespace mgsp
