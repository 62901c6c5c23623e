#include "sphereflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace sphereflow {

namespace {

struct EdgeSet {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;  // u < v, unique
  std::vector<double> distances;
};

EdgeSet collect_edges(std::size_t n,
                      const std::vector<std::pair<std::int64_t, std::int64_t>>& raw,
                      const std::vector<Vec3>& centers) {
  EdgeSet out;
  out.edges.reserve(raw.size());
  for (auto [u, v] : raw) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    out.edges.emplace_back(u, v);
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  out.distances.reserve(out.edges.size());
  for (auto [u, v] : out.edges) {
    if (u < 0 || v < 0 || std::size_t(v) >= n) throw std::out_of_range("edge endpoint out of range");
    out.distances.push_back(chord(centers[std::size_t(u)], centers[std::size_t(v)]));
  }
  return out;
}

}  // namespace

SphereGraph::SphereGraph(std::size_t n,
                         const std::vector<std::pair<std::int64_t, std::int64_t>>& edges,
                         double sigma, LaplacianKind kind, const std::vector<double>& distances,
                         double lambda_max_override)
    : n_(n), kind_(kind) {
  if (edges.size() != distances.size()) throw ShapeError("SphereGraph: edges/distances mismatch");

  if (sigma <= 0.0) {
    if (distances.empty()) throw std::invalid_argument("SphereGraph: AUTO sigma needs edges");
    double mean = 0.0;
    for (double d : distances) mean += d;
    sigma = mean / double(distances.size());
  }
  sigma_ = sigma;

  std::vector<std::size_t> counts(n_ + 1, 0);
  for (auto [u, v] : edges) {
    ++counts[std::size_t(u) + 1];
    ++counts[std::size_t(v) + 1];
  }
  row_ptr_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] = row_ptr_[i] + counts[i + 1];
  col_idx_.assign(row_ptr_[n_], 0);
  weights_.assign(row_ptr_[n_], 0.0);

  std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    double d = distances[e];
    double w = std::exp(-(d * d) / (2.0 * sigma_ * sigma_));
    col_idx_[cursor[std::size_t(u)]] = std::int32_t(v);
    weights_[cursor[std::size_t(u)]++] = w;
    col_idx_[cursor[std::size_t(v)]] = std::int32_t(u);
    weights_[cursor[std::size_t(v)]++] = w;
  }
  // Sort columns within each row so the accumulation order is pinned.
  for (std::size_t i = 0; i < n_; ++i) {
    std::size_t lo = row_ptr_[i], hi = row_ptr_[i + 1];
    std::vector<std::pair<std::int32_t, double>> row;
    row.reserve(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) row.emplace_back(col_idx_[j], weights_[j]);
    std::sort(row.begin(), row.end());
    for (std::size_t j = lo; j < hi; ++j) {
      col_idx_[j] = row[j - lo].first;
      weights_[j] = row[j - lo].second;
    }
  }

  degree_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) acc += weights_[j];
    degree_[i] = acc;
  }
  if (kind_ == LaplacianKind::NORMALIZED) {
    std::vector<double> inv_sqrt(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      inv_sqrt[i] = degree_[i] > 0.0 ? 1.0 / std::sqrt(degree_[i]) : 0.0;
    }
    norm_weights_.assign(weights_.size(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) {
        norm_weights_[j] = weights_[j] * inv_sqrt[i] * inv_sqrt[std::size_t(col_idx_[j])];
      }
    }
  }

  build_compact();
  lambda_max_ = lambda_max_override > 0.0 ? lambda_max_override : estimate_lambda_max();
}

void SphereGraph::build_compact() {
  const std::vector<double>& active =
      kind_ == LaplacianKind::NORMALIZED ? norm_weights_ : weights_;
  if (row_ptr_[n_] > std::size_t(std::numeric_limits<std::uint32_t>::max())) return;

  std::map<double, std::uint16_t> lut;
  for (double w : active) {
    auto [it, fresh] = lut.try_emplace(w, std::uint16_t(lut.size()));
    (void)it;
    if (fresh && lut.size() > 65535) return;  // too many distinct values
  }
  weight_table_.resize(lut.size());
  for (const auto& [w, id] : lut) weight_table_[id] = w;
  weight_idx_.reserve(active.size());
  for (double w : active) weight_idx_.push_back(lut[w]);
  row_ptr32_.assign(row_ptr_.begin(), row_ptr_.end());
  compact_ok_ = true;
}

double SphereGraph::weight(std::size_t u, std::size_t v) const {
  for (std::size_t j = row_ptr_[u]; j < row_ptr_[u + 1]; ++j) {
    if (col_idx_[j] == std::int64_t(v)) return weights_[j];
  }
  return 0.0;
}

void SphereGraph::apply_adjacency(const double* x, double* y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) {
      acc += weights_[j] * x[std::size_t(col_idx_[j])];
    }
    y[i] = acc;
  }
}

void SphereGraph::apply(const double* x, double* y) const {
  if (compact_ok_) {
    const std::uint32_t* rp = row_ptr32_.data();
    const std::int32_t* ci = col_idx_.data();
    const std::uint16_t* wi = weight_idx_.data();
    const double* table = weight_table_.data();
    if (kind_ == LaplacianKind::COMBINATORIAL) {
      for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::uint32_t j = rp[i]; j < rp[i + 1]; ++j) {
          acc += table[wi[j]] * x[std::size_t(ci[j])];
        }
        y[i] = degree_[i] * x[i] - acc;
      }
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::uint32_t j = rp[i]; j < rp[i + 1]; ++j) {
          acc += table[wi[j]] * x[std::size_t(ci[j])];
        }
        y[i] = x[i] - acc;
      }
    }
    return;
  }
  if (kind_ == LaplacianKind::COMBINATORIAL) {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) {
        acc += weights_[j] * x[std::size_t(col_idx_[j])];
      }
      y[i] = degree_[i] * x[i] - acc;
    }
  } else {
    // L = I - D^{-1/2} W D^{-1/2}, with the degree scaling folded into the
    // stored weights.
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) {
        acc += norm_weights_[j] * x[std::size_t(col_idx_[j])];
      }
      y[i] = x[i] - acc;
    }
  }
}

void SphereGraph::apply_scaled(const double* x, double* y) const {
  apply(x, y);
  double scale = 2.0 / lambda_max_;
  for (std::size_t i = 0; i < n_; ++i) y[i] = scale * y[i] - x[i];
}

double SphereGraph::estimate_lambda_max() const {
  if (n_ == 0) return 1.0;
  std::vector<double> v(n_), w(n_);
  std::uint64_t st = 0x5eedULL;
  for (std::size_t i = 0; i < n_; ++i) v[i] = 0.5 + double(splitmix64(st) >> 11) * 0x1.0p-53;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  double lambda = 0.0;
  int small_changes = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    apply(v.data(), w.data());
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < n_; ++i) rayleigh += v[i] * w[i];
    norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 1.0;  // L == 0 (no edges, combinatorial)
    for (std::size_t i = 0; i < n_; ++i) v[i] = w[i] / norm;
    double change = std::fabs(rayleigh - lambda) / std::max(std::fabs(rayleigh), 1e-30);
    lambda = rayleigh;
    small_changes = (change < 1e-5) ? small_changes + 1 : 0;
    if (iter >= 50 && small_changes >= 3) break;
  }
  return 1.01 * lambda;
}

void SphereGraph::dump_edges(std::ostream& os) const {
  char buf[96];
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = row_ptr_[i]; j < row_ptr_[i + 1]; ++j) {
      if (col_idx_[j] > std::int64_t(i)) {
        std::snprintf(buf, sizeof(buf), "%zu %lld %.17g\n", i,
                      static_cast<long long>(col_idx_[j]), weights_[j]);
        os << buf;
      }
    }
  }
}

SphereGraph build_healpix_graph(const HealpixSampling& s, NeighborRule rule, double sigma,
                                LaplacianKind kind) {
  if (sigma <= 0.0 && sigma != kSigmaAuto) throw std::invalid_argument("sigma must be > 0 or AUTO");
  const std::size_t n = std::size_t(s.n_pix());
  std::vector<Vec3> centers(n);
  for (std::size_t i = 0; i < n; ++i) centers[i] = s.center(std::int64_t(i));

  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  if (rule.kind == NeighborRule::Kind::HEALPIX_8) {
    raw.reserve(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::int64_t nb : s.neighbors(std::int64_t(i))) raw.emplace_back(std::int64_t(i), nb);
    }
  } else {
    int k = rule.k;
    if (k < 1 || std::size_t(k) >= n) throw std::invalid_argument("KNN: k must be in [1, n)");
    raw.reserve(n * std::size_t(k));
    std::vector<std::pair<double, std::int64_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        dist[j] = {chord(centers[i], centers[j]), std::int64_t(j)};
      }
      dist[i].first = std::numeric_limits<double>::infinity();
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      for (int m = 0; m < k; ++m) raw.emplace_back(std::int64_t(i), dist[std::size_t(m)].second);
    }
  }

  EdgeSet es = collect_edges(n, raw, centers);
  return SphereGraph(n, es.edges, sigma, kind, es.distances);
}

SphereGraph build_patch_graph(const PatchSampling& patch, double sigma, LaplacianKind kind) {
  const HealpixSampling& parent = patch.parent();
  const std::int64_t first = patch.first();
  const std::int64_t len = patch.size();
  std::vector<Vec3> centers(std::size_t(len), Vec3{});
  for (std::int64_t i = 0; i < len; ++i) centers[std::size_t(i)] = patch.center(i);

  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  raw.reserve(std::size_t(len) * 8);
  for (std::int64_t i = 0; i < len; ++i) {
    for (std::int64_t nb : parent.neighbors(first + i)) {
      if (nb >= first && nb < first + len) raw.emplace_back(i, nb - first);
    }
  }
  EdgeSet es = collect_edges(std::size_t(len), raw, centers);
  return SphereGraph(std::size_t(len), es.edges, sigma, kind, es.distances);
}

SphereGraph build_ring_graph(const RingSampling& r) {
  const int n = r.n();
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  edges.reserve(std::size_t(n));
  for (int j = 0; j < n; ++j) edges.emplace_back(j, (j + 1) % n);
  // Zero distances make every kernel weight exactly 1.
  std::vector<double> distances(std::size_t(n), 0.0);
  return SphereGraph(std::size_t(n), edges, 1.0, LaplacianKind::COMBINATORIAL, distances);
}

MapSignal laplacian_apply(const SphereGraph& g, const MapSignal& x) {
  if (x.n != g.n()) throw ShapeError("laplacian_apply: signal length != vertex count");
  MapSignal y(x.n, x.channels);
  for (std::size_t c = 0; c < x.channels; ++c) g.apply(x.channel(c), y.channel(c));
  return y;
}

bool is_connected(const SphereGraph& g) {
  if (g.n() == 0) return true;
  std::vector<char> seen(g.n(), 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t visited = 1;
  const auto& rp = g.row_ptr();
  const auto& ci = g.col_idx();
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t j = rp[u]; j < rp[u + 1]; ++j) {
      auto v = std::size_t(ci[j]);
      if (!seen[v]) {
        seen[v] = 1;
        ++visited;
        q.push(v);
      }
    }
  }
  return visited == g.n();
}

}  // namespace sphereflow
