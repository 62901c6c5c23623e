#ifndef SPHEREFLOW_GRAPH_HPP
#define SPHEREFLOW_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sphereflow/core.hpp"
#include "sphereflow/sampling.hpp"

namespace sphereflow {

enum class LaplacianKind { COMBINATORIAL, NORMALIZED };

struct NeighborRule {
  enum class Kind { HEALPIX_8, KNN } kind = Kind::HEALPIX_8;
  int k = 8;  // used by KNN

  static NeighborRule healpix8() { return {Kind::HEALPIX_8, 8}; }
  static NeighborRule knn(int k) { return {Kind::KNN, k}; }
};

// sigma <= 0 selects AUTO (mean neighbour distance).
inline constexpr double kSigmaAuto = -1.0;

// Weighted undirected pixel graph with row-compressed adjacency. Immutable
// after construction; apply() is pure and deterministic (fixed per-row
// accumulation order over sorted column indices).
class SphereGraph {
 public:
  // lambda_max_override > 0 skips the power-iteration estimate (used when a
  // relabeled copy must share the exact Chebyshev scaling of the original).
  SphereGraph(std::size_t n, const std::vector<std::pair<std::int64_t, std::int64_t>>& edges,
              double sigma, LaplacianKind kind, const std::vector<double>& distances,
              double lambda_max_override = 0.0);

  std::size_t n() const { return n_; }
  std::size_t edge_count() const { return weights_.size() / 2; }  // undirected
  double sigma() const { return sigma_; }
  LaplacianKind laplacian_kind() const { return kind_; }
  double lambda_max() const { return lambda_max_; }

  double weight(std::size_t u, std::size_t v) const;
  double degree(std::size_t u) const { return degree_[u]; }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& weights() const { return weights_; }

  // y = L x for one channel of length n.
  void apply(const double* x, double* y) const;
  // y = W x (adjacency only).
  void apply_adjacency(const double* x, double* y) const;
  // y = (2/lambda_max) L x - x; spectrum of the implied operator is in [-1, 1].
  void apply_scaled(const double* x, double* y) const;

  // Writes `u v w` per line (u < v), 17 significant digits.
  void dump_edges(std::ostream& os) const;

 private:
  void build_compact();

  std::size_t n_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::int32_t> col_idx_;  // 32-bit keeps the hot CSR stream compact
  std::vector<double> weights_;
  std::vector<double> norm_weights_;  // w_ij / sqrt(d_i d_j), NORMALIZED only
  std::vector<double> degree_;
  // Dictionary-compressed apply path: HEALPix kernels repeat the same few
  // weight values, so the hot stream stores 2-byte table indices. Values are
  // the exact doubles of the plain path, so results are bit-identical.
  bool compact_ok_ = false;
  std::vector<std::uint32_t> row_ptr32_;
  std::vector<std::uint16_t> weight_idx_;
  std::vector<double> weight_table_;
  double sigma_;
  LaplacianKind kind_;
  double lambda_max_;

  double estimate_lambda_max() const;
};

SphereGraph build_healpix_graph(const HealpixSampling& s,
                                NeighborRule rule = NeighborRule::healpix8(),
                                double sigma = kSigmaAuto,
                                LaplacianKind kind = LaplacianKind::NORMALIZED);

// Induced subgraph of the HEALPIX_8 tessellation on the patch pixels,
// reweighted with the patch's own mean neighbour distance when sigma is AUTO.
SphereGraph build_patch_graph(const PatchSampling& patch,
                              double sigma = kSigmaAuto,
                              LaplacianKind kind = LaplacianKind::NORMALIZED);

// Cycle graph with unit weights; combinatorial Laplacian is circulant.
SphereGraph build_ring_graph(const RingSampling& r);

// L x per channel.
MapSignal laplacian_apply(const SphereGraph& g, const MapSignal& x);

// Cached upper bound on the largest Laplacian eigenvalue (power iteration
// inflated by 1%).
inline double estimate_lambda_max(const SphereGraph& g) { return g.lambda_max(); }

bool is_connected(const SphereGraph& g);

}  // namespace sphereflow

#endif  // SPHEREFLOW_GRAPH_HPP
