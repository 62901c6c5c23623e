#ifndef SPHEREFLOW_SPECTRAL_HPP
#define SPHEREFLOW_SPECTRAL_HPP

#include <string>
#include <vector>

#include "sphereflow/graph.hpp"
#include "sphereflow/linalg.hpp"

namespace sphereflow {

// Full eigendecomposition of a graph Laplacian: eigenvalues ascending,
// orthonormal eigenvector columns.
struct SpectralBasis {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;  // n x n, column k pairs with eigenvalues[k]

  std::size_t n() const { return eigenvalues.size(); }
};

// Consecutive eigenvalue groups of nominal size 2l+1 (degree blocks).
// boundaries[l] is the first eigenvalue index of group l, so group l covers
// [boundaries[l], boundaries[l+1]); boundaries has ell_max+2 entries.
struct DegreeBlocks {
  std::vector<std::size_t> boundaries;
  int ell_max = 0;
  std::string diagnostic;  // non-empty when no structure was found

  std::size_t group_begin(int ell) const { return boundaries[std::size_t(ell)]; }
  std::size_t group_end(int ell) const { return boundaries[std::size_t(ell) + 1]; }
  std::size_t group_size(int ell) const { return group_end(ell) - group_begin(ell); }
};

// Dense symmetric eigendecomposition of the Laplacian. Desk-scale: n <= 4096.
SpectralBasis eigendecompose(const SphereGraph& g);

// Graph Fourier transform: coefficients = U^T x (per channel), and inverse.
std::vector<double> gft(const SpectralBasis& b, const std::vector<double>& x);
std::vector<double> igft(const SpectralBasis& b, const std::vector<double>& coeffs);

// Greedy scan for the 2l+1 grouping: a block boundary at nominal index
// (l+1)^2 is confirmed when the eigenvalue gap there exceeds gap_factor
// times the median gap in a local window. Returns the largest ell such that
// every group below it matched its nominal size; ell_max == 0 with a
// diagnostic when nothing beyond the trivial first group is detectable.
DegreeBlocks detect_degree_blocks(const SpectralBasis& b, double gap_factor = 3.0);

// Nominal partition [l^2, (l+1)^2) up to ell_max, no gap checks. Used where
// groups are taken by position, as in the subspace alignment analysis.
DegreeBlocks nominal_degree_blocks(std::size_t n, int ell_max);

}  // namespace sphereflow

#endif  // SPHEREFLOW_SPECTRAL_HPP
