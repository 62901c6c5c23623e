#include "sphereflow/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace sphereflow {

SpectralBasis eigendecompose(const SphereGraph& g) {
  const std::size_t n = g.n();
  if (n > 4096) {
    throw CapacityError(
        "eigendecompose: n > 4096; use a partial decomposition for larger graphs");
  }
  // Densify L column by column through the sparse operator.
  Matrix dense(n, n);
  std::vector<double> e(n, 0.0), col(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    g.apply(e.data(), col.data());
    for (std::size_t i = 0; i < n; ++i) dense(i, j) = col[i];
    e[j] = 0.0;
  }
  // Symmetrize rounding noise before factoring.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (dense(i, j) + dense(j, i));
      dense(i, j) = dense(j, i) = v;
    }
  }

  EigenDecomposition eig = symmetric_eigen(std::move(dense));
  return SpectralBasis{std::move(eig.values), std::move(eig.vectors)};
}

std::vector<double> gft(const SpectralBasis& b, const std::vector<double>& x) {
  if (x.size() != b.n()) throw ShapeError("gft: signal length != basis size");
  std::vector<double> out(b.n(), 0.0);
  b.eigenvectors.matvec_transposed(x.data(), out.data());
  return out;
}

std::vector<double> igft(const SpectralBasis& b, const std::vector<double>& coeffs) {
  if (coeffs.size() != b.n()) throw ShapeError("igft: coefficient length != basis size");
  std::vector<double> out(b.n(), 0.0);
  b.eigenvectors.matvec(coeffs.data(), out.data());
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  return (v.size() % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

DegreeBlocks detect_degree_blocks(const SpectralBasis& b, double gap_factor) {
  const std::size_t n = b.n();
  std::vector<double> gaps(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = b.eigenvalues[i + 1] - b.eigenvalues[i];

  DegreeBlocks blocks;
  blocks.boundaries = {0};

  int ell = 0;
  while (true) {
    std::size_t end = std::size_t(ell + 1) * std::size_t(ell + 1);
    if (end >= n) break;  // next group would be incomplete
    // Gap at the nominal boundary vs the median gap in a window around it.
    double boundary_gap = gaps[end - 1];
    std::size_t w = std::size_t(2 * ell + 3);
    std::size_t lo = end > w ? end - w : 1;
    std::size_t hi = std::min(n - 1, end + w);
    std::vector<double> window;
    window.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      if (i != end) window.push_back(gaps[i - 1]);
    }
    double med = median_of(std::move(window));
    bool confirmed = med > 0.0 ? boundary_gap > gap_factor * med : boundary_gap > 0.0;
    if (!confirmed) break;
    blocks.boundaries.push_back(end);
    ++ell;
  }

  if (ell == 0) {
    blocks.boundaries = {0, std::min<std::size_t>(1, n)};
    blocks.ell_max = 0;
    blocks.diagnostic = "no 2l+1 block structure detected beyond the first eigenvalue";
    return blocks;
  }
  // The last confirmed boundary closes group ell-1.
  blocks.ell_max = ell - 1;
  blocks.diagnostic.clear();
  return blocks;
}

DegreeBlocks nominal_degree_blocks(std::size_t n, int ell_max) {
  std::size_t need = std::size_t(ell_max + 1) * std::size_t(ell_max + 1);
  if (need > n) throw std::invalid_argument("nominal_degree_blocks: not enough eigenvalues");
  DegreeBlocks blocks;
  blocks.ell_max = ell_max;
  blocks.boundaries.resize(std::size_t(ell_max) + 2);
  for (int l = 0; l <= ell_max + 1; ++l) {
    blocks.boundaries[std::size_t(l)] = std::size_t(l) * std::size_t(l);
  }
  return blocks;
}

}  // namespace sphereflow
