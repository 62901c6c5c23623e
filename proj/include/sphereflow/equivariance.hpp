#ifndef SPHEREFLOW_EQUIVARIANCE_HPP
#define SPHEREFLOW_EQUIVARIANCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sphereflow/cheb.hpp"
#include "sphereflow/harmonics.hpp"
#include "sphereflow/spectral.hpp"

namespace sphereflow {

// A[l][l'] = fraction of the energy of graph-eigenvector group l' that the
// SHT attributes to spherical-harmonic degree l.
struct AlignmentMatrix {
  int ell_max = 0;
  Matrix a;  // (ell_max+1) x (ell_max+1), rows = harmonic degree, cols = group

  double diagonal_mean(int up_to_ell) const;
};

// Column normalization: kCaptured divides by the energy the analysis band
// captured (used columns sum to exactly 1); kUnit divides by the group's true
// energy (orthonormal eigenvectors carry 4 pi / n each), so leakage beyond
// the band lowers the column sum. kUnit is the right scale for comparing
// resolutions; kCaptured makes self-alignment exactly the identity.
enum class AlignmentNormalization { kCaptured, kUnit };

AlignmentMatrix alignment_matrix(const SpectralBasis& basis, const DegreeBlocks& blocks,
                                 const HarmonicBasis& hb, bool row_normalize = false,
                                 AlignmentNormalization norm = AlignmentNormalization::kCaptured);

// Mean over trials of ||conv(R x) - R conv(x)|| / ||conv(x)|| with
// R = synthesis . rotate_z(phi0) . analysis and x random signals
// band-limited to signal_ell_max (default: the analysis band of hb).
double equivariance_error(const SphereGraph& g, const ChebFilterBank& bank,
                          const HarmonicBasis& hb, double phi0, int trials, std::uint64_t seed,
                          int signal_ell_max = -1);

struct CircleDftReport {
  double max_eigenvalue_error = 0.0;   // vs 2 - 2 cos(2 pi k / n)
  double max_subspace_residual = 0.0;  // eigenvectors vs cos/sin DFT pairs
  double max_shift_residual = 0.0;     // ||conv(Sx) - S conv(x)||_inf
  bool passed(double ev_tol = 1e-10, double sub_tol = 1e-9, double shift_tol = 1e-10) const {
    return max_eigenvalue_error < ev_tol && max_subspace_residual < sub_tol &&
           max_shift_residual < shift_tol;
  }
};

// The exactness checks for the regularly sampled circle: circulant spectrum,
// DFT eigen-subspaces, and exact shift equivariance of Chebyshev filters.
CircleDftReport circle_dft_check(const RingSampling& r, std::uint64_t seed = 7);

}  // namespace sphereflow

#endif  // SPHEREFLOW_EQUIVARIANCE_HPP
