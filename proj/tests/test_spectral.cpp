#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sphereflow/spectral.hpp"

using namespace sphereflow;

namespace {

// Circulant oracle for the cycle graph: eigenvalues 2 - 2 cos(2 pi k / n).
std::vector<double> circulant_eigenvalues(int n) {
  std::vector<double> v(std::size_t(n), 0.0);
  for (int k = 0; k < n; ++k) v[std::size_t(k)] = 2.0 - 2.0 * std::cos(kTwoPi * k / n);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("ring spectrum matches the circulant formula") {
  for (int n : {3, 8, 12}) {
    SphereGraph g = build_ring_graph(RingSampling(n));
    SpectralBasis basis = eigendecompose(g);
    std::vector<double> expected = circulant_eigenvalues(n);
    for (int k = 0; k < n; ++k) {
      CHECK(std::fabs(basis.eigenvalues[std::size_t(k)] - expected[std::size_t(k)]) < 1e-10);
    }
  }
}

TEST_CASE("triangle ring has spectrum {0, 3, 3}") {
  SpectralBasis basis = eigendecompose(build_ring_graph(RingSampling(3)));
  CHECK(basis.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(basis.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("basis invariants: residual, orthonormality, ascending, zero mode") {
  HealpixSampling s(2, Ordering::RING);
  for (LaplacianKind kind : {LaplacianKind::COMBINATORIAL, LaplacianKind::NORMALIZED}) {
    SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto, kind);
    SpectralBasis basis = eigendecompose(g);
    const std::size_t n = basis.n();

    CHECK(basis.eigenvalues[0] > -1e-10);
    CHECK(basis.eigenvalues[0] < 1e-9);  // connected graph
    for (std::size_t k = 0; k + 1 < n; ++k) {
      CHECK(basis.eigenvalues[k] <= basis.eigenvalues[k + 1]);
    }

    // ||L u_k - lambda_k u_k|| via the sparse operator
    std::vector<double> u(n), lu(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) u[i] = basis.eigenvectors(i, k);
      g.apply(u.data(), lu.data());
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = lu[i] - basis.eigenvalues[k] * u[i];
        res += d * d;
      }
      CHECK(std::sqrt(res) < 1e-7 * std::max(1.0, basis.eigenvalues[k]));
    }

    // ||U^T U - I||_max
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += basis.eigenvectors(i, a) * basis.eigenvectors(i, b);
        worst = std::max(worst, std::fabs(dot - (a == b ? 1.0 : 0.0)));
      }
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("normalized spectrum lies in [0, 2] at n_side=4") {
  HealpixSampling s(4, Ordering::RING);
  SpectralBasis basis = eigendecompose(build_healpix_graph(s));
  CHECK(basis.eigenvalues.front() > -1e-10);
  CHECK(basis.eigenvalues.back() <= 2.0 + 1e-10);
}

TEST_CASE("constant vector is the zero-eigenvalue eigenvector (combinatorial)") {
  HealpixSampling s(2, Ordering::RING);
  SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto,
                                      LaplacianKind::COMBINATORIAL);
  SpectralBasis basis = eigendecompose(g);
  double first = basis.eigenvectors(0, 0);
  CHECK(std::fabs(first) > 1e-6);
  for (std::size_t i = 1; i < basis.n(); ++i) {
    CHECK(basis.eigenvectors(i, 0) == doctest::Approx(first).epsilon(1e-8));
  }
}

TEST_CASE("gft/igft: unit coefficients, round trip, Parseval") {
  HealpixSampling s(2, Ordering::RING);
  SphereGraph g = build_healpix_graph(s);
  SpectralBasis basis = eigendecompose(g);
  const std::size_t n = basis.n();

  SUBCASE("eigenvector analyzes to a unit coefficient vector") {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = basis.eigenvectors(i, 3);
    std::vector<double> c = gft(basis, u);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::fabs(c[k] - (k == 3 ? 1.0 : 0.0)) < 1e-9);
    }
  }

  SUBCASE("round trip and Parseval on random signals") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> x(n);
      for (double& v : x) v = rng.normal();
      std::vector<double> c = gft(basis, x);
      std::vector<double> back = igft(basis, c);
      double nx = 0.0, nc = 0.0, err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nx += x[i] * x[i];
        nc += c[i] * c[i];
        err += (back[i] - x[i]) * (back[i] - x[i]);
      }
      CHECK(std::sqrt(err) < 1e-9);
      CHECK(std::sqrt(nx) == doctest::Approx(std::sqrt(nc)).epsilon(1e-9));
    }
  }

  SUBCASE("shape errors") {
    std::vector<double> bad(n + 1, 0.0);
    CHECK_THROWS_AS(gft(basis, bad), ShapeError);
    CHECK_THROWS_AS(igft(basis, bad), ShapeError);
  }
}

TEST_CASE("capacity error above the dense limit") {
  // Construct a fake large graph cheaply: ring with n > 4096.
  SphereGraph g = build_ring_graph(RingSampling(4097));
  CHECK_THROWS_AS(eigendecompose(g), CapacityError);
}

TEST_CASE("degree blocks on the sphere graph at n_side=4") {
  HealpixSampling s(4, Ordering::RING);
  SphereGraph g = build_healpix_graph(s);
  SpectralBasis basis = eigendecompose(g);
  DegreeBlocks blocks = detect_degree_blocks(basis);

  CHECK(blocks.ell_max >= 8);
  CHECK(blocks.diagnostic.empty());
  for (int l = 0; l <= blocks.ell_max; ++l) {
    CHECK(blocks.group_size(l) == std::size_t(2 * l + 1));
  }
  CHECK(blocks.group_begin(0) == 0);
  CHECK(blocks.group_end(0) == 1);  // first block is the single zero mode
}

TEST_CASE("block detection is invariant to uniform eigenvalue scaling") {
  HealpixSampling s(4, Ordering::RING);
  SpectralBasis basis = eigendecompose(build_healpix_graph(s));
  DegreeBlocks a = detect_degree_blocks(basis);
  SpectralBasis scaled = basis;
  for (double& v : scaled.eigenvalues) v *= 37.5;
  DegreeBlocks b = detect_degree_blocks(scaled);
  CHECK(a.boundaries == b.boundaries);
  CHECK(a.ell_max == b.ell_max);
}

TEST_CASE("ring graph: degenerate pairs, no 2l+1 structure") {
  SpectralBasis basis = eigendecompose(build_ring_graph(RingSampling(16)));
  // Doubly degenerate away from k = 0 and k = n/2.
  for (std::size_t k = 1; k + 2 < basis.n(); k += 2) {
    CHECK(basis.eigenvalues[k] == doctest::Approx(basis.eigenvalues[k + 1]).epsilon(1e-10));
  }
  DegreeBlocks blocks = detect_degree_blocks(basis);
  CHECK(blocks.ell_max == 0);
  CHECK(!blocks.diagnostic.empty());
}

TEST_CASE("nominal blocks partition by (l+1)^2") {
  DegreeBlocks blocks = nominal_degree_blocks(192, 8);
  CHECK(blocks.ell_max == 8);
  for (int l = 0; l <= 8; ++l) CHECK(blocks.group_size(l) == std::size_t(2 * l + 1));
  CHECK_THROWS_AS(nominal_degree_blocks(80, 8), std::invalid_argument);
}
