#include <doctest.h>

#include <cmath>
#include <vector>

#include "sphereflow/cheb.hpp"
#include "sphereflow/linalg.hpp"
#include "sphereflow/sampling.hpp"
#include "sphereflow/spectral.hpp"

using namespace sphereflow;

namespace {

// Dense oracle: materialize T_k(L~) as explicit matrices.
std::vector<Matrix> dense_cheb_basis(const SphereGraph& g, int order) {
  const std::size_t n = g.n();
  Matrix lt(n, n);
  std::vector<double> e(n, 0.0), col(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    g.apply_scaled(e.data(), col.data());
    for (std::size_t i = 0; i < n; ++i) lt(i, j) = col[i];
    e[j] = 0.0;
  }
  std::vector<Matrix> t;
  t.push_back(Matrix::identity(n));
  if (order > 1) t.push_back(lt);
  for (int k = 2; k < order; ++k) {
    Matrix next(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += lt(i, m) * t[std::size_t(k - 1)](m, j);
        next(i, j) = 2.0 * acc - t[std::size_t(k - 2)](i, j);
      }
    }
    t.push_back(next);
  }
  return t;
}

double frobenius_diff(const MapSignal& a, const MapSignal& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::fabs(a.values[i] - b.values[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("scaled operator: spectrum in [-1,1], symmetry, constant vector") {
  HealpixSampling s(2, Ordering::RING);

  SUBCASE("eigenvalues of the scaled operator stay within [-1, 1]") {
    for (LaplacianKind kind : {LaplacianKind::COMBINATORIAL, LaplacianKind::NORMALIZED}) {
      SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto, kind);
      const std::size_t n = g.n();
      Matrix lt(n, n);
      std::vector<double> e(n, 0.0), col(n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        g.apply_scaled(e.data(), col.data());
        for (std::size_t i = 0; i < n; ++i) lt(i, j) = col[i];
        e[j] = 0.0;
      }
      EigenDecomposition eig = symmetric_eigen(lt);
      CHECK(eig.values.front() >= -1.0 - 1e-10);
      CHECK(eig.values.back() <= 1.0 + 1e-10);
    }
  }

  SUBCASE("combinatorial: scaled operator maps constants to -1 times them") {
    SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto,
                                        LaplacianKind::COMBINATORIAL);
    std::vector<double> x(g.n(), 1.0), y(g.n(), 0.0);
    g.apply_scaled(x.data(), y.data());
    for (double v : y) CHECK(v == doctest::Approx(-1.0).epsilon(1e-10));
  }

  SUBCASE("symmetry under the inner product") {
    SphereGraph g = build_healpix_graph(s);
    Rng rng(77);
    std::vector<double> x(g.n()), y(g.n()), lx(g.n()), ly(g.n());
    for (double& v : x) v = rng.normal();
    for (double& v : y) v = rng.normal();
    g.apply_scaled(x.data(), lx.data());
    g.apply_scaled(y.data(), ly.data());
    double xly = 0.0, ylx = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
      xly += x[i] * ly[i];
      ylx += y[i] * lx[i];
    }
    CHECK(std::fabs(xly - ylx) < 1e-10);
  }
}

TEST_CASE("cheb_apply: identity order, dense oracle, spectral consistency") {
  HealpixSampling s(2, Ordering::RING);
  SphereGraph g = build_healpix_graph(s);
  Rng rng(13);

  SUBCASE("K=1 filter scales the input") {
    ChebFilterBank bank(1, 1, 1);
    bank.theta[0] = 2.5;
    MapSignal x(g.n(), 1);
    for (double& v : x.values) v = rng.normal();
    MapSignal y = cheb_apply(bank, g, x);
    for (std::size_t i = 0; i < g.n(); ++i) {
      CHECK(y.values[i] == doctest::Approx(2.5 * x.values[i]).epsilon(1e-14));
    }
  }

  SUBCASE("K=3 multi-channel matches the dense polynomial oracle") {
    ChebFilterBank bank = ChebFilterBank::random_init(3, 2, 3, rng);
    MapSignal x(g.n(), 2);
    for (double& v : x.values) v = rng.normal();
    MapSignal y = cheb_apply(bank, g, x);

    std::vector<Matrix> t = dense_cheb_basis(g, 3);
    MapSignal expect(g.n(), 3);
    std::vector<double> tmp(g.n(), 0.0);
    for (int k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < 2; ++i) {
        t[std::size_t(k)].matvec(x.channel(i), tmp.data());
        for (std::size_t o = 0; o < 3; ++o) {
          double c = bank.coeff(k, i, o);
          for (std::size_t v = 0; v < g.n(); ++v) expect.at(o, v) += c * tmp[v];
        }
      }
    }
    CHECK(frobenius_diff(y, expect) < 1e-10);
  }

  SUBCASE("identity response: fit of h(lambda)=lambda acts as Lambda in the GFT domain") {
    std::vector<double> coeffs =
        chebyshev_fit([](double l) { return l; }, 2, g.lambda_max());
    ChebFilterBank bank = ChebFilterBank::from_coeffs(coeffs);
    SpectralBasis basis = eigendecompose(g);
    MapSignal x(g.n(), 1);
    for (double& v : x.values) v = rng.normal();
    MapSignal y = cheb_apply(bank, g, x);
    std::vector<double> cy = gft(basis, y.values);
    std::vector<double> cx = gft(basis, x.values);
    for (std::size_t k = 0; k < g.n(); ++k) {
      CHECK(std::fabs(cy[k] - basis.eigenvalues[k] * cx[k]) < 1e-9);
    }
  }

  SUBCASE("linearity") {
    ChebFilterBank bank = ChebFilterBank::random_init(4, 1, 1, rng);
    MapSignal x1(g.n(), 1), x2(g.n(), 1), sum(g.n(), 1);
    for (std::size_t i = 0; i < g.n(); ++i) {
      x1.values[i] = rng.normal();
      x2.values[i] = rng.normal();
      sum.values[i] = x1.values[i] + x2.values[i];
    }
    MapSignal ys = cheb_apply(bank, g, sum);
    MapSignal y1 = cheb_apply(bank, g, x1);
    MapSignal y2 = cheb_apply(bank, g, x2);
    for (std::size_t i = 0; i < g.n(); ++i) {
      CHECK(std::fabs(ys.values[i] - y1.values[i] - y2.values[i]) < 1e-11);
    }
  }

  SUBCASE("shape mismatch throws") {
    ChebFilterBank bank(2, 2, 1);
    MapSignal x(g.n(), 1);
    CHECK_THROWS_AS(cheb_apply(bank, g, x), ShapeError);
  }
}

TEST_CASE("cheb_apply is permutation equivariant") {
  HealpixSampling s(2, Ordering::RING);
  SphereGraph g = build_healpix_graph(s);
  const std::size_t n = g.n();

  // Relabel vertices by a deterministic permutation and rebuild the graph
  // with identical weights and the same Chebyshev scaling.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (7 * i + 3) % n;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  std::vector<double> distances;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = g.row_ptr()[i]; j < g.row_ptr()[i + 1]; ++j) {
      auto c = std::size_t(g.col_idx()[j]);
      if (c > i) {
        edges.emplace_back(std::int64_t(perm[i]), std::int64_t(perm[c]));
        // Invert the kernel to recover the original chord distance.
        distances.push_back(std::sqrt(-2.0 * g.sigma() * g.sigma() * std::log(g.weights()[j])));
      }
    }
  }
  SphereGraph pg(n, edges, g.sigma(), g.laplacian_kind(), distances, g.lambda_max());

  Rng rng(21);
  ChebFilterBank bank = ChebFilterBank::random_init(5, 1, 1, rng);
  MapSignal x(n, 1), px(n, 1);
  for (std::size_t i = 0; i < n; ++i) x.values[i] = rng.normal();
  for (std::size_t i = 0; i < n; ++i) px.values[perm[i]] = x.values[i];

  MapSignal y = cheb_apply(bank, g, x);
  MapSignal py = cheb_apply(bank, pg, px);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::fabs(py.values[perm[i]] - y.values[i]) < 1e-12);
  }
}

TEST_CASE("cheb_grad: finite differences and zero cotangent") {
  HealpixSampling s(1, Ordering::RING);
  SphereGraph g = build_healpix_graph(s);
  Rng rng(17);
  const int order = 4;
  ChebFilterBank bank = ChebFilterBank::random_init(order, 2, 3, rng);
  MapSignal x(g.n(), 2);
  for (double& v : x.values) v = rng.normal();
  MapSignal dy(g.n(), 3);
  for (double& v : dy.values) v = rng.normal();

  ChebGrad grad = cheb_grad(bank, g, x, dy);

  auto objective = [&](const ChebFilterBank& b, const MapSignal& in) {
    MapSignal y = cheb_apply(b, g, in);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i) acc += y.values[i] * dy.values[i];
    return acc;
  };

  SUBCASE("theta gradient") {
    const double eps = 1e-5;
    for (std::size_t j = 0; j < bank.theta.size(); ++j) {
      ChebFilterBank plus = bank, minus = bank;
      plus.theta[j] += eps;
      minus.theta[j] -= eps;
      double fd = (objective(plus, x) - objective(minus, x)) / (2.0 * eps);
      CHECK(grad.d_theta[j] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::fabs(fd))));
    }
  }

  SUBCASE("input gradient") {
    const double eps = 1e-5;
    for (std::size_t j = 0; j < x.values.size(); j += 3) {
      MapSignal plus = x, minus = x;
      plus.values[j] += eps;
      minus.values[j] -= eps;
      double fd = (objective(bank, plus) - objective(bank, minus)) / (2.0 * eps);
      CHECK(grad.d_x.values[j] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::fabs(fd))));
    }
  }

  SUBCASE("zero cotangent gives zero gradients") {
    MapSignal zero(g.n(), 3);
    ChebGrad gz = cheb_grad(bank, g, x, zero);
    for (double v : gz.d_theta) CHECK(v == 0.0);
    for (double v : gz.d_x.values) CHECK(v == 0.0);
  }
}

TEST_CASE("chebyshev_fit reproduces smooth functions at the spectrum") {
  SphereGraph g = build_ring_graph(RingSampling(16));
  auto h = [](double l) { return std::exp(-0.8 * l); };
  std::vector<double> coeffs = chebyshev_fit(h, 12, g.lambda_max());
  SpectralBasis basis = eigendecompose(g);
  ChebFilterBank bank = ChebFilterBank::from_coeffs(coeffs);

  MapSignal x(g.n(), 1);
  Rng rng(3);
  for (double& v : x.values) v = rng.normal();
  MapSignal y = cheb_apply(bank, g, x);
  std::vector<double> cy = gft(basis, y.values);
  std::vector<double> cx = gft(basis, x.values);
  for (std::size_t k = 0; k < g.n(); ++k) {
    CHECK(cy[k] == doctest::Approx(h(basis.eigenvalues[k]) * cx[k]).epsilon(1e-6).scale(1.0));
  }
}
