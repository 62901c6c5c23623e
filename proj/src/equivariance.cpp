#include "sphereflow/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sphereflow {

double AlignmentMatrix::diagonal_mean(int up_to_ell) const {
  int hi = std::min(up_to_ell, ell_max);
  double acc = 0.0;
  for (int l = 0; l <= hi; ++l) acc += a(std::size_t(l), std::size_t(l));
  return acc / double(hi + 1);
}

AlignmentMatrix alignment_matrix(const SpectralBasis& basis, const DegreeBlocks& blocks,
                                 const HarmonicBasis& hb, bool row_normalize,
                                 AlignmentNormalization norm) {
  if (blocks.ell_max > hb.ell_max()) {
    throw std::invalid_argument("alignment_matrix: blocks.ell_max exceeds the harmonic band");
  }
  const int lmax = blocks.ell_max;
  const std::size_t dim = std::size_t(lmax) + 1;

  AlignmentMatrix out;
  out.ell_max = lmax;
  out.a = Matrix(dim, dim);

  Matrix energy(std::size_t(hb.ell_max()) + 1, dim);  // per-degree energy by group
  std::vector<double> group_total(dim, 0.0);
  const std::size_t n_rows = basis.eigenvectors.rows();
  std::vector<double> u(n_rows, 0.0);

  for (int lg = 0; lg <= lmax; ++lg) {
    for (std::size_t idx = blocks.group_begin(lg); idx < blocks.group_end(lg); ++idx) {
      if (idx >= basis.eigenvectors.cols()) {
        throw std::invalid_argument("alignment_matrix: group exceeds basis");
      }
      for (std::size_t i = 0; i < n_rows; ++i) u[i] = basis.eigenvectors(i, idx);
      Alm a = hb.analysis(u);
      std::vector<double> c = psd(a);
      for (int l = 0; l <= hb.ell_max(); ++l) {
        double e = (2.0 * l + 1.0) * c[std::size_t(l)];
        energy(std::size_t(l), std::size_t(lg)) += e;
        group_total[std::size_t(lg)] += e;
      }
    }
  }

  for (std::size_t lg = 0; lg < dim; ++lg) {
    double tot = norm == AlignmentNormalization::kCaptured
                     ? group_total[lg]
                     : (4.0 * kPi / double(n_rows)) * double(2 * lg + 1);
    if (tot <= 0.0) continue;
    for (std::size_t l = 0; l < dim; ++l) out.a(l, lg) = energy(l, lg) / tot;
  }

  if (row_normalize) {
    for (std::size_t l = 0; l < dim; ++l) {
      double tot = 0.0;
      for (std::size_t lg = 0; lg < dim; ++lg) tot += out.a(l, lg);
      if (tot <= 0.0) continue;
      for (std::size_t lg = 0; lg < dim; ++lg) out.a(l, lg) /= tot;
    }
  }
  return out;
}

double equivariance_error(const SphereGraph& g, const ChebFilterBank& bank,
                          const HarmonicBasis& hb, double phi0, int trials, std::uint64_t seed,
                          int signal_ell_max) {
  if (bank.f_in != 1 || bank.f_out != 1) {
    throw std::invalid_argument("equivariance_error: single-channel filters only");
  }
  if (hb.n_points() != g.n()) {
    throw ShapeError("equivariance_error: basis and graph sampling mismatch");
  }
  if (trials < 1) throw std::invalid_argument("equivariance_error: trials must be >= 1");
  if (signal_ell_max < 0) signal_ell_max = hb.ell_max();
  if (signal_ell_max > hb.ell_max()) {
    throw std::invalid_argument("equivariance_error: signal band exceeds the analysis band");
  }

  std::vector<double> flat(std::size_t(signal_ell_max) + 1, 1.0);
  std::vector<double> errors(std::size_t(trials), 0.0);
  Rng base(seed);

  parallel_for(std::size_t(trials), [&](std::size_t t) {
    Alm a = grf_alm(hb.ell_max(), flat, base.fork(t).next_u64());
    std::vector<double> x = hb.synthesis(a);

    MapSignal xs(x.size(), 1);
    xs.values = x;
    MapSignal conv_x = cheb_apply(bank, g, xs);

    // R x in the harmonic domain (x is band-limited, analysis is exact).
    std::vector<double> rx = hb.synthesis(rotate_z(a, phi0));
    MapSignal rxs(rx.size(), 1);
    rxs.values = rx;
    MapSignal conv_rx = cheb_apply(bank, g, rxs);

    // R conv(x): analyze, rotate, synthesize.
    std::vector<double> cx(conv_x.values);
    std::vector<double> r_conv_x = hb.synthesis(rotate_z(hb.analysis(cx), phi0));

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i) {
      double d = conv_rx.values[i] - r_conv_x[i];
      num += d * d;
      den += cx[i] * cx[i];
    }
    if (den <= 0.0) {
      errors[t] = -1.0;  // flagged below; exceptions do not cross threads
      return;
    }
    errors[t] = std::sqrt(num) / std::sqrt(den);
  });

  double acc = 0.0;
  for (double e : errors) {
    if (e < 0.0) {
      throw std::runtime_error("equivariance_error: filter output has zero norm (degenerate filter)");
    }
    acc += e;
  }
  return acc / double(trials);
}

CircleDftReport circle_dft_check(const RingSampling& r, std::uint64_t seed) {
  const int n = r.n();
  SphereGraph g = build_ring_graph(r);
  SpectralBasis basis = eigendecompose(g);

  CircleDftReport report;

  // (a) circulant eigenvalues 2 - 2 cos(2 pi k / n), sorted ascending.
  std::vector<double> expected(std::size_t(n), 0.0);
  for (int k = 0; k < n; ++k) expected[std::size_t(k)] = 2.0 - 2.0 * std::cos(kTwoPi * k / n);
  std::sort(expected.begin(), expected.end());
  for (int i = 0; i < n; ++i) {
    report.max_eigenvalue_error = std::max(
        report.max_eigenvalue_error, std::fabs(basis.eigenvalues[std::size_t(i)] - expected[std::size_t(i)]));
  }

  // (b) each eigenvector lies in the span of its cos/sin DFT pair.
  for (int idx = 0; idx < n; ++idx) {
    double lambda = basis.eigenvalues[std::size_t(idx)];
    int best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n / 2; ++k) {
      double d = std::fabs(lambda - (2.0 - 2.0 * std::cos(kTwoPi * k / n)));
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    // Orthonormal basis of the eigenspace for frequency best_k.
    std::vector<std::vector<double>> span;
    std::vector<double> vc(std::size_t(n), 0.0), vs(std::size_t(n), 0.0);
    double nc = 0.0, ns = 0.0;
    for (int j = 0; j < n; ++j) {
      vc[std::size_t(j)] = std::cos(kTwoPi * best_k * j / n);
      vs[std::size_t(j)] = std::sin(kTwoPi * best_k * j / n);
      nc += vc[std::size_t(j)] * vc[std::size_t(j)];
      ns += vs[std::size_t(j)] * vs[std::size_t(j)];
    }
    for (int j = 0; j < n; ++j) vc[std::size_t(j)] /= std::sqrt(nc);
    span.push_back(vc);
    if (ns > 1e-12) {
      for (int j = 0; j < n; ++j) vs[std::size_t(j)] /= std::sqrt(ns);
      span.push_back(vs);
    }

    std::vector<double> dots(span.size(), 0.0);
    for (std::size_t b = 0; b < span.size(); ++b) {
      for (int j = 0; j < n; ++j) {
        dots[b] += span[b][std::size_t(j)] * basis.eigenvectors(std::size_t(j), std::size_t(idx));
      }
    }
    double res = 0.0;
    for (int j = 0; j < n; ++j) {
      double proj = 0.0;
      for (std::size_t b = 0; b < span.size(); ++b) proj += dots[b] * span[b][std::size_t(j)];
      double d = basis.eigenvectors(std::size_t(j), std::size_t(idx)) - proj;
      res += d * d;
    }
    report.max_subspace_residual = std::max(report.max_subspace_residual, std::sqrt(res));
  }

  // (c) exact shift equivariance of a random Chebyshev filter.
  Rng rng(seed);
  ChebFilterBank bank(5, 1, 1);
  for (double& t : bank.theta) t = rng.normal();
  for (int rep = 0; rep < 3; ++rep) {
    MapSignal x(std::size_t(n), 1);
    for (double& v : x.values) v = rng.normal();
    MapSignal sx(std::size_t(n), 1);
    for (int j = 0; j < n; ++j) sx.values[std::size_t(j)] = x.values[std::size_t((j + n - 1) % n)];

    MapSignal conv_sx = cheb_apply(bank, g, sx);
    MapSignal conv_x = cheb_apply(bank, g, x);
    for (int j = 0; j < n; ++j) {
      double shifted = conv_x.values[std::size_t((j + n - 1) % n)];
      report.max_shift_residual =
          std::max(report.max_shift_residual, std::fabs(conv_sx.values[std::size_t(j)] - shifted));
    }
  }
  return report;
}

}  // namespace sphereflow
