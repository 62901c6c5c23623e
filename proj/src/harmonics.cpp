#include "sphereflow/harmonics.hpp"

#include <cmath>
#include <stdexcept>

#include "sphereflow/core.hpp"

namespace sphereflow {

namespace {

// Fully-normalized associated Legendre values P_lm(cos theta) for all
// 0 <= m <= l <= ell_max, by the standard scaled three-term recurrence
// (Condon-Shortley phase included). out is indexed l*(l+1)/2 + m.
void legendre_all(double theta, int ell_max, std::vector<double>& out) {
  double ct = std::cos(theta);
  double st = std::sin(theta);
  auto idx = [](int l, int m) { return std::size_t(l) * std::size_t(l + 1) / 2 + std::size_t(m); };

  out[idx(0, 0)] = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 1; m <= ell_max; ++m) {
    out[idx(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * out[idx(m - 1, m - 1)];
  }
  for (int m = 0; m < ell_max; ++m) {
    out[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * ct * out[idx(m, m)];
  }
  for (int m = 0; m <= ell_max; ++m) {
    for (int l = m + 2; l <= ell_max; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt((4.0 * (l - 1.0) * (l - 1.0) - 1.0) /
                           ((l - 1.0) * (l - 1.0) - double(m) * m));
      out[idx(l, m)] = a * (ct * out[idx(l - 1, m)] - out[idx(l - 2, m)] / b);
    }
  }
}

}  // namespace

std::vector<double> harmonic_row(double theta, double phi, int ell_max) {
  std::vector<double> plm(std::size_t(ell_max + 1) * std::size_t(ell_max + 2) / 2);
  legendre_all(theta, ell_max, plm);
  auto pidx = [](int l, int m) { return std::size_t(l) * std::size_t(l + 1) / 2 + std::size_t(m); };

  std::vector<double> row(std::size_t(ell_max + 1) * std::size_t(ell_max + 1));
  const double sqrt2 = std::sqrt(2.0);
  for (int l = 0; l <= ell_max; ++l) {
    row[Alm::index(l, 0)] = plm[pidx(l, 0)];
    for (int m = 1; m <= l; ++m) {
      double p = sqrt2 * plm[pidx(l, m)];
      row[Alm::index(l, m)] = p * std::cos(m * phi);
      row[Alm::index(l, -m)] = p * std::sin(m * phi);
    }
  }
  return row;
}

namespace {

Matrix harmonic_matrix(const std::vector<SphereCoord>& points, int ell_max) {
  const std::size_t n = points.size();
  const std::size_t m = std::size_t(ell_max + 1) * std::size_t(ell_max + 1);
  if (m > n) {
    throw std::invalid_argument("eval_harmonics: (ell_max+1)^2 must not exceed the point count");
  }
  Matrix y(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row = harmonic_row(points[i].theta, points[i].phi, ell_max);
    for (std::size_t j = 0; j < m; ++j) y(i, j) = row[j];
  }
  return y;
}

}  // namespace

HarmonicBasis::HarmonicBasis(const std::vector<SphereCoord>& points, int ell_max)
    : ell_max_(ell_max), y_(harmonic_matrix(points, ell_max)) {}

const QrFactor& HarmonicBasis::qr() const {
  std::lock_guard<std::mutex> lock(*qr_mutex_);
  if (!qr_) qr_ = std::make_shared<const QrFactor>(y_);
  return *qr_;
}

Alm HarmonicBasis::analysis(const std::vector<double>& x) const {
  if (x.size() != y_.rows()) throw ShapeError("sht_analysis: signal length != point count");
  Alm a(ell_max_);
  qr().solve(x.data(), a.coeffs.data());
  return a;
}

std::vector<double> HarmonicBasis::synthesis(const Alm& a) const {
  if (a.size() != y_.cols()) throw ShapeError("sht_synthesis: coefficient count mismatch");
  std::vector<double> out(y_.rows(), 0.0);
  y_.matvec(a.coeffs.data(), out.data());
  return out;
}

double HarmonicBasis::gram_deviation() const {
  const std::size_t m = y_.cols();
  const double scale = 4.0 * kPi / double(y_.rows());
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < y_.rows(); ++r) s += y_(r, i) * y_(r, j);
      double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(s * scale - target));
    }
  }
  return worst;
}

HarmonicBasis eval_harmonics(const HealpixSampling& s, int ell_max) {
  std::vector<SphereCoord> pts(std::size_t(s.n_pix()));
  for (std::int64_t p = 0; p < s.n_pix(); ++p) pts[std::size_t(p)] = s.pix2ang(p);
  return HarmonicBasis(pts, ell_max);
}

HarmonicBasis eval_harmonics(const PatchSampling& patch, int ell_max) {
  std::vector<SphereCoord> pts(std::size_t(patch.size()));
  for (std::int64_t i = 0; i < patch.size(); ++i) {
    pts[std::size_t(i)] = patch.parent().pix2ang(patch.global_index(i));
  }
  return HarmonicBasis(pts, ell_max);
}

std::vector<double> psd(const Alm& a) {
  std::vector<double> c(std::size_t(a.ell_max) + 1, 0.0);
  for (int l = 0; l <= a.ell_max; ++l) {
    double acc = 0.0;
    for (int m = -l; m <= l; ++m) {
      double v = a.at(l, m);
      acc += v * v;
    }
    c[std::size_t(l)] = acc / (2.0 * l + 1.0);
  }
  return c;
}

Alm rotate_z(const Alm& a, double phi0) {
  Alm out(a.ell_max);
  for (int l = 0; l <= a.ell_max; ++l) {
    out.at(l, 0) = a.at(l, 0);
    for (int m = 1; m <= l; ++m) {
      double c = std::cos(m * phi0);
      double s = std::sin(m * phi0);
      double ap = a.at(l, m);
      double am = a.at(l, -m);
      out.at(l, m) = c * ap - s * am;
      out.at(l, -m) = s * ap + c * am;
    }
  }
  return out;
}

Alm grf_alm(int ell_max, const std::vector<double>& spectrum, std::uint64_t seed) {
  for (double c : spectrum) {
    if (c < 0.0) throw std::invalid_argument("synthesize_grf: spectrum entries must be >= 0");
  }
  Alm a(ell_max);
  Rng rng(seed);
  for (int l = 0; l <= ell_max; ++l) {
    double cl = std::size_t(l) < spectrum.size() ? spectrum[std::size_t(l)] : 0.0;
    double sd = std::sqrt(cl);
    for (int m = -l; m <= l; ++m) a.at(l, m) = sd * rng.normal();
  }
  return a;
}

std::vector<double> synthesize_grf(const HarmonicBasis& b, const std::vector<double>& spectrum,
                                   std::uint64_t seed) {
  return b.synthesis(grf_alm(b.ell_max(), spectrum, seed));
}

}  // namespace sphereflow
