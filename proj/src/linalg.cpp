#include "sphereflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sphereflow/core.hpp"

namespace sphereflow {

void Matrix::matvec(const double* x, double* y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
}

void Matrix::matvec_transposed(const double* x, double* y) const {
  std::fill(y, y + cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) y[j] += r[j] * xi;
  }
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form.
// On exit `a` holds the accumulated orthogonal transform Q, `d` the diagonal
// and `e` the subdiagonal (e[0] unused).
void householder_tridiag(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.rows();
  for (std::size_t i = n - 1; i >= 1; --i) {
    std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          a(j, i) = a(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
        for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
      }
    }
    d[i] = a(i, i);
    a(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
  }
}

// Implicit-shift QL on a tridiagonal matrix, rotating the columns of `z` so
// column k ends up as the eigenvector of d[k].
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("symmetric_eigen: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ip1 = m; ip1 > l; --ip1) {
          std::size_t i = ip1 - 1;
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

EigenDecomposition symmetric_eigen(Matrix a) {
  if (a.rows() != a.cols()) throw ShapeError("symmetric_eigen: matrix must be square");
  const std::size_t n = a.rows();
  std::vector<double> d(n, 0.0), e(n, 0.0);
  if (n == 1) {
    EigenDecomposition out;
    out.values = {a(0, 0)};
    out.vectors = Matrix::identity(1);
    return out;
  }
  householder_tridiag(a, d, e);
  ql_implicit(d, e, a);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&d](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[perm[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = a(i, perm[k]);
  }
  return out;
}

QrFactor::QrFactor(Matrix a, double rank_tol) : qr_(std::move(a)) {
  const std::size_t n = qr_.rows();
  const std::size_t m = qr_.cols();
  if (n < m) throw ShapeError("QrFactor: matrix must have rows >= cols");
  rdiag_.assign(m, 0.0);

  for (std::size_t k = 0; k < m; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, qr_(i, k));
    if (norm != 0.0) {
      if (qr_(k, k) < 0.0) norm = -norm;
      for (std::size_t i = k; i < n; ++i) qr_(i, k) /= norm;
      qr_(k, k) += 1.0;
      for (std::size_t j = k + 1; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += qr_(i, k) * qr_(i, j);
        s = -s / qr_(k, k);
        for (std::size_t i = k; i < n; ++i) qr_(i, j) += s * qr_(i, k);
      }
    }
    rdiag_[k] = -norm;
  }

  double max_r = 0.0;
  for (double r : rdiag_) max_r = std::max(max_r, std::fabs(r));
  for (double r : rdiag_) {
    if (std::fabs(r) <= rank_tol * max_r) {
      throw NumericalRankError("QrFactor: matrix is numerically rank-deficient");
    }
  }
}

void QrFactor::solve(const double* b, double* x) const {
  const std::size_t n = qr_.rows();
  const std::size_t m = qr_.cols();
  std::vector<double> y(b, b + n);

  // y <- Q^T b, one reflector at a time.
  for (std::size_t k = 0; k < m; ++k) {
    if (qr_(k, k) == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = k; i < n; ++i) s += qr_(i, k) * y[i];
    s = -s / qr_(k, k);
    for (std::size_t i = k; i < n; ++i) y[i] += s * qr_(i, k);
  }

  // Back-substitute R x = y.
  for (std::size_t kk = m; kk > 0; --kk) {
    std::size_t k = kk - 1;
    double acc = y[k];
    for (std::size_t j = k + 1; j < m; ++j) acc -= qr_(k, j) * x[j];
    x[k] = acc / rdiag_[k];
  }
}

double QrFactor::rdiag_ratio() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double r : rdiag_) {
    lo = std::min(lo, std::fabs(r));
    hi = std::max(hi, std::fabs(r));
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

double condition_number(const Matrix& a) {
  const std::size_t m = a.cols();
  Matrix gram(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
      gram(i, j) = gram(j, i) = s;
    }
  }
  EigenDecomposition eig = symmetric_eigen(std::move(gram));
  double lo = eig.values.front();
  double hi = eig.values.back();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

}  // namespace sphereflow
