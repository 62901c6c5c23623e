#ifndef SPHEREFLOW_LINALG_HPP
#define SPHEREFLOW_LINALG_HPP

#include <cstddef>
#include <vector>

namespace sphereflow {

// Dense row-major matrix. Desk-scale only; no views, no aliasing tricks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // y = A x
  void matvec(const double* x, double* y) const;
  // y = A^T x
  void matvec_transposed(const double* x, double* y) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, column k pairs with values[k]
};

// Full eigendecomposition of a symmetric matrix: Householder reduction to
// tridiagonal form followed by implicit-shift QL with eigenvector
// accumulation. The input is taken by value and destroyed.
EigenDecomposition symmetric_eigen(Matrix a);

// Householder QR of a tall matrix (rows >= cols), for least-squares solves.
class QrFactor {
 public:
  explicit QrFactor(Matrix a, double rank_tol = 1e-12);

  std::size_t rows() const { return qr_.rows(); }
  std::size_t cols() const { return qr_.cols(); }

  // x = argmin ||A x - b||_2. b has rows() entries, x gets cols() entries.
  void solve(const double* b, double* x) const;

  // max|r_kk| / min|r_kk|, a cheap proxy for the condition number.
  double rdiag_ratio() const;

 private:
  Matrix qr_;                  // Householder vectors below diagonal, R above
  std::vector<double> rdiag_;  // diagonal of R
};

// 2-norm condition number of A via the eigenvalues of A^T A.
double condition_number(const Matrix& a);

}  // namespace sphereflow

#endif  // SPHEREFLOW_LINALG_HPP
