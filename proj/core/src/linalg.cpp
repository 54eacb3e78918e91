#include "fourier_ed/linalg.hpp"

#include <cmath>

namespace fourier_ed {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  // Column-major fill, so a given seed gives the same columns regardless of width.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

Matrix random_orthonormal_columns(Index rows, Index cols, Rng& rng) {
  if (cols > rows) throw std::invalid_argument("random_orthonormal_columns: cols > rows");
  Matrix g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Matrix random_orthogonal(Index n, Rng& rng) { return random_orthonormal_columns(n, n, rng); }

double project_out(const Eigen::Ref<const Matrix>& q, Eigen::Ref<Vector> v) {
  const double n0 = v.norm();
  if (n0 == 0.0) return 0.0;
  if (q.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      Vector c = q.transpose() * v;
      v.noalias() -= q * c;
    }
  }
  return v.norm() / n0;
}

bool gram_schmidt(Matrix& a, const Eigen::Ref<const Matrix>& against, double tol) {
  const Index n = a.cols();
  for (Index j = 0; j < n; ++j) {
    Vector v = a.col(j);
    const double n0 = v.norm();
    if (n0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (against.cols() > 0) v.noalias() -= against * (against.transpose() * v);
      if (j > 0) v.noalias() -= a.leftCols(j) * (a.leftCols(j).transpose() * v);
    }
    const double n1 = v.norm();
    if (n1 < tol * n0) return false;
    a.col(j) = v / n1;
  }
  return true;
}

bool gram_schmidt(Matrix& a, double tol) {
  return gram_schmidt(a, Matrix(a.rows(), 0), tol);
}

double orthonormality_error(const Eigen::Ref<const Matrix>& a) {
  if (a.cols() == 0) return 0.0;
  Matrix g = a.transpose() * a;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace fourier_ed
