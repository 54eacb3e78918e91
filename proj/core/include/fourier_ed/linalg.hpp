#pragma once

#include "fourier_ed/basis.hpp"
#include "fourier_ed/rng.hpp"

namespace fourier_ed {

inline constexpr double kBreakdownTol = 1e-10;

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// rows×cols matrix with orthonormal columns (Householder QR of a Gaussian
/// matrix, column signs fixed so that diag(R) > 0).
Matrix random_orthonormal_columns(Index rows, Index cols, Rng& rng);
Matrix random_orthogonal(Index n, Rng& rng);

/// Removes from v its components along the (orthonormal) columns of q, twice.
/// Returns the norm ratio |v_after| / |v_before| (0 for a zero input).
double project_out(const Eigen::Ref<const Matrix>& q, Eigen::Ref<Vector> v);

/// Classical Gram-Schmidt with one re-orthogonalization pass, in column order,
/// each column also orthogonalized against the columns of `against` (may be
/// empty). Returns false when a column loses more than 1 - tol of its norm.
bool gram_schmidt(Matrix& a, const Eigen::Ref<const Matrix>& against, double tol = kBreakdownTol);
bool gram_schmidt(Matrix& a, double tol = kBreakdownTol);

/// max |AᵀA − I|.
double orthonormality_error(const Eigen::Ref<const Matrix>& a);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& a);

}  // namespace fourier_ed
