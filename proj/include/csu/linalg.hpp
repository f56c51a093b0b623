#pragma once

#include "csu/tensor.hpp"

namespace csu {

/// Eigendecomposition of a symmetric matrix.
///
/// `eigenvalues` are sorted descending and `eigenvectors.col(i)` pairs with
/// `eigenvalues(i)`. Values in [-rank_tol, 0) are clamped to zero. Each column
/// is oriented so that its largest-magnitude component is non-negative.
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
  double rank_tol = 0.0;

  Index size() const { return eigenvalues.size(); }
};

struct SymEigOptions {
  // Throw NotPsdError when an eigenvalue falls below -rank_tol.
  bool require_psd = false;
  int max_sweeps = 100;
};

/// Scale-aware threshold below which an eigenvalue counts as zero:
/// max(C * eps64 * max|lambda|, 1e-12).
double rank_tolerance(Index size, double max_abs_eigenvalue);

/// Cyclic Jacobi eigendecomposition. Input must be symmetric to within 1e-9
/// relative (Frobenius); it is symmetrized before rotating.
SymEig sym_eig(const Eigen::Ref<const Matrix>& m, const SymEigOptions& options = {});

/// Symmetric PSD square root Q diag(sqrt(lambda)) Q^T.
///
/// The two-sided form is invariant to the sign of each eigenvector column, so
/// P is reproducible even where the decomposition itself is not.
Matrix psd_sqrt(const SymEig& eig);

/// Q diag(1/lambda on lambda > rank_tol, else 0) Q^T.
Matrix pseudo_inverse(const SymEig& eig);

struct PseudoLogDet {
  double log_det = 0.0;  // 0 for an empty support
  Index rank = 0;
};

PseudoLogDet pseudo_det_log(const SymEig& eig);

Index numerical_rank(const SymEig& eig);

/// Q diag(lambda) Q^T.
Matrix reconstruct(const SymEig& eig);

}  // namespace csu
