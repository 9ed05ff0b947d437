#pragma once

#include "otdiff/types.hpp"

#include <cstddef>
#include <vector>

namespace otdiff::linalg {

// Cyclic Jacobi eigensolver for dense symmetric matrices. Robust at small N;
// this is the reference path, not a performance path. Eigenvalues ascending,
// eigenvectors as matching columns of `vectors`.
void jacobi_eigh(const DenseMatrix& a, std::vector<double>& eigenvalues, DenseMatrix& vectors);

// Implicit-QL eigensolver for a symmetric tridiagonal matrix (diag, subdiag).
// `subdiag[i]` couples i and i+1. If `vectors` is non-null it must come in as
// an n x n basis (identity for raw eigenvectors) and is rotated in place so
// its columns end up as eigenvectors. Eigenvalues ascending.
void tridiag_eigh(std::vector<double>& diag, std::vector<double> subdiag, DenseMatrix* vectors);

// In-place Cholesky solve of a small SPD system (the d x d GMM pair systems).
// Returns false when the factorization hits a non-positive pivot.
bool cholesky_solve(std::size_t n, double* a /* n x n row-major, clobbered */,
                    double* b /* rhs in, solution out */);

} // namespace otdiff::linalg
