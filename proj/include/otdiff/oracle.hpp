#pragma once

#include "otdiff/normalize.hpp"
#include "otdiff/operators.hpp"
#include "otdiff/types.hpp"

#include <vector>

namespace otdiff::oracle {

// =============================================================================
// Dense brute-force references. Everything here is deliberately serial and
// assembled explicitly; the matrix-free paths are tested against these.
// =============================================================================

// S = K M column by column, column j = smatvec(op, e_j). N <= 4096.
DenseMatrix dense_assemble(const SmoothingOperator& op);

// Kernel part K recovered from the assembly: K_ij = S_ij / m_j.
DenseMatrix dense_kernel(const SmoothingOperator& op);

// Scaled kernel W = Lambda K Lambda, so that Q = W M.
DenseMatrix dense_scaled_kernel(const SmoothingOperator& op, const ScalingVector& scaling);

// Fixed-point reference of Algorithm 1 on an explicit matrix:
// d = S lambda, lambda <- sqrt(lambda / d), stopped on the mass-weighted
// mean error. Entries of S must be positive for the fixed point to be unique.
ScalingVector dense_sinkhorn(const DenseMatrix& s, const std::vector<double>& masses,
                             double tol = 1e-12, int max_iter = 10000);

struct DenseEigs {
    std::vector<double> eigenvalues;  // descending
    DenseMatrix vectors;              // columns, M-orthonormal
};

// Full generalized eigendecomposition of Q = W M from the M-symmetric pencil:
// Jacobi rotations on M^{1/2} W M^{1/2}, eigenvectors mapped back by M^{-1/2}.
// `scaled_kernel` is W = Lambda K Lambda. N <= 512.
DenseEigs dense_generalized_eigs(const DenseMatrix& scaled_kernel, const std::vector<double>& masses);

} // namespace otdiff::oracle
