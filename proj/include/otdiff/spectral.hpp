#pragma once

#include "otdiff/normalize.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace otdiff {

// =============================================================================
// Leading eigenpairs of Q. Q is symmetric in the M-weighted inner product, so
// the solver runs Lanczos on the conjugated operator
//   B = M^{1/2} Lambda K Lambda M^{1/2}
// and maps the orthonormal Ritz vectors back through Phi = M^{-1/2} Y, which
// makes Phi M-orthonormal. Same matvec budget as the diffusion itself.
// =============================================================================

struct SpectralBasis {
    std::size_t rows = 0;  // N
    std::size_t count = 0; // k
    std::vector<double> eigenvalues;  // descending, clamped into [0, 1] at the boundary
    std::vector<double> eigenvectors; // N x k, column-major, M-orthonormal
    std::vector<double> residuals;    // |Q phi_i - lambda_i phi_i|_M per pair

    const double* vector(std::size_t i) const { return eigenvectors.data() + i * rows; }
};

struct EigsOptions {
    double solver_tol = 1e-8;
    int max_iters = 5000;
    std::uint64_t seed = 0; // start vector seed, fixed for reproducible runs
};

// Lanczos with full reorthogonalization; on breakdown the basis is restarted
// with a fresh random direction, which is what recovers multiplicities of
// degenerate eigenvalues. Non-convergence returns the partial result with its
// residuals; callers inspect `residuals` against the tolerance.
SpectralBasis top_eigenpairs(const DiffusionOperator& diffusion, int k, const EigsOptions& options);
SpectralBasis top_eigenpairs(const DiffusionOperator& diffusion, int k, double solver_tol = 1e-8,
                             int max_iters = 5000);

enum class SpectralModality { points, voxels, gmm };

// Map diffusion eigenvalues to Laplacian-eigenvalue estimates:
//   points/voxels: lambda = -(2 / sigma^2) log lambda_Q
//   gmm:           lambda = -2 / (sigma^2 + (2/d) * trace_avg) * log lambda_Q
// with trace_avg the mass-weighted mean covariance trace and d in {2, 3}.
// Entries with lambda_Q <= 0 are excluded with a warning (the heuristic is
// undefined there); the result is nondecreasing and nonnegative.
std::vector<double> estimate_laplacian_eigenvalues(const SpectralBasis& basis, double sigma,
                                                   SpectralModality modality,
                                                   std::optional<double> gmm_trace_avg = std::nullopt,
                                                   std::optional<int> d = std::nullopt);

// Mass-weighted mean covariance trace of a mixture, the gmm heuristic input.
double mixture_trace_average(const GaussianMixture& gmm);

} // namespace otdiff
