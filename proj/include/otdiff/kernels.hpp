#pragma once

#include <cstddef>
#include <vector>

namespace otdiff::kernels {

// =============================================================================
// Hot loops behind the matrix-free operators. Every kernel comes in two
// builds: `serial` is the straight-loop reference, `parallel` distributes
// output rows (or grid lines) across OpenMP threads. A row is always
// accumulated by a single thread in fixed index order, so both builds produce
// bit-identical results; tests assert that and tools/bench_kernels times it.
// =============================================================================

// y_i = sum_j exp(-|x_i-x_j|^2 * inv_two_sigma_sq) * f_j
// y_i = sum_j exp(-|x_i-x_j| * inv_sigma) * f_j
// log-domain variants compute log sum_j exp(log k_ij + g_j) with a streaming
// max-shift; g_j = -inf entries are skipped.

namespace serial {

void gaussian_matvec(const double* positions, std::size_t n, std::size_t dim,
                     double inv_two_sigma_sq, const double* f, double* y);
void exponential_matvec(const double* positions, std::size_t n, std::size_t dim,
                        double inv_sigma, const double* f, double* y);
void gaussian_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                         double inv_two_sigma_sq, const double* g, double* y);
void exponential_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                            double inv_sigma, const double* g, double* y);

// Pairwise GMM kernel rows; pair_cov[i] = sigma^2/2 * I + Sigma_i (d x d,
// row-major), so the pair system is pair_cov[i] + pair_cov[j].
void gmm_matvec(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                const double* f, double* y);
void gmm_matvec_log(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                    const double* g, double* y);

// One truncated-Gaussian convolution pass along `axis` (0=x fastest) of a
// dense nx*ny*nz grid; taps has size 2r+1, out-of-range taps are dropped.
void voxel_axis_pass(const double* in, double* out, int nx, int ny, int nz, int axis,
                     const std::vector<double>& taps);

// CSR graph kernel matvec: y = 1/2 * ((deg + eps*n) .* x + A x + eps * sum(x)).
void graph_matvec(const std::size_t* row_ptr, const std::size_t* col_idx, const double* weights,
                  const double* degrees, std::size_t n, double epsilon, const double* x, double* y);

void dense_matvec(const double* k, std::size_t n, const double* x, double* y);

} // namespace serial

namespace parallel {

void gaussian_matvec(const double* positions, std::size_t n, std::size_t dim,
                     double inv_two_sigma_sq, const double* f, double* y);
void exponential_matvec(const double* positions, std::size_t n, std::size_t dim,
                        double inv_sigma, const double* f, double* y);
void gaussian_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                         double inv_two_sigma_sq, const double* g, double* y);
void exponential_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                            double inv_sigma, const double* g, double* y);
void gmm_matvec(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                const double* f, double* y);
void gmm_matvec_log(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                    const double* g, double* y);
void voxel_axis_pass(const double* in, double* out, int nx, int ny, int nz, int axis,
                     const std::vector<double>& taps);
void graph_matvec(const std::size_t* row_ptr, const std::size_t* col_idx, const double* weights,
                  const double* degrees, std::size_t n, double epsilon, const double* x, double* y);
void dense_matvec(const double* k, std::size_t n, const double* x, double* y);

} // namespace parallel

} // namespace otdiff::kernels
