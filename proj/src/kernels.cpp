#include "otdiff/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace otdiff::kernels {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double sq_dist(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

inline double gaussian_row(const double* positions, std::size_t n, std::size_t dim,
                           double inv_two_sigma_sq, const double* f, std::size_t i) {
    const double* xi = positions + i * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += std::exp(-sq_dist(xi, positions + j * dim, dim) * inv_two_sigma_sq) * f[j];
    }
    return acc;
}

inline double exponential_row(const double* positions, std::size_t n, std::size_t dim,
                              double inv_sigma, const double* f, std::size_t i) {
    const double* xi = positions + i * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += std::exp(-std::sqrt(sq_dist(xi, positions + j * dim, dim)) * inv_sigma) * f[j];
    }
    return acc;
}

// Streaming max-shift logsumexp: never forms exp of a positive argument.
struct LogAccumulator {
    double best = kNegInf;
    double acc = 0.0;

    inline void add(double t) {
        if (t == kNegInf) return;
        if (t <= best) {
            acc += std::exp(t - best);
        } else {
            acc = acc * std::exp(best - t) + 1.0;
            best = t;
        }
    }
    inline double value() const { return acc == 0.0 ? kNegInf : best + std::log(acc); }
};

inline double gaussian_row_log(const double* positions, std::size_t n, std::size_t dim,
                               double inv_two_sigma_sq, const double* g, std::size_t i) {
    const double* xi = positions + i * dim;
    LogAccumulator lse;
    for (std::size_t j = 0; j < n; ++j) {
        if (g[j] == kNegInf) continue;
        lse.add(-sq_dist(xi, positions + j * dim, dim) * inv_two_sigma_sq + g[j]);
    }
    return lse.value();
}

inline double exponential_row_log(const double* positions, std::size_t n, std::size_t dim,
                                  double inv_sigma, const double* g, std::size_t i) {
    const double* xi = positions + i * dim;
    LogAccumulator lse;
    for (std::size_t j = 0; j < n; ++j) {
        if (g[j] == kNegInf) continue;
        lse.add(-std::sqrt(sq_dist(xi, positions + j * dim, dim)) * inv_sigma + g[j]);
    }
    return lse.value();
}

// log k_ij = -1/2 * diff' (B_i + B_j)^{-1} diff with B_i = sigma^2/2 I + Sigma_i.
// Small Cholesky done inline; dim is 2 or 3 in practice.
inline double gmm_log_kernel(const double* means, const double* pair_cov, std::size_t dim,
                             std::size_t i, std::size_t j, double* a, double* z) {
    const std::size_t d = dim;
    const double* bi = pair_cov + i * d * d;
    const double* bj = pair_cov + j * d * d;
    for (std::size_t k = 0; k < d * d; ++k) a[k] = bi[k] + bj[k];
    const double* xi = means + i * d;
    const double* xj = means + j * d;
    for (std::size_t k = 0; k < d; ++k) z[k] = xi[k] - xj[k];
    // Cholesky factor in place, then two substitutions for q = diff' A^{-1} diff.
    for (std::size_t c = 0; c < d; ++c) {
        double piv = a[c * d + c];
        for (std::size_t k = 0; k < c; ++k) piv -= a[c * d + k] * a[c * d + k];
        piv = std::sqrt(piv);
        a[c * d + c] = piv;
        for (std::size_t r = c + 1; r < d; ++r) {
            double v = a[r * d + c];
            for (std::size_t k = 0; k < c; ++k) v -= a[r * d + k] * a[c * d + k];
            a[r * d + c] = v / piv;
        }
    }
    double q = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        double v = z[r];
        for (std::size_t k = 0; k < r; ++k) v -= a[r * d + k] * z[k];
        z[r] = v / a[r * d + r];
        q += z[r] * z[r];
    }
    return -0.5 * q;
}

inline double gmm_row(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                      const double* f, std::size_t i, double* a, double* z) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += std::exp(gmm_log_kernel(means, pair_cov, dim, i, j, a, z)) * f[j];
    }
    return acc;
}

inline double gmm_row_log(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                          const double* g, std::size_t i, double* a, double* z) {
    LogAccumulator lse;
    for (std::size_t j = 0; j < n; ++j) {
        if (g[j] == kNegInf) continue;
        lse.add(gmm_log_kernel(means, pair_cov, dim, i, j, a, z) + g[j]);
    }
    return lse.value();
}

struct LineLayout {
    std::int64_t n_lines = 0;
    std::int64_t length = 0;
    std::int64_t stride = 0;
};

inline LineLayout line_layout(int nx, int ny, int nz, int axis) {
    LineLayout lay;
    if (axis == 0) {
        lay.length = nx;
        lay.stride = 1;
        lay.n_lines = static_cast<std::int64_t>(ny) * nz;
    } else if (axis == 1) {
        lay.length = ny;
        lay.stride = nx;
        lay.n_lines = static_cast<std::int64_t>(nx) * nz;
    } else {
        lay.length = nz;
        lay.stride = static_cast<std::int64_t>(nx) * ny;
        lay.n_lines = static_cast<std::int64_t>(nx) * ny;
    }
    return lay;
}

inline std::int64_t line_base(int nx, int ny, int axis, std::int64_t line) {
    if (axis == 0) {
        // line indexes (y, z)
        const std::int64_t y = line % ny;
        const std::int64_t z = line / ny;
        return (z * ny + y) * nx;
    }
    if (axis == 1) {
        // line indexes (x, z)
        const std::int64_t x = line % nx;
        const std::int64_t z = line / nx;
        return z * static_cast<std::int64_t>(nx) * ny + x;
    }
    // line indexes (x, y)
    const std::int64_t x = line % nx;
    const std::int64_t y = line / nx;
    return y * static_cast<std::int64_t>(nx) + x;
}

inline void voxel_line(const double* in, double* out, std::int64_t base, std::int64_t length,
                       std::int64_t stride, const std::vector<double>& taps) {
    const std::int64_t radius = (static_cast<std::int64_t>(taps.size()) - 1) / 2;
    for (std::int64_t i = 0; i < length; ++i) {
        const std::int64_t lo = i - radius < 0 ? -i : -radius;
        const std::int64_t hi = i + radius >= length ? length - 1 - i : radius;
        double acc = 0.0;
        for (std::int64_t k = lo; k <= hi; ++k) {
            acc += taps[static_cast<std::size_t>(k + radius)] * in[base + (i + k) * stride];
        }
        out[base + i * stride] = acc;
    }
}

inline double graph_row(const std::size_t* row_ptr, const std::size_t* col_idx, const double* weights,
                        const double* degrees, std::size_t n, double epsilon, const double* x,
                        double total, std::size_t i) {
    double acc = (degrees[i] + epsilon * static_cast<double>(n)) * x[i];
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
        acc += weights[e] * x[col_idx[e]];
    }
    acc += epsilon * total;
    return 0.5 * acc;
}

inline double dense_row(const double* k, std::size_t n, const double* x, std::size_t i) {
    const double* row = k + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    return acc;
}

} // namespace

// ===== serial reference =====================================================

namespace serial {

void gaussian_matvec(const double* positions, std::size_t n, std::size_t dim,
                     double inv_two_sigma_sq, const double* f, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = gaussian_row(positions, n, dim, inv_two_sigma_sq, f, i);
}

void exponential_matvec(const double* positions, std::size_t n, std::size_t dim,
                        double inv_sigma, const double* f, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = exponential_row(positions, n, dim, inv_sigma, f, i);
}

void gaussian_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                         double inv_two_sigma_sq, const double* g, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = gaussian_row_log(positions, n, dim, inv_two_sigma_sq, g, i);
}

void exponential_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                            double inv_sigma, const double* g, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = exponential_row_log(positions, n, dim, inv_sigma, g, i);
}

void gmm_matvec(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                const double* f, double* y) {
    std::vector<double> a(dim * dim), z(dim);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = gmm_row(means, pair_cov, n, dim, f, i, a.data(), z.data());
}

void gmm_matvec_log(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                    const double* g, double* y) {
    std::vector<double> a(dim * dim), z(dim);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = gmm_row_log(means, pair_cov, n, dim, g, i, a.data(), z.data());
}

void voxel_axis_pass(const double* in, double* out, int nx, int ny, int nz, int axis,
                     const std::vector<double>& taps) {
    const LineLayout lay = line_layout(nx, ny, nz, axis);
    for (std::int64_t line = 0; line < lay.n_lines; ++line)
        voxel_line(in, out, line_base(nx, ny, axis, line), lay.length, lay.stride, taps);
}

void graph_matvec(const std::size_t* row_ptr, const std::size_t* col_idx, const double* weights,
                  const double* degrees, std::size_t n, double epsilon, const double* x, double* y) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += x[j];
    for (std::size_t i = 0; i < n; ++i)
        y[i] = graph_row(row_ptr, col_idx, weights, degrees, n, epsilon, x, total, i);
}

void dense_matvec(const double* k, std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = dense_row(k, n, x, i);
}

} // namespace serial

// ===== OpenMP build =========================================================
// Rows/lines are independent; schedule(static) keeps the assignment fixed.

namespace parallel {

void gaussian_matvec(const double* positions, std::size_t n, std::size_t dim,
                     double inv_two_sigma_sq, const double* f, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        y[i] = gaussian_row(positions, n, dim, inv_two_sigma_sq, f, static_cast<std::size_t>(i));
}

void exponential_matvec(const double* positions, std::size_t n, std::size_t dim,
                        double inv_sigma, const double* f, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        y[i] = exponential_row(positions, n, dim, inv_sigma, f, static_cast<std::size_t>(i));
}

void gaussian_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                         double inv_two_sigma_sq, const double* g, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        y[i] = gaussian_row_log(positions, n, dim, inv_two_sigma_sq, g, static_cast<std::size_t>(i));
}

void exponential_matvec_log(const double* positions, std::size_t n, std::size_t dim,
                            double inv_sigma, const double* g, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        y[i] = exponential_row_log(positions, n, dim, inv_sigma, g, static_cast<std::size_t>(i));
}

void gmm_matvec(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                const double* f, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel
    {
        std::vector<double> a(dim * dim), z(dim);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < nn; ++i)
            y[i] = gmm_row(means, pair_cov, n, dim, f, static_cast<std::size_t>(i), a.data(), z.data());
    }
}

void gmm_matvec_log(const double* means, const double* pair_cov, std::size_t n, std::size_t dim,
                    const double* g, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel
    {
        std::vector<double> a(dim * dim), z(dim);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < nn; ++i)
            y[i] = gmm_row_log(means, pair_cov, n, dim, g, static_cast<std::size_t>(i), a.data(), z.data());
    }
}

void voxel_axis_pass(const double* in, double* out, int nx, int ny, int nz, int axis,
                     const std::vector<double>& taps) {
    const LineLayout lay = line_layout(nx, ny, nz, axis);
#pragma omp parallel for schedule(static)
    for (std::int64_t line = 0; line < lay.n_lines; ++line)
        voxel_line(in, out, line_base(nx, ny, axis, line), lay.length, lay.stride, taps);
}

void graph_matvec(const std::size_t* row_ptr, const std::size_t* col_idx, const double* weights,
                  const double* degrees, std::size_t n, double epsilon, const double* x, double* y) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += x[j];
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        y[i] = graph_row(row_ptr, col_idx, weights, degrees, n, epsilon, x, total,
                         static_cast<std::size_t>(i));
}

void dense_matvec(const double* k, std::size_t n, const double* x, double* y) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) y[i] = dense_row(k, n, x, static_cast<std::size_t>(i));
}

} // namespace parallel

} // namespace otdiff::kernels
