#include "otdiff/spectral.hpp"

#include "otdiff/error.hpp"
#include "otdiff/linalg.hpp"
#include "otdiff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace otdiff {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Conjugated matvec y = B x with B = M^{1/2} Lambda K Lambda M^{1/2};
// `weight` holds sqrt(m_i) * lambda_i.
struct ConjugatedOperator {
    const SmoothingOperator* op;
    std::vector<double> weight;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = weight.size();
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = weight[i] * x[i];
        op->apply_kernel(t.data(), y.data());
        for (std::size_t i = 0; i < n; ++i) y[i] *= weight[i];
    }
};

void orthogonalize_against(std::vector<double>& u, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const std::vector<double>& v : basis) {
            const double c = dot(v, u);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] -= c * v[i];
        }
}

struct RitzInfo {
    std::vector<double> values;     // ascending from the tridiagonal solve
    DenseMatrix vectors;            // T eigenvectors, columns
};

RitzInfo solve_tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta) {
    RitzInfo info;
    info.values = alpha;
    info.vectors = DenseMatrix::identity(alpha.size());
    linalg::tridiag_eigh(info.values, beta, &info.vectors);
    return info;
}

} // namespace

SpectralBasis top_eigenpairs(const DiffusionOperator& diffusion, int k, const EigsOptions& options) {
    const std::size_t n = diffusion.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw SizeError("top_eigenpairs: k must be in [1, N]");

    ConjugatedOperator conj;
    conj.op = &diffusion.op();
    conj.weight.resize(n);
    {
        const std::vector<double>& m = diffusion.op().masses();
        const std::vector<double>& ell = diffusion.scaling().log_scales;
        for (std::size_t i = 0; i < n; ++i) conj.weight[i] = std::sqrt(m[i]) * std::exp(ell[i]);
    }

    const std::size_t max_dim =
        std::min<std::size_t>(n, std::max<std::size_t>(static_cast<std::size_t>(options.max_iters),
                                                       static_cast<std::size_t>(k)));
    Rng rng(options.seed);

    std::vector<std::vector<double>> basis; // Lanczos vectors, kept for full reorthogonalization
    std::vector<double> alpha, beta;

    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    const double v0n = norm(v);
    for (double& x : v) x /= v0n;
    basis.push_back(v);

    const double breakdown_tol = 1e-12;
    const std::size_t check_interval = std::max<std::size_t>(10, static_cast<std::size_t>(k));

    std::vector<double> u(n);
    bool converged = false;
    while (basis.size() <= max_dim) {
        const std::size_t j = basis.size() - 1;
        conj.apply(basis[j], u);
        const double a = dot(basis[j], u);
        alpha.push_back(a);
        for (std::size_t i = 0; i < n; ++i) u[i] -= a * basis[j][i];
        if (j > 0)
            for (std::size_t i = 0; i < n; ++i) u[i] -= beta[j - 1] * basis[j - 1][i];
        orthogonalize_against(u, basis);

        double b = norm(u);
        if (b <= breakdown_tol) {
            // Krylov space is invariant: deflate with a fresh random direction.
            if (basis.size() == n) {
                // full space reached; T now holds the exact spectrum
                break;
            }
            b = 0.0;
            std::vector<double> fresh(n);
            double fn = 0.0;
            do {
                for (double& x : fresh) x = rng.normal();
                orthogonalize_against(fresh, basis);
                fn = norm(fresh);
            } while (fn < 1e-6);
            for (double& x : fresh) x /= fn;
            u = std::move(fresh);
        } else {
            for (double& x : u) x /= b;
        }

        if (basis.size() == max_dim) {
            beta.push_back(b); // recorded for the residual bound, no new vector
            break;
        }
        beta.push_back(b);
        basis.push_back(u);

        const std::size_t m = alpha.size();
        if (m >= static_cast<std::size_t>(k) + 2 && (m % check_interval == 0)) {
            RitzInfo ritz = solve_tridiagonal(alpha, std::vector<double>(beta.begin(), beta.end() - 1));
            bool plausible = true;
            const double blast = beta.back();
            for (int idx = 0; idx < k; ++idx) {
                const std::size_t col = ritz.values.size() - 1 - static_cast<std::size_t>(idx);
                const double bound = std::abs(blast * ritz.vectors(m - 1, col));
                if (bound > 0.5 * options.solver_tol) {
                    plausible = false;
                    break;
                }
            }
            if (plausible) {
                converged = true;
                break;
            }
        }
    }
    (void)converged;

    // Final Ritz extraction from whatever dimension was reached.
    const std::size_t m = alpha.size();
    std::vector<double> sub(beta.begin(), beta.end());
    if (sub.size() >= m) sub.resize(m - 1);
    RitzInfo ritz = solve_tridiagonal(alpha, sub);

    SpectralBasis out;
    out.rows = n;
    out.count = static_cast<std::size_t>(k);
    out.eigenvalues.resize(out.count);
    out.eigenvectors.assign(n * out.count, 0.0);
    out.residuals.resize(out.count);

    std::vector<double> y(n), by(n);
    for (int idx = 0; idx < k; ++idx) {
        const std::size_t col = ritz.values.size() - 1 - static_cast<std::size_t>(idx);
        double theta = ritz.values[col];

        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            const double c = ritz.vectors(r, col);
            const std::vector<double>& vr = basis[r];
            for (std::size_t i = 0; i < n; ++i) y[i] += c * vr[i];
        }
        const double yn = norm(y);
        for (double& x : y) x /= yn;

        conj.apply(y, by);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = by[i] - theta * y[i];
            res += r * r;
        }
        out.residuals[static_cast<std::size_t>(idx)] = std::sqrt(res);

        // clamp into [0,1] when within solver tolerance of the boundary
        if (theta > 1.0 && theta <= 1.0 + options.solver_tol) theta = 1.0;
        if (theta < 0.0 && theta >= -options.solver_tol) theta = 0.0;
        out.eigenvalues[static_cast<std::size_t>(idx)] = theta;

        // Phi = M^{-1/2} y, then sign convention: largest-magnitude entry positive.
        double* phi = out.eigenvectors.data() + static_cast<std::size_t>(idx) * n;
        const std::vector<double>& masses = diffusion.op().masses();
        for (std::size_t i = 0; i < n; ++i) phi[i] = y[i] / std::sqrt(masses[i]);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(phi[i]) > std::abs(phi[arg])) arg = i;
        if (phi[arg] < 0.0)
            for (std::size_t i = 0; i < n; ++i) phi[i] = -phi[i];
    }
    return out;
}

SpectralBasis top_eigenpairs(const DiffusionOperator& diffusion, int k, double solver_tol,
                             int max_iters) {
    EigsOptions options;
    options.solver_tol = solver_tol;
    options.max_iters = max_iters;
    return top_eigenpairs(diffusion, k, options);
}

std::vector<double> estimate_laplacian_eigenvalues(const SpectralBasis& basis, double sigma,
                                                   SpectralModality modality,
                                                   std::optional<double> gmm_trace_avg,
                                                   std::optional<int> d) {
    if (!(sigma > 0.0)) throw ValueError("estimate_laplacian_eigenvalues: sigma must be positive");
    double denom = sigma * sigma;
    if (modality == SpectralModality::gmm) {
        if (!gmm_trace_avg.has_value() || !d.has_value())
            throw ValueError("estimate_laplacian_eigenvalues: gmm requires trace average and d");
        if (*d != 2 && *d != 3)
            throw ValueError("estimate_laplacian_eigenvalues: gmm heuristic expects d in {2, 3}");
        denom += (2.0 / static_cast<double>(*d)) * (*gmm_trace_avg);
    }
    const double factor = 2.0 / denom;

    std::vector<double> estimates;
    estimates.reserve(basis.count);
    for (std::size_t i = 0; i < basis.count; ++i) {
        const double lq = basis.eigenvalues[i];
        if (lq <= 0.0) {
            std::cerr << "warning: diffusion eigenvalue " << lq
                      << " <= 0 excluded from Laplacian estimates\n";
            continue;
        }
        const double estimate = -factor * std::log(std::min(lq, 1.0));
        estimates.push_back(estimate + 0.0); // normalizes -0 from log(1)
    }
    std::sort(estimates.begin(), estimates.end());
    return estimates;
}

double mixture_trace_average(const GaussianMixture& gmm) {
    double weighted = 0.0;
    double total = 0.0;
    for (const GaussianComponent& c : gmm.components) {
        double trace = 0.0;
        for (std::size_t k = 0; k < gmm.dim; ++k) trace += c.covariance[k * gmm.dim + k];
        weighted += c.weight * trace;
        total += c.weight;
    }
    return weighted / total;
}

} // namespace otdiff
