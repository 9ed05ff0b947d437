#include "otdiff/oracle.hpp"

#include "otdiff/error.hpp"
#include "otdiff/linalg.hpp"

#include <cmath>

namespace otdiff::oracle {

DenseMatrix dense_assemble(const SmoothingOperator& op) {
    const std::size_t n = op.size();
    if (n > 4096) throw SizeError("dense_assemble: capped at N = 4096");
    DenseMatrix s(n);
    Signal basis(n, 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        basis.at(j, 0) = 1.0;
        const Signal column = smatvec(op, basis);
        for (std::size_t i = 0; i < n; ++i) s(i, j) = column.at(i, 0);
        basis.at(j, 0) = 0.0;
    }
    return s;
}

DenseMatrix dense_kernel(const SmoothingOperator& op) {
    DenseMatrix k = dense_assemble(op);
    const std::vector<double>& m = op.masses();
    for (std::size_t i = 0; i < k.n; ++i)
        for (std::size_t j = 0; j < k.n; ++j) k(i, j) /= m[j];
    return k;
}

DenseMatrix dense_scaled_kernel(const SmoothingOperator& op, const ScalingVector& scaling) {
    DenseMatrix w = dense_kernel(op);
    if (scaling.log_scales.size() != w.n) throw ShapeError("dense_scaled_kernel: scaling length mismatch");
    std::vector<double> lambda(w.n);
    for (std::size_t i = 0; i < w.n; ++i) lambda[i] = std::exp(scaling.log_scales[i]);
    for (std::size_t i = 0; i < w.n; ++i)
        for (std::size_t j = 0; j < w.n; ++j) w(i, j) *= lambda[i] * lambda[j];
    return w;
}

ScalingVector dense_sinkhorn(const DenseMatrix& s, const std::vector<double>& masses,
                             double tol, int max_iter) {
    const std::size_t n = s.n;
    if (masses.size() != n) throw ShapeError("dense_sinkhorn: mass vector length mismatch");
    double total_mass = 0.0;
    for (double m : masses) total_mass += m;

    std::vector<double> lambda(n, 1.0), d(n);
    ScalingVector result;
    int updates = 0;
    while (true) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += s(i, j) * lambda[j];
            if (!std::isfinite(acc) || !(acc > 0.0))
                throw NumericalError("dense_sinkhorn: non-positive or non-finite row sum");
            d[i] = acc;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err += masses[i] * std::abs(lambda[i] * d[i] - 1.0);
        err /= total_mass;
        if (!std::isfinite(err)) throw NumericalError("dense_sinkhorn: NaN in convergence metric");
        result.final_error = err;
        result.iterations = updates;
        if (err <= tol) {
            result.converged = true;
            break;
        }
        if (updates >= max_iter) {
            result.converged = false;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) lambda[i] = std::sqrt(lambda[i] / d[i]);
        ++updates;
    }
    result.log_scales.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.log_scales[i] = std::log(lambda[i]);
    return result;
}

DenseEigs dense_generalized_eigs(const DenseMatrix& scaled_kernel, const std::vector<double>& masses) {
    const std::size_t n = scaled_kernel.n;
    if (n > 512) throw SizeError("dense_generalized_eigs: capped at N = 512");
    if (masses.size() != n) throw ShapeError("dense_generalized_eigs: mass vector length mismatch");

    DenseMatrix b(n);
    std::vector<double> sqrt_m(n);
    for (std::size_t i = 0; i < n; ++i) sqrt_m[i] = std::sqrt(masses[i]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = sqrt_m[i] * scaled_kernel(i, j) * sqrt_m[j];

    std::vector<double> ascending;
    DenseMatrix y;
    linalg::jacobi_eigh(b, ascending, y);

    DenseEigs out;
    out.eigenvalues.resize(n);
    out.vectors = DenseMatrix(n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = n - 1 - col; // descending order
        out.eigenvalues[col] = ascending[src];
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            out.vectors(i, col) = y(i, src) / sqrt_m[i];
            if (std::abs(out.vectors(i, col)) > std::abs(out.vectors(arg, col))) arg = i;
        }
        if (out.vectors(arg, col) < 0.0)
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, col) = -out.vectors(i, col);
    }
    return out;
}

} // namespace otdiff::oracle
