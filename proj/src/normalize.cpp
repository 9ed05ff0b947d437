#include "otdiff/normalize.hpp"

#include "otdiff/error.hpp"
#include "otdiff/io.hpp"
#include "otdiff/linalg.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace otdiff {

namespace {

void check_graph_hypothesis(const SmoothingOperator& op) {
    if (op.modality() == Modality::graph && op.epsilon() == 0.0 && !op.graph_is_connected())
        throw NumericalError(
            "sinkhorn_normalize: disconnected graph with epsilon = 0 violates the "
            "positivity hypothesis; regularize with epsilon > 0");
}

double weighted_error(const std::vector<double>& masses, const std::vector<double>& q1) {
    double err = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        err += masses[i] * std::abs(q1[i] - 1.0);
        total += masses[i];
    }
    return err / total;
}

} // namespace

ScalingVector sinkhorn_normalize(const SmoothingOperator& op, const SinkhornOptions& options) {
    check_graph_hypothesis(op);
    const std::size_t n = op.size();
    const std::vector<double>& m = op.masses();
    if (!options.initial_log_scales.empty() && options.initial_log_scales.size() != n)
        throw ShapeError("sinkhorn_normalize: initial scaling length mismatch");
    if (options.error_trace) options.error_trace->clear();

    ScalingVector result;
    std::vector<double> q1(n);

    if (options.mode == SinkhornMode::linear) {
        std::vector<double> lambda(n, 1.0);
        if (!options.initial_log_scales.empty())
            for (std::size_t i = 0; i < n; ++i) lambda[i] = std::exp(options.initial_log_scales[i]);

        std::vector<double> scaled(n);
        std::vector<double> d(n);
        int updates = 0;
        while (true) {
            for (std::size_t i = 0; i < n; ++i) scaled[i] = m[i] * lambda[i];
            op.apply_kernel(scaled.data(), d.data());
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(d[i]) || !(d[i] > 0.0))
                    throw NumericalError("sinkhorn_normalize: non-positive or non-finite row sum");
                q1[i] = lambda[i] * d[i];
            }
            const double err = weighted_error(m, q1);
            if (!std::isfinite(err)) throw NumericalError("sinkhorn_normalize: NaN in convergence metric");
            if (options.error_trace) options.error_trace->push_back(err);
            result.final_error = err;
            result.iterations = updates;
            if (err <= options.tol) {
                result.converged = true;
                break;
            }
            if (updates >= options.max_iter) {
                result.converged = false;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) lambda[i] = std::sqrt(lambda[i] / d[i]);
            ++updates;
        }
        result.log_scales.resize(n);
        for (std::size_t i = 0; i < n; ++i) result.log_scales[i] = std::log(lambda[i]);
    } else {
        std::vector<double> ell(n, 0.0);
        if (!options.initial_log_scales.empty()) ell = options.initial_log_scales;
        std::vector<double> logm(n);
        for (std::size_t i = 0; i < n; ++i) logm[i] = std::log(m[i]);

        std::vector<double> shifted(n);
        std::vector<double> logd(n);
        int updates = 0;
        while (true) {
            for (std::size_t i = 0; i < n; ++i) shifted[i] = logm[i] + ell[i];
            op.apply_kernel_log(shifted.data(), logd.data());
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(logd[i]))
                    throw NumericalError("sinkhorn_normalize: non-finite log row sum");
                q1[i] = std::exp(ell[i] + logd[i]);
            }
            const double err = weighted_error(m, q1);
            if (!std::isfinite(err)) throw NumericalError("sinkhorn_normalize: NaN in convergence metric");
            if (options.error_trace) options.error_trace->push_back(err);
            result.final_error = err;
            result.iterations = updates;
            if (err <= options.tol) {
                result.converged = true;
                break;
            }
            if (updates >= options.max_iter) {
                result.converged = false;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) ell[i] = 0.5 * (ell[i] - logd[i]);
            ++updates;
        }
        result.log_scales = std::move(ell);
    }
    return result;
}

ScalingVector sinkhorn_normalize(const SmoothingOperator& op, double tol, int max_iter,
                                 SinkhornMode mode) {
    SinkhornOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.mode = mode;
    return sinkhorn_normalize(op, options);
}

double convergence_error(const SmoothingOperator& op, const ScalingVector& scaling) {
    const std::size_t n = op.size();
    if (scaling.log_scales.size() != n) throw ShapeError("convergence_error: scaling length mismatch");
    const std::vector<double>& m = op.masses();
    std::vector<double> scaled(n), d(n), q1(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = m[i] * std::exp(scaling.log_scales[i]);
    op.apply_kernel(scaled.data(), d.data());
    for (std::size_t i = 0; i < n; ++i) q1[i] = std::exp(scaling.log_scales[i]) * d[i];
    return weighted_error(m, q1);
}

DiffusionOperator::DiffusionOperator(SmoothingOperator op, ScalingVector scaling)
    : op_(std::move(op)), scaling_(std::move(scaling)) {
    if (scaling_.log_scales.size() != op_.size())
        throw ShapeError("DiffusionOperator: scaling length does not match operator");
    if (!scaling_.converged)
        throw ValueError("DiffusionOperator: scaling did not converge; rerun sinkhorn_normalize");
    for (double l : scaling_.log_scales)
        if (!std::isfinite(l)) throw ValueError("DiffusionOperator: non-finite log scale");
}

Signal DiffusionOperator::apply(const Signal& f) const {
    const std::size_t n = op_.size();
    if (f.rows != n) throw ShapeError("DiffusionOperator::apply: signal length mismatch");
    const std::vector<double>& m = op_.masses();
    Signal out(n, f.channels);
    std::vector<double> lambda(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = std::exp(scaling_.log_scales[i]);
    std::vector<double> t(n);
    for (std::size_t c = 0; c < f.channels; ++c) {
        const double* fc = f.channel(c);
        double* oc = out.channel(c);
        for (std::size_t i = 0; i < n; ++i) t[i] = m[i] * lambda[i] * fc[i];
        op_.apply_kernel(t.data(), oc);
        for (std::size_t i = 0; i < n; ++i) oc[i] *= lambda[i];
    }
    return out;
}

Signal diffuse(const DiffusionOperator& diffusion, const Signal& f, int steps) {
    if (steps < 0) throw ValueError("diffuse: steps must be nonnegative");
    Signal out = f;
    for (int s = 0; s < steps; ++s) out = diffusion.apply(out);
    return out;
}

namespace {

std::vector<double> kernel_row_sums(const SmoothingOperator& op) {
    const std::size_t n = op.size();
    std::vector<double> ones(n, 1.0), sums(n);
    op.apply_kernel(ones.data(), sums.data());
    for (double s : sums)
        if (!(s > 0.0) || !std::isfinite(s))
            throw NumericalError("normalization: kernel has a non-positive row sum");
    return sums;
}

} // namespace

Signal row_normalize_apply(const SmoothingOperator& op, const Signal& f) {
    const std::size_t n = op.size();
    if (f.rows != n) throw ShapeError("row_normalize_apply: signal length mismatch");
    const std::vector<double> sums = kernel_row_sums(op);
    Signal out(n, f.channels);
    for (std::size_t c = 0; c < f.channels; ++c) {
        op.apply_kernel(f.channel(c), out.channel(c));
        double* oc = out.channel(c);
        for (std::size_t i = 0; i < n; ++i) oc[i] /= sums[i];
    }
    return out;
}

Signal symmetric_normalize_apply(const SmoothingOperator& op, const Signal& f) {
    const std::size_t n = op.size();
    if (f.rows != n) throw ShapeError("symmetric_normalize_apply: signal length mismatch");
    const std::vector<double> sums = kernel_row_sums(op);
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(sums[i]);
    Signal out(n, f.channels);
    std::vector<double> t(n);
    for (std::size_t c = 0; c < f.channels; ++c) {
        const double* fc = f.channel(c);
        double* oc = out.channel(c);
        for (std::size_t i = 0; i < n; ++i) t[i] = inv_sqrt[i] * fc[i];
        op.apply_kernel(t.data(), oc);
        for (std::size_t i = 0; i < n; ++i) oc[i] *= inv_sqrt[i];
    }
    return out;
}

Signal spectral_truncation_apply(const Graph& graph, double t, int rank, const Signal& f) {
    graph.validate();
    const std::size_t n = graph.n_vertices;
    if (n > 2048) throw SizeError("spectral_truncation_apply: dense eigendecomposition capped at N = 2048");
    if (rank < 1 || static_cast<std::size_t>(rank) > n)
        throw SizeError("spectral_truncation_apply: rank must be in [1, N]");
    if (f.rows != n) throw ShapeError("spectral_truncation_apply: signal length mismatch");

    // Unnormalized graph Laplacian D - A with edge weights in both terms.
    DenseMatrix laplacian(n);
    for (const GraphEdge& e : graph.edges) {
        laplacian(e.u, e.v) -= e.weight;
        laplacian(e.v, e.u) -= e.weight;
        laplacian(e.u, e.u) += e.weight;
        laplacian(e.v, e.v) += e.weight;
    }
    std::vector<double> eigenvalues;
    DenseMatrix vectors;
    linalg::jacobi_eigh(laplacian, eigenvalues, vectors); // ascending, constant mode first

    Signal out(n, f.channels);
    for (std::size_t c = 0; c < f.channels; ++c) {
        const double* fc = f.channel(c);
        double* oc = out.channel(c);
        for (int r = 0; r < rank; ++r) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += vectors(i, static_cast<std::size_t>(r)) * fc[i];
            const double damp = std::exp(-t * eigenvalues[static_cast<std::size_t>(r)]) * proj;
            for (std::size_t i = 0; i < n; ++i) oc[i] += damp * vectors(i, static_cast<std::size_t>(r));
        }
    }
    return out;
}

void save_scaling(const std::string& csv_path, const std::string& json_path,
                  const ScalingVector& scaling, double tol, double sigma, Modality modality) {
    std::vector<double> index(scaling.log_scales.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<double>(i);
    io::write_table(csv_path, {"index", "log_scale"}, {index, scaling.log_scales});

    nlohmann::json sidecar;
    sidecar["tol"] = tol;
    sidecar["iterations"] = scaling.iterations;
    sidecar["final_error"] = scaling.final_error;
    sidecar["sigma"] = sigma;
    sidecar["modality"] = modality_name(modality);
    sidecar["converged"] = scaling.converged;
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + json_path);
    out << sidecar.dump(2) << "\n";
}

ScalingVector load_scaling(const std::string& csv_path, const std::string& json_path) {
    const Signal table = io::load_signal(csv_path); // columns: log_scale (index skipped)
    ScalingVector scaling;
    if (table.channels != 1)
        throw FormatError(csv_path + ": expected columns index,log_scale");
    scaling.log_scales.assign(table.channel(0), table.channel(0) + table.rows);

    std::ifstream in(json_path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + json_path);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(json_path + ": " + e.what());
    }
    scaling.converged = sidecar.value("converged", false);
    scaling.final_error = sidecar.value("final_error", 0.0);
    scaling.iterations = sidecar.value("iterations", 0);
    return scaling;
}

} // namespace otdiff
