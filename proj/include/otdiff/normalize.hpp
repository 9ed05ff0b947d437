#pragma once

#include "otdiff/operators.hpp"
#include "otdiff/types.hpp"

#include <string>
#include <vector>

namespace otdiff {

// =============================================================================
// Symmetric Sinkhorn normalization: find the diagonal Lambda = diag(e^{l_i})
// that turns S = K M into the diffusion operator Q = Lambda S Lambda with
// Q 1 = 1. One iteration costs one kernel matvec.
// =============================================================================

struct ScalingVector {
    std::vector<double> log_scales; // l_i, Lambda_ii = e^{l_i}
    bool converged = false;
    double final_error = 0.0; // mass-weighted mean |Q1 - 1|
    int iterations = 0;       // number of multiplicative updates applied
};

enum class SinkhornMode { linear, log_domain };

struct SinkhornOptions {
    double tol = 1e-6;
    int max_iter = 200;
    SinkhornMode mode = SinkhornMode::linear;
    // Warm start / perturbed start; empty = Lambda = I.
    std::vector<double> initial_log_scales;
    // When set, receives the error after 0, 1, 2, ... updates.
    std::vector<double>* error_trace = nullptr;
};

// Convergence metric is the mass-weighted mean deviation
//   sum_i m_i |(Lambda S Lambda 1)_i - 1| / sum_i m_i,
// checked before each update, so `iterations` counts effective corrections.
// Non-convergence is reported through `converged`, not thrown; NaN or
// non-positive row sums throw NumericalError. Graphs require epsilon > 0 or
// connectivity.
ScalingVector sinkhorn_normalize(const SmoothingOperator& op, const SinkhornOptions& options);
ScalingVector sinkhorn_normalize(const SmoothingOperator& op, double tol = 1e-6, int max_iter = 200,
                                 SinkhornMode mode = SinkhornMode::linear);

double convergence_error(const SmoothingOperator& op, const ScalingVector& scaling);

// Q = Lambda S Lambda; requires a converged scaling of matching length.
class DiffusionOperator {
public:
    DiffusionOperator(SmoothingOperator op, ScalingVector scaling);

    const SmoothingOperator& op() const { return op_; }
    const ScalingVector& scaling() const { return scaling_; }
    std::size_t size() const { return op_.size(); }

    Signal apply(const Signal& f) const; // Q f
private:
    SmoothingOperator op_;
    ScalingVector scaling_;
};

// Q^steps f, channel-independent; steps = 0 returns f.
Signal diffuse(const DiffusionOperator& diffusion, const Signal& f, int steps = 1);

// Baseline normalizations of the raw kernel K (mass matrix not involved):
// row-stochastic D^{-1} K f and symmetric D^{-1/2} K D^{-1/2} f with
// D = diag(K 1). Zero row sums throw NumericalError.
Signal row_normalize_apply(const SmoothingOperator& op, const Signal& f);
Signal symmetric_normalize_apply(const SmoothingOperator& op, const Signal& f);

// Low-rank heat approximation sum_{i<=rank} e^{-t lambda_i} Phi_i Phi_i' f on
// the unnormalized graph Laplacian D - A (dense eigendecomposition, N <= 2048).
Signal spectral_truncation_apply(const Graph& graph, double t, int rank, const Signal& f);

// Persistence: CSV `index,log_scale` plus a JSON sidecar carrying
// {tol, iterations, final_error, sigma, modality, converged}.
void save_scaling(const std::string& csv_path, const std::string& json_path,
                  const ScalingVector& scaling, double tol, double sigma, Modality modality);
ScalingVector load_scaling(const std::string& csv_path, const std::string& json_path);

} // namespace otdiff
