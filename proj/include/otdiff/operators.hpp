#pragma once

#include "otdiff/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace otdiff {

// =============================================================================
// Smoothing operators S = K M: symmetric nonnegative kernel K times the
// diagonal mass matrix, exposed as a black-box matrix-vector product. The
// kernel part is never assembled; apply_kernel computes y = K x directly from
// the modality payload.
// =============================================================================

enum class Modality {
    dense,
    gaussian_points,
    exponential_points,
    graph,
    voxel,
    gmm,
};

const char* modality_name(Modality m);

namespace detail {

struct PointsPayload {
    std::size_t dim = 0;
    std::vector<double> positions; // N x dim
};

struct GraphPayload {
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> weights;
    std::vector<double> degrees; // weighted degree of A (without epsilon)
    bool connected = false;
};

struct VoxelPayload {
    std::array<int, 3> dims{0, 0, 0};
    double spacing = 0.0;
    std::vector<std::int64_t> linear_index; // occupied voxel -> dense grid cell
    std::vector<double> taps;               // truncated 1-D Gaussian, |k*h| <= 4*sigma
};

struct GmmPayload {
    std::size_t dim = 0;
    std::vector<double> means;    // N x dim
    std::vector<double> pair_cov; // N x dim x dim, sigma^2/2 * I + Sigma_i
};

struct DensePayload {
    DenseMatrix kernel;
};

using Payload =
    std::variant<PointsPayload, GraphPayload, VoxelPayload, GmmPayload, DensePayload>;

} // namespace detail

class SmoothingOperator {
public:
    Modality modality() const { return modality_; }
    std::size_t size() const { return masses_.size(); }
    const std::vector<double>& masses() const { return masses_; }
    double sigma() const { return sigma_; }
    double epsilon() const { return epsilon_; }
    bool supports_log_domain() const { return log_capable_; }
    bool graph_is_connected() const;

    // y = K x. Contiguous length-N buffers; rows are computed independently in
    // fixed index order, so output is deterministic for any thread count.
    void apply_kernel(const double* x, double* y) const;
    // logy = log(K exp(logx)); entries of logx may be -inf.
    void apply_kernel_log(const double* logx, double* logy) const;

    // Route matvecs through the serial reference kernels instead of the
    // OpenMP ones. Results are bit-identical; used by tests and the benchmark.
    void set_serial_reference(bool serial) { serial_ = serial; }
    bool serial_reference() const { return serial_; }

    friend SmoothingOperator build_gaussian_operator(const PointCloud&, double);
    friend SmoothingOperator build_exponential_operator(const PointCloud&, double);
    friend SmoothingOperator build_graph_operator(const Graph&, double);
    friend SmoothingOperator build_gmm_operator(const GaussianMixture&, double);
    friend SmoothingOperator build_voxel_operator(const VoxelGrid&, double);
    friend SmoothingOperator build_dense_operator(const DenseMatrix&, const std::vector<double>&);

private:
    Modality modality_ = Modality::dense;
    std::vector<double> masses_;
    double sigma_ = 0.0;
    double epsilon_ = 0.0;
    bool log_capable_ = false;
    bool serial_ = false;
    detail::Payload payload_;
};

// k(x, y) = exp(-|x-y|^2 / (2 sigma^2))
SmoothingOperator build_gaussian_operator(const PointCloud& cloud, double sigma);

// k(x, y) = exp(-|x-y| / sigma)
SmoothingOperator build_exponential_operator(const PointCloud& cloud, double sigma);

// K = 1/2 (D_eps + A_eps) with A_eps = A + eps*11', diagonal included, and
// D_eps = diag(A_eps 1). Warns when eps = 0 on a disconnected graph.
SmoothingOperator build_graph_operator(const Graph& graph, double epsilon);

// K_ij = exp(-1/2 (x_i-x_j)' (sigma^2 I + Sigma_i + Sigma_j)^{-1} (x_i-x_j));
// requires sigma > 0 or strictly positive-definite covariances.
SmoothingOperator build_gmm_operator(const GaussianMixture& gmm, double sigma);

// Truncated separable Gaussian between voxel centers, taps cut at |k*h| <= 4*sigma.
SmoothingOperator build_voxel_operator(const VoxelGrid& grid, double sigma);

// Explicit symmetric kernel; used by tests and tiny inputs.
SmoothingOperator build_dense_operator(const DenseMatrix& kernel, const std::vector<double>& masses);

// S f = K (M f), applied per channel.
Signal smatvec(const SmoothingOperator& op, const Signal& f);

// log(S exp(log_f)) via streaming logsumexp; CapabilityError when the modality
// has no closed-form log-kernel (graph, voxel, dense).
Signal smatvec_log(const SmoothingOperator& op, const Signal& log_f);

// KDE mass correction: m(x) = 1 / sum_y k(x, y) over non-empty voxels, with an
// isotropic Gaussian of deviation sigma_voxels (in voxel units).
VoxelGrid estimate_voxel_masses(const VoxelGrid& grid, double sigma_voxels = 3.0);

} // namespace otdiff
