#include "otdiff/operators.hpp"

#include "otdiff/error.hpp"
#include "otdiff/kernels.hpp"
#include "otdiff/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace otdiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_masses(const std::vector<double>& masses) {
    std::vector<double> lm(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) lm[i] = std::log(masses[i]);
    return lm;
}

// Taps of the truncated 1-D Gaussian: weight exp(-(k h)^2 / (2 sigma^2)) for
// |k h| <= 4 sigma. The dense pairwise oracle applies the same cutoff.
std::vector<double> gaussian_taps(double spacing, double sigma) {
    const int radius = static_cast<int>(std::floor(4.0 * sigma / spacing));
    std::vector<double> taps(2 * radius + 1);
    const double c = 1.0 / (2.0 * sigma * sigma);
    for (int k = -radius; k <= radius; ++k)
        taps[static_cast<std::size_t>(k + radius)] = std::exp(-(k * spacing) * (k * spacing) * c);
    return taps;
}

} // namespace

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::dense: return "dense";
        case Modality::gaussian_points: return "gaussian_points";
        case Modality::exponential_points: return "exponential_points";
        case Modality::graph: return "graph";
        case Modality::voxel: return "voxel";
        case Modality::gmm: return "gmm";
    }
    return "unknown";
}

bool SmoothingOperator::graph_is_connected() const {
    if (const auto* g = std::get_if<detail::GraphPayload>(&payload_)) return g->connected;
    return true;
}

void SmoothingOperator::apply_kernel(const double* x, double* y) const {
    const std::size_t n = size();
    switch (modality_) {
        case Modality::gaussian_points: {
            const auto& p = std::get<detail::PointsPayload>(payload_);
            const double c = 1.0 / (2.0 * sigma_ * sigma_);
            if (serial_) kernels::serial::gaussian_matvec(p.positions.data(), n, p.dim, c, x, y);
            else kernels::parallel::gaussian_matvec(p.positions.data(), n, p.dim, c, x, y);
            return;
        }
        case Modality::exponential_points: {
            const auto& p = std::get<detail::PointsPayload>(payload_);
            const double c = 1.0 / sigma_;
            if (serial_) kernels::serial::exponential_matvec(p.positions.data(), n, p.dim, c, x, y);
            else kernels::parallel::exponential_matvec(p.positions.data(), n, p.dim, c, x, y);
            return;
        }
        case Modality::graph: {
            const auto& g = std::get<detail::GraphPayload>(payload_);
            if (serial_)
                kernels::serial::graph_matvec(g.row_ptr.data(), g.col_idx.data(), g.weights.data(),
                                              g.degrees.data(), n, epsilon_, x, y);
            else
                kernels::parallel::graph_matvec(g.row_ptr.data(), g.col_idx.data(), g.weights.data(),
                                                g.degrees.data(), n, epsilon_, x, y);
            return;
        }
        case Modality::gmm: {
            const auto& g = std::get<detail::GmmPayload>(payload_);
            if (serial_) kernels::serial::gmm_matvec(g.means.data(), g.pair_cov.data(), n, g.dim, x, y);
            else kernels::parallel::gmm_matvec(g.means.data(), g.pair_cov.data(), n, g.dim, x, y);
            return;
        }
        case Modality::voxel: {
            const auto& v = std::get<detail::VoxelPayload>(payload_);
            const std::int64_t cells =
                static_cast<std::int64_t>(v.dims[0]) * v.dims[1] * v.dims[2];
            std::vector<double> a(static_cast<std::size_t>(cells), 0.0);
            std::vector<double> b(static_cast<std::size_t>(cells), 0.0);
            for (std::size_t j = 0; j < n; ++j) a[static_cast<std::size_t>(v.linear_index[j])] = x[j];
            auto pass = serial_ ? kernels::serial::voxel_axis_pass : kernels::parallel::voxel_axis_pass;
            pass(a.data(), b.data(), v.dims[0], v.dims[1], v.dims[2], 0, v.taps);
            pass(b.data(), a.data(), v.dims[0], v.dims[1], v.dims[2], 1, v.taps);
            pass(a.data(), b.data(), v.dims[0], v.dims[1], v.dims[2], 2, v.taps);
            for (std::size_t i = 0; i < n; ++i) y[i] = b[static_cast<std::size_t>(v.linear_index[i])];
            return;
        }
        case Modality::dense: {
            const auto& d = std::get<detail::DensePayload>(payload_);
            if (serial_) kernels::serial::dense_matvec(d.kernel.a.data(), n, x, y);
            else kernels::parallel::dense_matvec(d.kernel.a.data(), n, x, y);
            return;
        }
    }
}

void SmoothingOperator::apply_kernel_log(const double* logx, double* logy) const {
    const std::size_t n = size();
    switch (modality_) {
        case Modality::gaussian_points: {
            const auto& p = std::get<detail::PointsPayload>(payload_);
            const double c = 1.0 / (2.0 * sigma_ * sigma_);
            if (serial_) kernels::serial::gaussian_matvec_log(p.positions.data(), n, p.dim, c, logx, logy);
            else kernels::parallel::gaussian_matvec_log(p.positions.data(), n, p.dim, c, logx, logy);
            return;
        }
        case Modality::exponential_points: {
            const auto& p = std::get<detail::PointsPayload>(payload_);
            const double c = 1.0 / sigma_;
            if (serial_) kernels::serial::exponential_matvec_log(p.positions.data(), n, p.dim, c, logx, logy);
            else kernels::parallel::exponential_matvec_log(p.positions.data(), n, p.dim, c, logx, logy);
            return;
        }
        case Modality::gmm: {
            const auto& g = std::get<detail::GmmPayload>(payload_);
            if (serial_) kernels::serial::gmm_matvec_log(g.means.data(), g.pair_cov.data(), n, g.dim, logx, logy);
            else kernels::parallel::gmm_matvec_log(g.means.data(), g.pair_cov.data(), n, g.dim, logx, logy);
            return;
        }
        default:
            throw CapabilityError(std::string("log-domain matvec not supported for modality ") +
                                  modality_name(modality_));
    }
}

SmoothingOperator build_gaussian_operator(const PointCloud& cloud, double sigma) {
    cloud.validate();
    if (!(sigma > 0.0)) throw ValueError("gaussian operator: sigma must be positive");
    SmoothingOperator op;
    op.modality_ = Modality::gaussian_points;
    op.masses_ = cloud.masses;
    op.sigma_ = sigma;
    op.log_capable_ = true;
    detail::PointsPayload p;
    p.dim = cloud.dim;
    p.positions = cloud.positions;
    op.payload_ = std::move(p);
    return op;
}

SmoothingOperator build_exponential_operator(const PointCloud& cloud, double sigma) {
    cloud.validate();
    if (!(sigma > 0.0)) throw ValueError("exponential operator: sigma must be positive");
    SmoothingOperator op;
    op.modality_ = Modality::exponential_points;
    op.masses_ = cloud.masses;
    op.sigma_ = sigma;
    op.log_capable_ = true;
    detail::PointsPayload p;
    p.dim = cloud.dim;
    p.positions = cloud.positions;
    op.payload_ = std::move(p);
    return op;
}

SmoothingOperator build_graph_operator(const Graph& graph, double epsilon) {
    graph.validate();
    if (epsilon < 0.0) throw ValueError("graph operator: epsilon must be nonnegative");
    const std::size_t n = graph.n_vertices;

    detail::GraphPayload g;
    g.connected = graph.connected();
    if (epsilon == 0.0 && !g.connected)
        std::cerr << "warning: graph is disconnected and epsilon = 0; "
                     "Sinkhorn normalization will be rejected\n";

    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const GraphEdge& e : graph.edges) {
        adj[e.u].emplace_back(e.v, e.weight);
        adj[e.v].emplace_back(e.u, e.weight);
    }
    g.row_ptr.assign(n + 1, 0);
    g.degrees.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        g.row_ptr[i + 1] = g.row_ptr[i] + adj[i].size();
        for (const auto& [j, w] : adj[i]) {
            g.col_idx.push_back(j);
            g.weights.push_back(w);
            g.degrees[i] += w;
        }
    }

    SmoothingOperator op;
    op.modality_ = Modality::graph;
    op.masses_ = graph.masses;
    op.epsilon_ = epsilon;
    op.log_capable_ = false;
    op.payload_ = std::move(g);
    return op;
}

SmoothingOperator build_gmm_operator(const GaussianMixture& gmm, double sigma) {
    gmm.validate();
    if (sigma < 0.0) throw ValueError("gmm operator: sigma must be nonnegative");
    const std::size_t d = gmm.dim;
    const std::size_t n = gmm.size();

    if (sigma == 0.0) {
        for (const GaussianComponent& c : gmm.components) {
            DenseMatrix cov(d);
            cov.a = c.covariance;
            std::vector<double> w;
            DenseMatrix v;
            linalg::jacobi_eigh(cov, w, v);
            if (w.front() <= 0.0)
                throw ValueError("gmm operator: sigma = 0 requires strictly positive-definite covariances");
        }
    }

    detail::GmmPayload g;
    g.dim = d;
    g.means.resize(n * d);
    g.pair_cov.resize(n * d * d);
    for (std::size_t i = 0; i < n; ++i) {
        const GaussianComponent& c = gmm.components[i];
        std::copy(c.mean.begin(), c.mean.end(), g.means.begin() + i * d);
        for (std::size_t k = 0; k < d * d; ++k) g.pair_cov[i * d * d + k] = c.covariance[k];
        for (std::size_t k = 0; k < d; ++k) g.pair_cov[i * d * d + k * d + k] += 0.5 * sigma * sigma;
    }

    std::vector<double> masses(n);
    for (std::size_t i = 0; i < n; ++i) masses[i] = gmm.components[i].weight;

    SmoothingOperator op;
    op.modality_ = Modality::gmm;
    op.masses_ = std::move(masses);
    op.sigma_ = sigma;
    op.log_capable_ = true;
    op.payload_ = std::move(g);
    return op;
}

SmoothingOperator build_voxel_operator(const VoxelGrid& grid, double sigma) {
    grid.validate();
    if (!(sigma > 0.0)) throw ValueError("voxel operator: sigma must be positive");

    detail::VoxelPayload v;
    v.dims = grid.dims;
    v.spacing = grid.spacing;
    v.taps = gaussian_taps(grid.spacing, sigma);
    v.linear_index.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Voxel& vox = grid.occupied[i];
        v.linear_index[i] =
            (static_cast<std::int64_t>(vox.iz) * grid.dims[1] + vox.iy) * grid.dims[0] + vox.ix;
    }

    std::vector<double> masses(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) masses[i] = grid.occupied[i].mass;

    SmoothingOperator op;
    op.modality_ = Modality::voxel;
    op.masses_ = std::move(masses);
    op.sigma_ = sigma;
    op.log_capable_ = false;
    op.payload_ = std::move(v);
    return op;
}

SmoothingOperator build_dense_operator(const DenseMatrix& kernel, const std::vector<double>& masses) {
    if (kernel.n != masses.size()) throw ShapeError("dense operator: kernel/mass size mismatch");
    if (kernel.n == 0) throw ValueError("dense operator: empty kernel");
    for (std::size_t i = 0; i < kernel.n; ++i) {
        if (!(masses[i] > 0.0)) throw ValueError("dense operator: masses must be positive");
        for (std::size_t j = i + 1; j < kernel.n; ++j)
            if (kernel(i, j) != kernel(j, i))
                throw ValueError("dense operator: kernel must be symmetric");
    }
    SmoothingOperator op;
    op.modality_ = Modality::dense;
    op.masses_ = masses;
    op.log_capable_ = false;
    detail::DensePayload d;
    d.kernel = kernel;
    op.payload_ = std::move(d);
    return op;
}

Signal smatvec(const SmoothingOperator& op, const Signal& f) {
    const std::size_t n = op.size();
    if (f.rows != n) throw ShapeError("smatvec: signal length does not match operator size");
    Signal out(n, f.channels);
    std::vector<double> scaled(n);
    const std::vector<double>& m = op.masses();
    for (std::size_t c = 0; c < f.channels; ++c) {
        const double* fc = f.channel(c);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = m[i] * fc[i];
        op.apply_kernel(scaled.data(), out.channel(c));
    }
    return out;
}

Signal smatvec_log(const SmoothingOperator& op, const Signal& log_f) {
    const std::size_t n = op.size();
    if (log_f.rows != n) throw ShapeError("smatvec_log: signal length does not match operator size");
    if (!op.supports_log_domain())
        throw CapabilityError(std::string("smatvec_log: modality ") + modality_name(op.modality()) +
                              " has no log-domain kernel");
    Signal out(n, log_f.channels);
    std::vector<double> shifted(n);
    std::vector<double> lm = log_masses(op.masses());
    for (std::size_t c = 0; c < log_f.channels; ++c) {
        const double* fc = log_f.channel(c);
        for (std::size_t i = 0; i < n; ++i)
            shifted[i] = (fc[i] == kNegInf) ? kNegInf : lm[i] + fc[i];
        op.apply_kernel_log(shifted.data(), out.channel(c));
    }
    return out;
}

VoxelGrid estimate_voxel_masses(const VoxelGrid& grid, double sigma_voxels) {
    grid.validate();
    if (!(sigma_voxels > 0.0)) throw ValueError("estimate_voxel_masses: sigma_voxels must be positive");

    // Same separable machinery as the smoothing operator, in index units.
    const std::vector<double> taps = gaussian_taps(1.0, sigma_voxels);
    const std::int64_t cells =
        static_cast<std::int64_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2];
    std::vector<double> a(static_cast<std::size_t>(cells), 0.0);
    std::vector<double> b(static_cast<std::size_t>(cells), 0.0);
    std::vector<std::int64_t> lin(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Voxel& v = grid.occupied[i];
        lin[i] = (static_cast<std::int64_t>(v.iz) * grid.dims[1] + v.iy) * grid.dims[0] + v.ix;
        a[static_cast<std::size_t>(lin[i])] = 1.0;
    }
    kernels::parallel::voxel_axis_pass(a.data(), b.data(), grid.dims[0], grid.dims[1], grid.dims[2], 0, taps);
    kernels::parallel::voxel_axis_pass(b.data(), a.data(), grid.dims[0], grid.dims[1], grid.dims[2], 1, taps);
    kernels::parallel::voxel_axis_pass(a.data(), b.data(), grid.dims[0], grid.dims[1], grid.dims[2], 2, taps);

    VoxelGrid out = grid;
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.occupied[i].mass = 1.0 / b[static_cast<std::size_t>(lin[i])];
    return out;
}

} // namespace otdiff
