#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace otdiff {

// =============================================================================
// Geometric modalities. Each type carries element positions/connectivity plus
// one positive mass per element; validate() enforces the structural invariants
// and is called by the loaders and operator builders.
// =============================================================================

struct PointCloud {
    std::size_t dim = 0;
    std::vector<double> positions; // N x dim, row-major
    std::vector<double> masses;    // N, all > 0

    std::size_t size() const { return masses.size(); }
    const double* point(std::size_t i) const { return positions.data() + i * dim; }
    void validate() const;
};

struct GraphEdge {
    std::size_t u = 0;
    std::size_t v = 0; // stored once with u < v
    double weight = 0.0;
};

struct Graph {
    std::size_t n_vertices = 0;
    std::vector<GraphEdge> edges;
    std::vector<double> masses;

    std::size_t size() const { return n_vertices; }
    bool connected() const;
    void validate() const;
};

struct Voxel {
    int ix = 0;
    int iy = 0;
    int iz = 0;
    double mass = 0.0;
};

struct VoxelGrid {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    double spacing = 0.0; // uniform edge length
    std::vector<Voxel> occupied;

    std::size_t size() const { return occupied.size(); }
    // World-space voxel center: origin + (index + 1/2) * spacing per axis.
    std::array<double, 3> center(std::size_t i) const {
        const Voxel& v = occupied[i];
        return {origin[0] + (v.ix + 0.5) * spacing,
                origin[1] + (v.iy + 0.5) * spacing,
                origin[2] + (v.iz + 0.5) * spacing};
    }
    void validate() const;
};

struct GaussianComponent {
    double weight = 0.0;
    std::vector<double> mean;       // d
    std::vector<double> covariance; // d x d, row-major, symmetric PSD
};

struct GaussianMixture {
    std::size_t dim = 0;
    std::vector<GaussianComponent> components;

    std::size_t size() const { return components.size(); }
    // Symmetrize each covariance in place, then check symmetry (1e-12 relative)
    // and PSD-ness (eigenvalues >= -1e-10 * trace).
    void symmetrize_and_check();
    void validate() const;
};

// =============================================================================
// Signals: N rows (one per element) by P channels, channel-major storage so
// each channel is a contiguous vector for the kernels.
// =============================================================================

struct Signal {
    std::size_t rows = 0;
    std::size_t channels = 0;
    std::vector<double> values; // channels * rows, channel-major

    Signal() = default;
    Signal(std::size_t n, std::size_t p, double fill = 0.0)
        : rows(n), channels(p), values(n * p, fill) {}

    double& at(std::size_t i, std::size_t c) { return values[c * rows + i]; }
    double at(std::size_t i, std::size_t c) const { return values[c * rows + i]; }
    double* channel(std::size_t c) { return values.data() + c * rows; }
    const double* channel(std::size_t c) const { return values.data() + c * rows; }

    static Signal constant(std::size_t n, double value) { return Signal(n, 1, value); }
    static Signal dirac(std::size_t n, std::size_t i, double value = 1.0) {
        Signal s(n, 1, 0.0);
        s.at(i, 0) = value;
        return s;
    }
};

// Dense row-major square matrix used by the oracle module and the dense
// operator payload.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a; // n * n

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t size, double fill = 0.0) : n(size), a(size * size, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static DenseMatrix identity(std::size_t size) {
        DenseMatrix m(size);
        for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }
};

} // namespace otdiff
