#include "otdiff/types.hpp"

#include "otdiff/error.hpp"
#include "otdiff/linalg.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace otdiff {

void PointCloud::validate() const {
    if (dim < 1) throw ValueError("point cloud: dim must be >= 1");
    if (masses.empty()) throw ValueError("point cloud: at least one point required");
    if (positions.size() != masses.size() * dim)
        throw ShapeError("point cloud: positions/masses size mismatch");
    for (double x : positions)
        if (!std::isfinite(x)) throw ValueError("point cloud: non-finite position");
    for (double m : masses)
        if (!(m > 0.0) || !std::isfinite(m)) throw ValueError("point cloud: masses must be positive");
}

bool Graph::connected() const {
    if (n_vertices == 0) return false;
    std::vector<std::vector<std::size_t>> adj(n_vertices);
    for (const GraphEdge& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<char> seen(n_vertices, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == n_vertices;
}

void Graph::validate() const {
    if (n_vertices == 0) throw ValueError("graph: at least one vertex required");
    if (masses.size() != n_vertices) throw ShapeError("graph: mass vector length mismatch");
    for (double m : masses)
        if (!(m > 0.0) || !std::isfinite(m)) throw ValueError("graph: masses must be positive");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const GraphEdge& e : edges) {
        if (e.u >= n_vertices || e.v >= n_vertices) throw FormatError("graph: vertex index out of range");
        if (e.u == e.v) throw FormatError("graph: self-loops are not allowed");
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw ValueError("graph: edge weights must be positive");
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert(key).second) throw FormatError("graph: duplicate undirected edge");
    }
}

void VoxelGrid::validate() const {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw ValueError("voxel grid: dims must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValueError("voxel grid: spacing must be positive");
    if (occupied.empty()) throw ValueError("voxel grid: at least one occupied voxel required");
    std::set<std::array<int, 3>> seen;
    for (const Voxel& v : occupied) {
        if (v.ix < 0 || v.ix >= dims[0] || v.iy < 0 || v.iy >= dims[1] || v.iz < 0 || v.iz >= dims[2])
            throw FormatError("voxel grid: voxel index out of range");
        if (!(v.mass > 0.0) || !std::isfinite(v.mass)) throw ValueError("voxel grid: masses must be positive");
        if (!seen.insert({v.ix, v.iy, v.iz}).second) throw FormatError("voxel grid: duplicate voxel");
    }
}

void GaussianMixture::symmetrize_and_check() {
    const std::size_t d = dim;
    for (GaussianComponent& c : components) {
        double scale = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(c.covariance[i * d + j]));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                const double a = c.covariance[i * d + j];
                const double b = c.covariance[j * d + i];
                if (std::abs(a - b) > 1e-12 * std::max(scale, 1e-300))
                    throw ValueError("gmm: covariance asymmetry beyond tolerance");
                const double avg = 0.5 * (a + b);
                c.covariance[i * d + j] = avg;
                c.covariance[j * d + i] = avg;
            }
        }
    }
    validate();
}

void GaussianMixture::validate() const {
    if (dim < 1) throw ValueError("gmm: dim must be >= 1");
    if (components.empty()) throw ValueError("gmm: at least one component required");
    const std::size_t d = dim;
    for (const GaussianComponent& c : components) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw ValueError("gmm: weights must be positive");
        if (c.mean.size() != d || c.covariance.size() != d * d)
            throw ShapeError("gmm: component dimension mismatch");
        double trace = 0.0;
        for (std::size_t i = 0; i < d; ++i) trace += c.covariance[i * d + i];
        DenseMatrix cov(d);
        cov.a = c.covariance;
        std::vector<double> eigenvalues;
        DenseMatrix vectors;
        linalg::jacobi_eigh(cov, eigenvalues, vectors);
        for (double ev : eigenvalues)
            if (ev < -1e-10 * std::max(trace, 1e-300))
                throw ValueError("gmm: covariance not positive semi-definite");
    }
}

} // namespace otdiff
