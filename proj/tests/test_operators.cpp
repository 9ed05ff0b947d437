#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otdiff/error.hpp"
#include "otdiff/operators.hpp"
#include "otdiff/oracle.hpp"
#include "testutil.hpp"

#include <cmath>
#include <limits>

using namespace otdiff;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PointCloud collinear_cloud() {
    PointCloud cloud;
    cloud.dim = 1;
    cloud.positions = {0.0, 1.0, 2.0};
    cloud.masses = {1.0, 1.0, 1.0};
    return cloud;
}

// Pairwise voxel reference with the same per-axis cutoff as the separable
// pass: the kernel is the product of truncated 1-D Gaussians.
Signal voxel_pairwise_reference(const VoxelGrid& grid, double sigma, const Signal& f) {
    const std::size_t n = grid.size();
    const int radius = static_cast<int>(std::floor(4.0 * sigma / grid.spacing));
    const double c = 1.0 / (2.0 * sigma * sigma);
    Signal out(n, f.channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const int dx = grid.occupied[i].ix - grid.occupied[j].ix;
            const int dy = grid.occupied[i].iy - grid.occupied[j].iy;
            const int dz = grid.occupied[i].iz - grid.occupied[j].iz;
            if (std::abs(dx) > radius || std::abs(dy) > radius || std::abs(dz) > radius) continue;
            const double h = grid.spacing;
            const double w = std::exp(-(dx * h) * (dx * h) * c) * std::exp(-(dy * h) * (dy * h) * c) *
                             std::exp(-(dz * h) * (dz * h) * c);
            for (std::size_t ch = 0; ch < f.channels; ++ch)
                out.at(i, ch) += w * grid.occupied[j].mass * f.at(j, ch);
        }
    }
    return out;
}

} // namespace

TEST_CASE("gaussian: single point acts as mass scaling") {
    PointCloud cloud;
    cloud.dim = 2;
    cloud.positions = {0.3, 0.4};
    cloud.masses = {0.7};
    const SmoothingOperator op = build_gaussian_operator(cloud, 0.5);
    const Signal out = smatvec(op, Signal::constant(1, 2.0));
    CHECK(out.at(0, 0) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("gaussian: coincident points see kernel one") {
    PointCloud cloud;
    cloud.dim = 2;
    cloud.positions = {0.1, 0.2, 0.1, 0.2};
    cloud.masses = {0.5, 0.5};
    const SmoothingOperator op = build_gaussian_operator(cloud, 1.0);
    const Signal out = smatvec(op, Signal::constant(2, 1.0));
    CHECK(out.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.at(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gaussian: collinear closed form") {
    const SmoothingOperator op = build_gaussian_operator(collinear_cloud(), 1.0);
    const Signal out = smatvec(op, Signal::dirac(3, 0));
    CHECK(out.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.at(1, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(out.at(2, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("exponential: two points at distance sigma") {
    PointCloud cloud;
    cloud.dim = 1;
    cloud.positions = {0.0, 0.3};
    cloud.masses = {1.0, 1.0};
    const SmoothingOperator op = build_exponential_operator(cloud, 0.3);
    const Signal out = smatvec(op, Signal::dirac(2, 0));
    CHECK(out.at(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("exponential: dense assembly matches explicit kernel") {
    Rng rng(11);
    const PointCloud cloud = testutil::random_cloud(5, 3, rng);
    const SmoothingOperator op = build_exponential_operator(cloud, 0.4);
    const DenseMatrix s = oracle::dense_assemble(op);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                const double t = cloud.positions[i * 3 + k] - cloud.positions[j * 3 + k];
                d2 += t * t;
            }
            const double expected = std::exp(-std::sqrt(d2) / 0.4) * cloud.masses[j];
            CHECK(s(i, j) == doctest::Approx(expected).epsilon(1e-15));
        }
}

TEST_CASE("graph: single edge") {
    const Graph graph = testutil::star_graph(1); // one edge, masses 1
    const SmoothingOperator op = build_graph_operator(graph, 0.0);
    const DenseMatrix k = oracle::dense_kernel(op);
    CHECK(k(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    const Signal out = smatvec(op, Signal::dirac(2, 0));
    CHECK(out.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("graph: star kernel row") {
    const SmoothingOperator op = build_graph_operator(testutil::star_graph(3), 0.0);
    const DenseMatrix k = oracle::dense_kernel(op);
    CHECK(k(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(k(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(0, 3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(1, 2) == 0.0);
}

TEST_CASE("graph: epsilon regularizer includes the diagonal") {
    Graph graph;
    graph.n_vertices = 2;
    graph.masses = {1.0, 1.0};
    const SmoothingOperator op = build_graph_operator(graph, 0.1);
    const DenseMatrix k = oracle::dense_kernel(op);
    CHECK(k(0, 0) == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(k(0, 1) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(k(1, 0) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(k(1, 1) == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("gmm: zero covariances collapse to the gaussian kernel") {
    Rng rng(5);
    const std::size_t n = 8;
    GaussianMixture gmm = testutil::random_mixture(n, 2, rng, 0.0);
    PointCloud cloud;
    cloud.dim = 2;
    for (const GaussianComponent& c : gmm.components) {
        cloud.positions.insert(cloud.positions.end(), c.mean.begin(), c.mean.end());
        cloud.masses.push_back(c.weight);
    }
    const double sigma = 0.3;
    const DenseMatrix a = oracle::dense_assemble(build_gmm_operator(gmm, sigma));
    const DenseMatrix b = oracle::dense_assemble(build_gaussian_operator(cloud, sigma));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            CHECK(a(i, j) == doctest::Approx(b(i, j)).epsilon(1e-14));
}

TEST_CASE("gmm: 1d closed form") {
    GaussianMixture gmm;
    gmm.dim = 1;
    gmm.components.push_back({1.0, {0.0}, {0.02}});
    gmm.components.push_back({1.0, {1.0}, {0.02}});
    const SmoothingOperator op = build_gmm_operator(gmm, 0.2);
    const DenseMatrix k = oracle::dense_kernel(op);
    CHECK(k(0, 1) == doctest::Approx(std::exp(-6.25)).epsilon(1e-14));
    CHECK(k(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gmm: anisotropic random mixture keeps K symmetric") {
    Rng rng(17);
    const GaussianMixture gmm = testutil::random_mixture(12, 3, rng, 0.08, true);
    const SmoothingOperator op = build_gmm_operator(gmm, 0.25);
    const DenseMatrix k = oracle::dense_kernel(op);
    for (std::size_t i = 0; i < k.n; ++i)
        for (std::size_t j = 0; j < k.n; ++j)
            CHECK(std::abs(k(i, j) - k(j, i)) <= 1e-14 * std::max(1.0, std::abs(k(i, j))));
}

TEST_CASE("gmm: sigma zero requires strictly positive definite covariances") {
    Rng rng(2);
    const GaussianMixture degenerate = testutil::random_mixture(3, 2, rng, 0.0);
    CHECK_THROWS_AS(build_gmm_operator(degenerate, 0.0), ValueError);
    const GaussianMixture spd = testutil::random_mixture(3, 2, rng, 0.1);
    CHECK_NOTHROW(build_gmm_operator(spd, 0.0));
}

TEST_CASE("voxel: single voxel") {
    VoxelGrid grid;
    grid.dims = {1, 1, 1};
    grid.spacing = 1.0;
    grid.occupied = {{0, 0, 0, 0.8}};
    const SmoothingOperator op = build_voxel_operator(grid, 0.7);
    const Signal out = smatvec(op, Signal::constant(1, 3.0));
    CHECK(out.at(0, 0) == doctest::Approx(2.4).epsilon(1e-15));
}

TEST_CASE("voxel: neighbor weight at one spacing") {
    VoxelGrid grid;
    grid.dims = {2, 1, 1};
    grid.spacing = 0.1;
    grid.occupied = {{0, 0, 0, 1.0}, {1, 0, 0, 1.0}};
    const SmoothingOperator op = build_voxel_operator(grid, 0.1); // h = sigma
    const DenseMatrix k = oracle::dense_kernel(op);
    CHECK(k(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("voxel: separable pass equals pairwise reference") {
    SUBCASE("full 4x4x4") {
        const VoxelGrid grid = testutil::full_grid(4, 4, 4, 0.25);
        const SmoothingOperator op = build_voxel_operator(grid, 0.3);
        Rng rng(23);
        Signal f(grid.size(), 1);
        for (std::size_t i = 0; i < grid.size(); ++i) f.at(i, 0) = rng.normal();
        const Signal fast = smatvec(op, f);
        const Signal slow = voxel_pairwise_reference(grid, 0.3, f);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(fast.at(i, 0) ==
                  doctest::Approx(slow.at(i, 0)).epsilon(1e-12));
    }
    SUBCASE("random mask in 8^3") {
        Rng rng(29);
        const VoxelGrid grid = testutil::random_grid(8, 100, rng, true);
        const SmoothingOperator op = build_voxel_operator(grid, 2.0 * grid.spacing);
        Signal f(grid.size(), 1);
        for (std::size_t i = 0; i < grid.size(); ++i) f.at(i, 0) = rng.normal();
        const Signal fast = smatvec(op, f);
        const Signal slow = voxel_pairwise_reference(grid, 2.0 * grid.spacing, f);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(fast.at(i, 0) ==
                  doctest::Approx(slow.at(i, 0)).epsilon(1e-12));
    }
}

TEST_CASE("voxel mass estimation") {
    SUBCASE("single voxel gets mass one") {
        VoxelGrid grid;
        grid.dims = {1, 1, 1};
        grid.spacing = 1.0;
        grid.occupied = {{0, 0, 0, 5.0}};
        const VoxelGrid out = estimate_voxel_masses(grid);
        CHECK(out.occupied[0].mass == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("slab interior uniform, boundary heavier") {
        // 4-sigma cutoff is 12 voxels at the default sigma of 3, so the
        // [12, 32) interior of a 44^3 slab is translation invariant.
        const VoxelGrid grid = testutil::full_grid(44, 44, 44, 1.0);
        const VoxelGrid out = estimate_voxel_masses(grid);
        double lo = kInf, hi = -kInf;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Voxel& v = out.occupied[i];
            const bool interior = v.ix >= 12 && v.ix < 32 && v.iy >= 12 && v.iy < 32 &&
                                  v.iz >= 12 && v.iz < 32;
            if (interior) {
                lo = std::min(lo, v.mass);
                hi = std::max(hi, v.mass);
            }
        }
        CHECK((hi - lo) / lo <= 1e-6);
        // corner voxel sees fewer neighbors -> smaller sum -> larger mass
        double corner = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Voxel& v = out.occupied[i];
            if (v.ix == 0 && v.iy == 0 && v.iz == 0) corner = v.mass;
        }
        CHECK(corner > hi);
    }
}

TEST_CASE("invariants: kernel symmetry and entrywise positivity per modality") {
    Rng rng(31);
    std::vector<std::pair<std::string, SmoothingOperator>> ops;
    ops.emplace_back("gaussian", build_gaussian_operator(testutil::random_cloud(24, 3, rng, true), 0.3));
    ops.emplace_back("exponential",
                     build_exponential_operator(testutil::random_cloud(24, 2, rng, true), 0.3));
    ops.emplace_back("graph", build_graph_operator(testutil::random_connected_graph(24, rng, true), 0.05));
    ops.emplace_back("gmm", build_gmm_operator(testutil::random_mixture(24, 3, rng, 0.05, true), 0.3));
    ops.emplace_back("voxel", build_voxel_operator(testutil::random_grid(5, 24, rng, true), 0.25));

    for (auto& [name, op] : ops) {
        CAPTURE(name);
        const DenseMatrix k = oracle::dense_kernel(op);
        double scale = testutil::max_abs(k);
        for (std::size_t i = 0; i < k.n; ++i)
            for (std::size_t j = 0; j < k.n; ++j) {
                CHECK(std::abs(k(i, j) - k(j, i)) <= 1e-14 * scale);
                CHECK(k(i, j) >= 0.0);
            }
        if (name == "gaussian" || name == "exponential" || name == "gmm" || name == "graph") {
            for (std::size_t i = 0; i < k.n; ++i)
                for (std::size_t j = 0; j < k.n; ++j) CHECK(k(i, j) > 0.0);
        }
    }
}

TEST_CASE("invariants: operator positivity for gaussian, exponential, graph") {
    Rng rng(37);
    std::vector<SmoothingOperator> ops;
    ops.push_back(build_gaussian_operator(testutil::random_cloud(20, 3, rng, true), 0.25));
    ops.push_back(build_exponential_operator(testutil::random_cloud(20, 2, rng, true), 0.25));
    ops.push_back(build_graph_operator(testutil::random_connected_graph(20, rng, true), 0.02));
    for (const SmoothingOperator& op : ops) {
        const DenseMatrix k = oracle::dense_kernel(op);
        DenseMatrix b(k.n);
        for (std::size_t i = 0; i < k.n; ++i)
            for (std::size_t j = 0; j < k.n; ++j)
                b(i, j) = std::sqrt(op.masses()[i]) * k(i, j) * std::sqrt(op.masses()[j]);
        std::vector<double> w;
        DenseMatrix v;
        linalg::jacobi_eigh(b, w, v);
        CHECK(w.front() >= -1e-9 * w.back());
    }
}

TEST_CASE("smatvec: zero signal, shape error, multi-channel") {
    Rng rng(41);
    const SmoothingOperator op = build_gaussian_operator(testutil::random_cloud(10, 2, rng), 0.3);
    const Signal zero(10, 3, 0.0);
    const Signal out = smatvec(op, zero);
    for (double v : out.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(smatvec(op, Signal(9, 1)), ShapeError);
}

TEST_CASE("smatvec_log: agreement, empty sum, capability") {
    Rng rng(43);
    const SmoothingOperator op = build_gaussian_operator(testutil::random_cloud(30, 2, rng, true), 0.2);

    Signal f(30, 1);
    for (std::size_t i = 0; i < 30; ++i) f.at(i, 0) = rng.uniform(0.2, 2.0);
    Signal logf(30, 1);
    for (std::size_t i = 0; i < 30; ++i) logf.at(i, 0) = std::log(f.at(i, 0));
    const Signal lin = smatvec(op, f);
    const Signal viaLog = smatvec_log(op, logf);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(std::exp(viaLog.at(i, 0)) == doctest::Approx(lin.at(i, 0)).epsilon(1e-12));

    const Signal allNeg(30, 1, -kInf);
    const Signal out = smatvec_log(op, allNeg);
    for (double v : out.values) CHECK(v == -kInf);

    const SmoothingOperator graph_op =
        build_graph_operator(testutil::random_connected_graph(8, rng), 0.1);
    CHECK_THROWS_AS(smatvec_log(graph_op, Signal(8, 1)), CapabilityError);
}

TEST_CASE("smatvec_log: exponential and mixture kernels agree with the linear domain") {
    Rng rng(307);
    std::vector<SmoothingOperator> ops;
    ops.push_back(build_exponential_operator(testutil::random_cloud(25, 3, rng, true), 0.3));
    ops.push_back(build_gmm_operator(testutil::random_mixture(18, 3, rng, 0.05, true), 0.25));
    for (const SmoothingOperator& op : ops) {
        CAPTURE(modality_name(op.modality()));
        REQUIRE(op.supports_log_domain());
        const std::size_t n = op.size();
        Signal f(n, 1), logf(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            f.at(i, 0) = rng.uniform(0.2, 2.0);
            logf.at(i, 0) = std::log(f.at(i, 0));
        }
        const Signal lin = smatvec(op, f);
        const Signal lg = smatvec_log(op, logf);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::exp(lg.at(i, 0)) == doctest::Approx(lin.at(i, 0)).epsilon(1e-12));
    }
}

TEST_CASE("smatvec_log: finite where the linear domain underflows") {
    Rng rng(47);
    const PointCloud cloud = testutil::random_cloud(200, 2, rng);
    const SmoothingOperator op = build_gaussian_operator(cloud, 0.01);

    // Dirac at one point: linear entries underflow to exact zero far away,
    // the log-domain result stays finite everywhere.
    Signal f = Signal::dirac(200, 0);
    Signal logf(200, 1, -kInf);
    logf.at(0, 0) = 0.0;
    const Signal lin = smatvec(op, f);
    const Signal lg = smatvec_log(op, logf);
    std::size_t underflows = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        if (lin.at(i, 0) == 0.0) ++underflows;
        CHECK(std::isfinite(lg.at(i, 0)));
    }
    CHECK(underflows > 0);
}

TEST_CASE("serial reference kernels produce identical bits") {
    Rng rng(53);
    std::vector<SmoothingOperator> ops;
    ops.push_back(build_gaussian_operator(testutil::random_cloud(40, 3, rng, true), 0.2));
    ops.push_back(build_exponential_operator(testutil::random_cloud(40, 2, rng, true), 0.2));
    ops.push_back(build_graph_operator(testutil::random_connected_graph(40, rng, true), 0.01));
    ops.push_back(build_gmm_operator(testutil::random_mixture(20, 3, rng, 0.05, true), 0.3));
    ops.push_back(build_voxel_operator(testutil::random_grid(6, 40, rng, true), 0.2));
    for (SmoothingOperator& op : ops) {
        Signal f(op.size(), 2);
        for (double& v : f.values) v = rng.normal();
        op.set_serial_reference(false);
        const Signal parallel_out = smatvec(op, f);
        op.set_serial_reference(true);
        const Signal serial_out = smatvec(op, f);
        CHECK(parallel_out.values == serial_out.values);
    }
}

TEST_CASE("smatvec matches the dense assembly on every modality") {
    Rng rng(61);
    std::vector<SmoothingOperator> ops;
    ops.push_back(build_gaussian_operator(testutil::random_cloud(48, 3, rng, true), 0.25));
    ops.push_back(build_exponential_operator(testutil::random_cloud(48, 2, rng, true), 0.25));
    ops.push_back(build_graph_operator(testutil::random_connected_graph(48, rng, true), 0.02));
    ops.push_back(build_gmm_operator(testutil::random_mixture(32, 3, rng, 0.04, true), 0.3));
    ops.push_back(build_voxel_operator(testutil::random_grid(6, 48, rng, true), 0.2));
    for (SmoothingOperator& op : ops) {
        CAPTURE(modality_name(op.modality()));
        const DenseMatrix s = oracle::dense_assemble(op);
        Signal f(op.size(), 1);
        for (double& v : f.values) v = rng.normal();
        const Signal fast = smatvec(op, f);
        double scale = 0.0;
        for (std::size_t i = 0; i < op.size(); ++i) scale = std::max(scale, std::abs(fast.at(i, 0)));
        for (std::size_t i = 0; i < op.size(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < op.size(); ++j) acc += s(i, j) * f.at(j, 0);
            CHECK(std::abs(acc - fast.at(i, 0)) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("builder rejects nonpositive sigma") {
    Rng rng(59);
    const PointCloud cloud = testutil::random_cloud(4, 2, rng);
    CHECK_THROWS_AS(build_gaussian_operator(cloud, 0.0), ValueError);
    CHECK_THROWS_AS(build_exponential_operator(cloud, -1.0), ValueError);
    const VoxelGrid grid = testutil::random_grid(3, 4, rng);
    CHECK_THROWS_AS(build_voxel_operator(grid, 0.0), ValueError);
}
