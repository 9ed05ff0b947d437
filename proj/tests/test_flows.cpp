#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otdiff/error.hpp"
#include "otdiff/flows.hpp"
#include "testutil.hpp"

#include <cmath>

using namespace otdiff;

namespace {

// Independent reimplementation of the three double sums, kept dumb on purpose.
double energy_reference(const PointCloud& a, const PointCloud& b) {
    const std::size_t n = a.size(), m = b.size(), d = a.dim;
    auto dist = [&](const double* p, const double* q) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
        return std::sqrt(s);
    };
    double cross = 0.0, self_a = 0.0, self_b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cross += dist(a.point(i), b.point(j));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) self_a += dist(a.point(i), a.point(j));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) self_b += dist(b.point(i), b.point(j));
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return cross / (nn * mm) - self_a / (2.0 * nn * nn) - self_b / (2.0 * mm * mm);
}

PointCloud single_point(double x) {
    PointCloud c;
    c.dim = 1;
    c.positions = {x};
    c.masses = {1.0};
    return c;
}

double cloud_diameter(const PointCloud& a, const PointCloud& b) {
    double hi = 0.0;
    auto upd = [&](const PointCloud& c) {
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < c.dim; ++k) {
                    const double t = c.point(i)[k] - c.point(j)[k];
                    s += t * t;
                }
                hi = std::max(hi, std::sqrt(s));
            }
    };
    upd(a);
    upd(b);
    return hi;
}

} // namespace

TEST_CASE("identical clouds have zero energy") {
    Rng rng(157);
    const PointCloud cloud = testutil::random_cloud(12, 2, rng);
    CHECK(energy_distance(cloud, cloud) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two single points") {
    const PointCloud x = single_point(0.0);
    const PointCloud y = single_point(1.0);
    CHECK(energy_distance(x, y) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> grad = energy_distance_gradient(x, y);
    CHECK(grad[0] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("energy matches the brute-force reference") {
    Rng rng(163);
    for (int round = 0; round < 4; ++round) {
        const PointCloud a = testutil::random_cloud(20, 1 + round % 3, rng);
        const PointCloud b = testutil::random_cloud(20, 1 + round % 3, rng);
        CHECK(energy_distance(a, b) == doctest::Approx(energy_reference(a, b)).epsilon(1e-14));
        CHECK(energy_distance(a, b) == doctest::Approx(energy_distance(b, a)).epsilon(1e-14));
    }
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(167);
    for (int round = 0; round < 5; ++round) {
        const std::size_t d = 1 + round % 3;
        PointCloud a = testutil::random_cloud(8 + round, d, rng);
        const PointCloud b = testutil::random_cloud(11, d, rng);
        const std::vector<double> grad = energy_distance_gradient(a, b);
        const double h = 1e-6 * cloud_diameter(a, b);
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                const double saved = a.positions[i * d + k];
                a.positions[i * d + k] = saved + h;
                const double up = energy_distance(a, b);
                a.positions[i * d + k] = saved - h;
                const double down = energy_distance(a, b);
                a.positions[i * d + k] = saved;
                const double fd = (up - down) / (2.0 * h);
                CHECK(grad[i * d + k] == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("coincident pairs contribute zero") {
    PointCloud a;
    a.dim = 1;
    a.positions = {0.5, 0.5};
    a.masses = {0.5, 0.5};
    const PointCloud b = single_point(2.0);
    const std::vector<double> grad = energy_distance_gradient(a, b);
    for (double g : grad) CHECK(std::isfinite(g));
    // self term vanishes: both gradients equal the pure target pull
    CHECK(grad[0] == doctest::Approx(grad[1]).epsilon(1e-15));
    CHECK(grad[0] == doctest::Approx(-0.5).epsilon(1e-12)); // (1/NM) * (x - y)/|x - y| summed

    // a source sitting exactly on a target is also fine
    const std::vector<double> grad2 = energy_distance_gradient(a, single_point(0.5));
    for (double g : grad2) CHECK(std::isfinite(g));
}

TEST_CASE("zero steps yields only the initial snapshot") {
    Rng rng(173);
    const PointCloud a = testutil::random_cloud(10, 2, rng);
    const PointCloud b = testutil::random_cloud(10, 2, rng);
    FlowConfig config;
    config.steps = 0;
    const FlowTrajectory traj = run_flow(a, b, config);
    REQUIRE(traj.snapshots.size() == 1);
    CHECK(traj.snapshots[0].step == 0);
    CHECK(traj.snapshots[0].positions == a.positions);
    CHECK(traj.energies.size() == 1);
}

TEST_CASE("a stationary point stays fixed under every preconditioner") {
    Rng rng(179);
    const PointCloud cloud = testutil::random_cloud(9, 2, rng);
    for (FlowPreconditioner p : {FlowPreconditioner::identity, FlowPreconditioner::kernel,
                                 FlowPreconditioner::q_diffusion}) {
        FlowConfig config;
        config.steps = 3;
        config.preconditioner = p;
        config.sigma = 0.15;
        config.eta = 0.05;
        const FlowTrajectory traj = run_flow(cloud, cloud, config);
        CHECK(traj.snapshots.back().positions == cloud.positions);
    }
}

TEST_CASE("q-diffusion preserves the mean displacement") {
    Rng rng(181);
    const PointCloud a = testutil::random_cloud(50, 2, rng);
    const PointCloud b = testutil::random_cloud(50, 2, rng);
    FlowConfig config;
    config.steps = 20;
    config.preconditioner = FlowPreconditioner::q_diffusion;
    config.sigma = 0.1;
    config.eta = 0.05;
    const FlowTrajectory traj = run_flow(a, b, config);
    REQUIRE(traj.mean_update_gap.size() == 20);
    for (double gap : traj.mean_update_gap) CHECK(gap <= 1e-12);
}

TEST_CASE("identity flow decreases the energy on almost every step") {
    Rng rng(191);
    const PointCloud a = testutil::random_cloud(40, 2, rng);
    PointCloud b = testutil::random_cloud(40, 2, rng);
    for (double& x : b.positions) x += 0.5; // shift the target away
    FlowConfig config;
    config.steps = 50;
    config.eta = 0.02;
    const FlowTrajectory traj = run_flow(a, b, config);
    int decreases = 0;
    for (std::size_t s = 1; s < traj.energies.size(); ++s)
        if (traj.energies[s] < traj.energies[s - 1]) ++decreases;
    CHECK(decreases >= static_cast<int>(0.95 * config.steps));
    CHECK(traj.energies.back() < traj.energies.front());
}

TEST_CASE("snapshot stride and final step") {
    Rng rng(193);
    const PointCloud a = testutil::random_cloud(8, 2, rng);
    const PointCloud b = testutil::random_cloud(8, 2, rng);
    FlowConfig config;
    config.steps = 7;
    config.snapshot_stride = 3;
    const FlowTrajectory traj = run_flow(a, b, config);
    REQUIRE(traj.snapshots.size() == 4);
    CHECK(traj.snapshots[0].step == 0);
    CHECK(traj.snapshots[1].step == 3);
    CHECK(traj.snapshots[2].step == 6);
    CHECK(traj.snapshots[3].step == 7);
    CHECK(traj.energies.size() == 8);
}

TEST_CASE("config validation") {
    Rng rng(197);
    const PointCloud a = testutil::random_cloud(4, 2, rng);
    const PointCloud b3 = testutil::random_cloud(4, 3, rng);
    FlowConfig config;
    CHECK_THROWS_AS(run_flow(a, b3, config), ShapeError);
    config.eta = 0.0;
    CHECK_THROWS_AS(run_flow(a, a, config), ValueError);
    config.eta = 0.1;
    config.preconditioner = FlowPreconditioner::kernel;
    config.sigma = 0.0;
    CHECK_THROWS_AS(run_flow(a, a, config), ValueError);
}
