// Times the OpenMP kernel builds against the serial reference on synthetic
// inputs and checks that both produce identical bits.

#include "otdiff/operators.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/threading.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
    fn(); // warm-up
    const auto start = Clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto elapsed = Clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count() / repeats;
}

otdiff::PointCloud random_cloud(std::size_t n, std::size_t dim, otdiff::Rng& rng) {
    otdiff::PointCloud cloud;
    cloud.dim = dim;
    cloud.masses.assign(n, 1.0 / static_cast<double>(n));
    cloud.positions.resize(n * dim);
    for (double& x : cloud.positions) x = rng.uniform();
    return cloud;
}

otdiff::VoxelGrid random_grid(int side, otdiff::Rng& rng) {
    otdiff::VoxelGrid grid;
    grid.dims = {side, side, side};
    grid.origin = {0.0, 0.0, 0.0};
    grid.spacing = 1.0 / side;
    for (int z = 0; z < side; ++z)
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x)
                if (rng.uniform() < 0.5) grid.occupied.push_back({x, y, z, 1.0});
    if (grid.occupied.empty()) grid.occupied.push_back({0, 0, 0, 1.0});
    return grid;
}

void report(const char* name, std::size_t n, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-22s N=%-6zu serial %9.3f ms   parallel %9.3f ms   speedup %.2fx   bits %s\n",
                name, n, serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "identical" : "DIFFER");
}

bool same_bits(const otdiff::Signal& a, const otdiff::Signal& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] != b.values[i]) return false;
    return true;
}

} // namespace

int main() {
    otdiff::Rng rng(7);
    const int repeats = 3;
    std::printf("threads: %d\n", otdiff::thread_count());

    {
        const std::size_t n = 4000;
        const otdiff::PointCloud cloud = random_cloud(n, 3, rng);
        otdiff::SmoothingOperator op = otdiff::build_gaussian_operator(cloud, 0.1);
        otdiff::Signal f(n, 1);
        for (std::size_t i = 0; i < n; ++i) f.at(i, 0) = rng.normal();

        op.set_serial_reference(true);
        otdiff::Signal ys = smatvec(op, f);
        const double serial_ms = time_ms([&] { smatvec(op, f); }, repeats);
        op.set_serial_reference(false);
        otdiff::Signal yp = smatvec(op, f);
        const double parallel_ms = time_ms([&] { smatvec(op, f); }, repeats);
        report("gaussian matvec", n, serial_ms, parallel_ms, same_bits(ys, yp));
    }

    {
        const std::size_t n = 4000;
        const otdiff::PointCloud cloud = random_cloud(n, 3, rng);
        otdiff::SmoothingOperator op = otdiff::build_gaussian_operator(cloud, 0.05);
        otdiff::Signal logf(n, 1);
        for (std::size_t i = 0; i < n; ++i) logf.at(i, 0) = -rng.uniform(0.0, 5.0);

        op.set_serial_reference(true);
        otdiff::Signal ys = smatvec_log(op, logf);
        const double serial_ms = time_ms([&] { smatvec_log(op, logf); }, repeats);
        op.set_serial_reference(false);
        otdiff::Signal yp = smatvec_log(op, logf);
        const double parallel_ms = time_ms([&] { smatvec_log(op, logf); }, repeats);
        report("gaussian log matvec", n, serial_ms, parallel_ms, same_bits(ys, yp));
    }

    {
        const otdiff::VoxelGrid grid = random_grid(48, rng);
        const std::size_t n = grid.size();
        otdiff::SmoothingOperator op = otdiff::build_voxel_operator(grid, 3.0 * grid.spacing);
        otdiff::Signal f(n, 1);
        for (std::size_t i = 0; i < n; ++i) f.at(i, 0) = rng.normal();

        op.set_serial_reference(true);
        otdiff::Signal ys = smatvec(op, f);
        const double serial_ms = time_ms([&] { smatvec(op, f); }, repeats);
        op.set_serial_reference(false);
        otdiff::Signal yp = smatvec(op, f);
        const double parallel_ms = time_ms([&] { smatvec(op, f); }, repeats);
        report("voxel separable conv", n, serial_ms, parallel_ms, same_bits(ys, yp));
    }

    return 0;
}
