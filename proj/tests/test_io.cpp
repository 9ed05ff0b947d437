#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otdiff/error.hpp"
#include "otdiff/io.hpp"
#include "testutil.hpp"

#include <cmath>
#include <cstdio>

using namespace otdiff;
using testutil::write_file;

TEST_CASE("point cloud: header inference and uniform masses") {
    write_file("io_pc1.csv", "x0,x1\n0,0\n1,0\n");
    const PointCloud cloud = io::load_point_cloud("io_pc1.csv");
    CHECK(cloud.dim == 2);
    CHECK(cloud.size() == 2);
    CHECK(cloud.masses[0] == 0.5);
    CHECK(cloud.masses[1] == 0.5);
    CHECK(cloud.positions[2] == 1.0);
}

TEST_CASE("point cloud: mass column read directly") {
    write_file("io_pc2.csv", "x0,mass\n0,2.0\n");
    const PointCloud cloud = io::load_point_cloud("io_pc2.csv");
    CHECK(cloud.masses[0] == 2.0);
    // uniform policy overrides the column
    const PointCloud uniform = io::load_point_cloud("io_pc2.csv", io::MassPolicy::uniform);
    CHECK(uniform.masses[0] == 1.0);
}

TEST_CASE("point cloud: errors") {
    write_file("io_pc3.csv", "x0,mass\n0,0.0\n");
    CHECK_THROWS_AS(io::load_point_cloud("io_pc3.csv"), ValueError);
    write_file("io_pc4.csv", "a,b\n0,1\n");
    CHECK_THROWS_AS(io::load_point_cloud("io_pc4.csv"), FormatError);
    write_file("io_pc5.csv", "x0,x1\n0\n");
    CHECK_THROWS_AS(io::load_point_cloud("io_pc5.csv"), FormatError);
}

TEST_CASE("graph: basic parse with default masses") {
    write_file("io_g1.txt", "#vertices 2\n0 1 1.0\n");
    const Graph graph = io::load_graph("io_g1.txt");
    CHECK(graph.n_vertices == 2);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].u == 0);
    CHECK(graph.edges[0].v == 1);
    CHECK(graph.edges[0].weight == 1.0);
    CHECK(graph.masses[0] == 0.5);
}

TEST_CASE("graph: duplicate undirected edge rejected") {
    write_file("io_g2.txt", "#vertices 2\n0 1 1.0\n1 0 2.0\n");
    CHECK_THROWS_AS(io::load_graph("io_g2.txt"), FormatError);
}

TEST_CASE("graph: star degree") {
    write_file("io_g3.txt", "#vertices 4\n0 1 1\n0 2 1\n0 3 1\n");
    const Graph graph = io::load_graph("io_g3.txt");
    std::size_t degree = 0;
    for (const GraphEdge& e : graph.edges)
        if (e.u == 0 || e.v == 0) ++degree;
    CHECK(degree == 3);
}

TEST_CASE("graph: malformed rows") {
    write_file("io_g4.txt", "#vertices 2\n0 0 1.0\n");
    CHECK_THROWS_AS(io::load_graph("io_g4.txt"), FormatError); // self-loop
    write_file("io_g5.txt", "#vertices 2\n0 2 1.0\n");
    CHECK_THROWS_AS(io::load_graph("io_g5.txt"), FormatError); // index out of range
    write_file("io_g6.txt", "#vertices 2\n0 1 -1.0\n");
    CHECK_THROWS_AS(io::load_graph("io_g6.txt"), ValueError); // nonpositive weight
    write_file("io_g7.txt", "0 1 1.0\n");
    CHECK_THROWS_AS(io::load_graph("io_g7.txt"), FormatError); // missing directive
}

TEST_CASE("graph: optional mass file") {
    write_file("io_g8.txt", "#vertices 2\n0 1 1.0\n");
    write_file("io_g8m.csv", "mass\n0.25\n0.75\n");
    const Graph graph = io::load_graph("io_g8.txt", "io_g8m.csv");
    CHECK(graph.masses[0] == 0.25);
    CHECK(graph.masses[1] == 0.75);
}

TEST_CASE("voxel grid: center formula") {
    write_file("io_v1.txt", "dims 1 1 1\norigin 0 0 0\nspacing 1\n0 0 0 1.0\n");
    const VoxelGrid grid = io::load_voxel_grid("io_v1.txt");
    const auto center = grid.center(0);
    CHECK(center[0] == 0.5);
    CHECK(center[1] == 0.5);
    CHECK(center[2] == 0.5);
}

TEST_CASE("voxel grid: two voxels spacing apart") {
    write_file("io_v2.txt", "dims 2 1 1\norigin 0 0 0\nspacing 0.05\n0 0 0 1\n1 0 0 1\n");
    const VoxelGrid grid = io::load_voxel_grid("io_v2.txt");
    CHECK(grid.center(1)[0] - grid.center(0)[0] == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("voxel grid: errors") {
    write_file("io_v3.txt", "dims 1 1 1\norigin 0 0 0\nspacing 1\n1 0 0 1.0\n");
    CHECK_THROWS_AS(io::load_voxel_grid("io_v3.txt"), FormatError); // out of range
    write_file("io_v4.txt", "dims 2 1 1\norigin 0 0 0\nspacing 1\n0 0 0 1\n0 0 0 2\n");
    CHECK_THROWS_AS(io::load_voxel_grid("io_v4.txt"), FormatError); // duplicate
}

TEST_CASE("gmm: 1d row") {
    write_file("io_m1.csv", "1.0, 0.0, 0.04\n");
    const GaussianMixture gmm = io::load_gmm("io_m1.csv");
    CHECK(gmm.dim == 1);
    REQUIRE(gmm.size() == 1);
    CHECK(gmm.components[0].covariance[0] == 0.04);
}

TEST_CASE("gmm: asymmetry within tolerance is symmetrized") {
    // 2d: weight, mean(2), cov(4); off-diagonals differ by 1e-13
    write_file("io_m2.csv", "1.0, 0.0, 0.0, 0.04, 0.0100000000000001, 0.01, 0.04\n");
    const GaussianMixture gmm = io::load_gmm("io_m2.csv");
    CHECK(gmm.components[0].covariance[1] == gmm.components[0].covariance[2]);
}

TEST_CASE("gmm: negative eigenvalue rejected") {
    write_file("io_m3.csv", "1.0, 0.0, -0.1\n");
    CHECK_THROWS_AS(io::load_gmm("io_m3.csv"), ValueError);
}

TEST_CASE("write_table basics") {
    io::write_table("io_t1.csv", {"index", "lambda_Q", "lambda_est"},
                    {{0.0, 1.0}, {1.0, 0.5}, {0.0, 8.0}});
    const Signal table = io::load_signal("io_t1.csv");
    CHECK(table.rows == 2);
    CHECK(table.channels == 2); // index column skipped on load
    CHECK(table.at(1, 1) == 8.0);

    CHECK_THROWS_AS(io::write_table("io_t2.csv", {}, {}), FormatError);
    CHECK_THROWS_AS(io::write_table("io_t3.csv", {"a", "b"}, {{1.0}, {1.0, 2.0}}), ShapeError);
}

TEST_CASE("comment lines are ignored") {
    write_file("io_c1.csv", "# produced by hand\nx0,x1\n# a row comment\n0,0\n1,0\n");
    const PointCloud cloud = io::load_point_cloud("io_c1.csv");
    CHECK(cloud.size() == 2);
}

TEST_CASE("round-trip is bit-exact for all four modalities") {
    Rng rng(42);
    for (int round = 0; round < 3; ++round) {
        const PointCloud cloud = testutil::random_cloud(17, 3, rng, true);
        io::write_point_cloud("io_rt_pc.csv", cloud);
        const PointCloud cloud2 = io::load_point_cloud("io_rt_pc.csv");
        CHECK(cloud2.dim == cloud.dim);
        CHECK(cloud2.positions == cloud.positions);
        CHECK(cloud2.masses == cloud.masses);

        const Graph graph = testutil::random_connected_graph(13, rng, true);
        io::write_graph("io_rt_g.txt", graph);
        const Graph graph2 = io::load_graph("io_rt_g.txt");
        CHECK(graph2.n_vertices == graph.n_vertices);
        REQUIRE(graph2.edges.size() == graph.edges.size());
        for (std::size_t e = 0; e < graph.edges.size(); ++e) {
            CHECK(graph2.edges[e].u == graph.edges[e].u);
            CHECK(graph2.edges[e].v == graph.edges[e].v);
            CHECK(graph2.edges[e].weight == graph.edges[e].weight);
        }

        VoxelGrid grid = testutil::random_grid(5, 20, rng, true);
        grid.origin = {rng.normal(), rng.normal(), rng.normal()};
        grid.spacing = rng.uniform(0.01, 2.0);
        io::write_voxel_grid("io_rt_v.txt", grid);
        const VoxelGrid grid2 = io::load_voxel_grid("io_rt_v.txt");
        CHECK(grid2.dims == grid.dims);
        CHECK(grid2.origin == grid.origin);
        CHECK(grid2.spacing == grid.spacing);
        REQUIRE(grid2.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(grid2.occupied[i].ix == grid.occupied[i].ix);
            CHECK(grid2.occupied[i].mass == grid.occupied[i].mass);
        }

        const GaussianMixture gmm = testutil::random_mixture(9, 3, rng, 0.05, true);
        io::write_gmm("io_rt_m.csv", gmm);
        const GaussianMixture gmm2 = io::load_gmm("io_rt_m.csv");
        CHECK(gmm2.dim == gmm.dim);
        REQUIRE(gmm2.size() == gmm.size());
        for (std::size_t i = 0; i < gmm.size(); ++i) {
            CHECK(gmm2.components[i].weight == gmm.components[i].weight);
            CHECK(gmm2.components[i].mean == gmm.components[i].mean);
            CHECK(gmm2.components[i].covariance == gmm.components[i].covariance);
        }
    }
}

TEST_CASE("signal round trip") {
    Signal s(4, 2);
    Rng rng(3);
    for (double& v : s.values) v = rng.normal();
    io::write_signal("io_sig.csv", s);
    const Signal s2 = io::load_signal("io_sig.csv", 4);
    CHECK(s2.channels == 2);
    CHECK(s2.values == s.values);
    CHECK_THROWS_AS(io::load_signal("io_sig.csv", 5), ShapeError);
}
