#pragma once

#include "otdiff/types.hpp"

#include <string>
#include <vector>

namespace otdiff::io {

// Text formats: UTF-8, LF line endings, `#` comment lines ignored (the graph
// header line `#vertices N` is the one directive that starts with `#`).
// Floats are written with 17 significant digits so every load(write(x))
// round-trip is bit-exact.

enum class MassPolicy {
    column, // use the `mass` column when present, else uniform 1/N
    uniform // always uniform 1/N
};

PointCloud load_point_cloud(const std::string& path, MassPolicy policy = MassPolicy::column);
void write_point_cloud(const std::string& path, const PointCloud& cloud);

Graph load_graph(const std::string& path, const std::string& mass_path = "");
void write_graph(const std::string& path, const Graph& graph);

VoxelGrid load_voxel_grid(const std::string& path);
void write_voxel_grid(const std::string& path, const VoxelGrid& grid);

GaussianMixture load_gmm(const std::string& path);
void write_gmm(const std::string& path, const GaussianMixture& gmm);

// Signal CSV: header `f0,...,f{P-1}`, optionally preceded by an `index`
// column which is ignored on load.
Signal load_signal(const std::string& path, std::size_t expected_rows = 0);
void write_signal(const std::string& path, const Signal& signal);

// Generic CSV table with one header line; all columns must have equal length.
void write_table(const std::string& path, const std::vector<std::string>& column_names,
                 const std::vector<std::vector<double>>& columns);

std::string format_double(double value);

} // namespace otdiff::io
