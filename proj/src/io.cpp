#include "otdiff/io.hpp"

#include "otdiff/error.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace otdiff::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Content lines of a file: comments and blanks dropped, CR stripped.
// `keep_directives` keeps `#vertices ...` style lines for the graph format.
std::vector<std::string> read_lines(const std::string& path, bool keep_directives = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (keep_directives && t.rfind("#vertices", 0) == 0) {
                lines.push_back(t);
            }
            continue;
        }
        lines.push_back(t);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw FormatError(context + ": cannot parse number '" + tok + "'");
    return v;
}

long parse_long(const std::string& tok, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw FormatError(context + ": cannot parse integer '" + tok + "'");
    return v;
}

bool looks_numeric(const std::string& tok) {
    char* end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end != tok.c_str() && *end == '\0';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

PointCloud load_point_cloud(const std::string& path, MassPolicy policy) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw FormatError(path + ": empty point cloud file");

    const std::vector<std::string> header = split_csv(lines[0]);
    bool has_mass = !header.empty() && header.back() == "mass";
    const std::size_t d = header.size() - (has_mass ? 1 : 0);
    if (d == 0) throw FormatError(path + ": header must list at least one coordinate column");
    for (std::size_t k = 0; k < d; ++k) {
        if (header[k] != "x" + std::to_string(k))
            throw FormatError(path + ": missing or malformed header, expected x0,...,x" +
                              std::to_string(d - 1) + "[,mass]");
    }

    PointCloud cloud;
    cloud.dim = d;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string> row = split_csv(lines[r]);
        if (row.size() != header.size()) throw FormatError(path + ": ragged row " + std::to_string(r));
        for (std::size_t k = 0; k < d; ++k)
            cloud.positions.push_back(parse_double(row[k], path));
        if (has_mass) {
            const double m = parse_double(row[d], path);
            if (!(m > 0.0)) throw ValueError(path + ": non-positive mass in row " + std::to_string(r));
            cloud.masses.push_back(m);
        } else {
            cloud.masses.push_back(0.0); // placeholder, filled below
        }
    }
    const std::size_t n = cloud.masses.size();
    if (n == 0) throw FormatError(path + ": no data rows");
    if (policy == MassPolicy::uniform || !has_mass) {
        for (double& m : cloud.masses) m = 1.0 / static_cast<double>(n);
    }
    cloud.validate();
    return cloud;
}

void write_point_cloud(const std::string& path, const PointCloud& cloud) {
    std::ofstream out = open_out(path);
    for (std::size_t k = 0; k < cloud.dim; ++k) out << (k ? "," : "") << "x" << k;
    out << ",mass\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t k = 0; k < cloud.dim; ++k)
            out << (k ? "," : "") << format_double(cloud.positions[i * cloud.dim + k]);
        out << "," << format_double(cloud.masses[i]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Graph load_graph(const std::string& path, const std::string& mass_path) {
    const std::vector<std::string> lines = read_lines(path, /*keep_directives=*/true);
    if (lines.empty() || lines[0].rfind("#vertices", 0) != 0)
        throw FormatError(path + ": first line must be '#vertices N'");
    const std::vector<std::string> head = split_ws(lines[0]);
    if (head.size() != 2) throw FormatError(path + ": malformed '#vertices N' line");
    const long n = parse_long(head[1], path);
    if (n < 1) throw FormatError(path + ": vertex count must be positive");

    Graph graph;
    graph.n_vertices = static_cast<std::size_t>(n);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string> tok = split_ws(lines[r]);
        if (tok.size() != 3) throw FormatError(path + ": edge lines must be 'i j w'");
        const long i = parse_long(tok[0], path);
        const long j = parse_long(tok[1], path);
        const double w = parse_double(tok[2], path);
        if (i < 0 || j < 0 || i >= n || j >= n) throw FormatError(path + ": vertex index out of range");
        if (i == j) throw FormatError(path + ": self-loops are not allowed");
        if (!(w > 0.0)) throw ValueError(path + ": edge weight must be positive");
        GraphEdge e;
        e.u = static_cast<std::size_t>(std::min(i, j));
        e.v = static_cast<std::size_t>(std::max(i, j));
        e.weight = w;
        graph.edges.push_back(e);
    }

    if (mass_path.empty()) {
        graph.masses.assign(graph.n_vertices, 1.0 / static_cast<double>(graph.n_vertices));
    } else {
        std::vector<std::string> mlines = read_lines(mass_path);
        if (!mlines.empty() && !looks_numeric(mlines[0])) mlines.erase(mlines.begin());
        if (mlines.size() != graph.n_vertices)
            throw FormatError(mass_path + ": mass file length does not match vertex count");
        for (const std::string& line : mlines) {
            const double m = parse_double(line, mass_path);
            if (!(m > 0.0)) throw ValueError(mass_path + ": non-positive mass");
            graph.masses.push_back(m);
        }
    }
    graph.validate();
    return graph;
}

void write_graph(const std::string& path, const Graph& graph) {
    std::ofstream out = open_out(path);
    out << "#vertices " << graph.n_vertices << "\n";
    for (const GraphEdge& e : graph.edges)
        out << e.u << " " << e.v << " " << format_double(e.weight) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

VoxelGrid load_voxel_grid(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.size() < 4) throw FormatError(path + ": expected dims/origin/spacing plus voxel lines");

    VoxelGrid grid;
    {
        const std::vector<std::string> tok = split_ws(lines[0]);
        if (tok.size() != 4 || tok[0] != "dims") throw FormatError(path + ": line 1 must be 'dims nx ny nz'");
        for (int k = 0; k < 3; ++k) grid.dims[k] = static_cast<int>(parse_long(tok[k + 1], path));
    }
    {
        const std::vector<std::string> tok = split_ws(lines[1]);
        if (tok.size() != 4 || tok[0] != "origin") throw FormatError(path + ": line 2 must be 'origin ox oy oz'");
        for (int k = 0; k < 3; ++k) grid.origin[k] = parse_double(tok[k + 1], path);
    }
    {
        const std::vector<std::string> tok = split_ws(lines[2]);
        if (tok.size() != 2 || tok[0] != "spacing") throw FormatError(path + ": line 3 must be 'spacing h'");
        grid.spacing = parse_double(tok[1], path);
    }
    for (std::size_t r = 3; r < lines.size(); ++r) {
        const std::vector<std::string> tok = split_ws(lines[r]);
        if (tok.size() != 4) throw FormatError(path + ": voxel lines must be 'ix iy iz mass'");
        Voxel v;
        v.ix = static_cast<int>(parse_long(tok[0], path));
        v.iy = static_cast<int>(parse_long(tok[1], path));
        v.iz = static_cast<int>(parse_long(tok[2], path));
        v.mass = parse_double(tok[3], path);
        grid.occupied.push_back(v);
    }
    grid.validate();
    return grid;
}

void write_voxel_grid(const std::string& path, const VoxelGrid& grid) {
    std::ofstream out = open_out(path);
    out << "dims " << grid.dims[0] << " " << grid.dims[1] << " " << grid.dims[2] << "\n";
    out << "origin " << format_double(grid.origin[0]) << " " << format_double(grid.origin[1]) << " "
        << format_double(grid.origin[2]) << "\n";
    out << "spacing " << format_double(grid.spacing) << "\n";
    for (const Voxel& v : grid.occupied)
        out << v.ix << " " << v.iy << " " << v.iz << " " << format_double(v.mass) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

GaussianMixture load_gmm(const std::string& path) {
    std::vector<std::string> lines = read_lines(path);
    if (!lines.empty() && !looks_numeric(split_csv(lines[0])[0])) lines.erase(lines.begin());
    if (lines.empty()) throw FormatError(path + ": empty mixture file");

    GaussianMixture gmm;
    // row layout: weight, d means, d*d covariance entries; d inferred from width
    const std::size_t cols = split_csv(lines[0]).size();
    std::size_t d = 0;
    for (std::size_t trial = 1; trial <= 64; ++trial) {
        if (1 + trial + trial * trial == cols) {
            d = trial;
            break;
        }
    }
    if (d == 0) throw FormatError(path + ": row length " + std::to_string(cols) +
                                  " does not match 1 + d + d*d for any d");
    gmm.dim = d;

    for (std::size_t r = 0; r < lines.size(); ++r) {
        const std::vector<std::string> row = split_csv(lines[r]);
        if (row.size() != cols) throw FormatError(path + ": ragged row " + std::to_string(r));
        GaussianComponent c;
        c.weight = parse_double(row[0], path);
        for (std::size_t k = 0; k < d; ++k) c.mean.push_back(parse_double(row[1 + k], path));
        for (std::size_t k = 0; k < d * d; ++k) c.covariance.push_back(parse_double(row[1 + d + k], path));
        gmm.components.push_back(std::move(c));
    }
    gmm.symmetrize_and_check();
    return gmm;
}

void write_gmm(const std::string& path, const GaussianMixture& gmm) {
    std::ofstream out = open_out(path);
    const std::size_t d = gmm.dim;
    for (const GaussianComponent& c : gmm.components) {
        out << format_double(c.weight);
        for (std::size_t k = 0; k < d; ++k) out << "," << format_double(c.mean[k]);
        for (std::size_t k = 0; k < d * d; ++k) out << "," << format_double(c.covariance[k]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Signal load_signal(const std::string& path, std::size_t expected_rows) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw FormatError(path + ": empty signal file");
    std::vector<std::string> header = split_csv(lines[0]);
    std::size_t first_col = 0;
    if (!header.empty() && header[0] == "index") first_col = 1;
    const std::size_t channels = header.size() - first_col;
    if (channels == 0) throw FormatError(path + ": signal file has no value columns");

    const std::size_t rows = lines.size() - 1;
    Signal s(rows, channels);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<std::string> row = split_csv(lines[r + 1]);
        if (row.size() != header.size()) throw FormatError(path + ": ragged row " + std::to_string(r + 1));
        for (std::size_t c = 0; c < channels; ++c)
            s.at(r, c) = parse_double(row[first_col + c], path);
    }
    if (expected_rows != 0 && rows != expected_rows)
        throw ShapeError(path + ": signal has " + std::to_string(rows) + " rows, expected " +
                         std::to_string(expected_rows));
    return s;
}

void write_signal(const std::string& path, const Signal& signal) {
    std::vector<std::string> names{"index"};
    std::vector<std::vector<double>> cols;
    std::vector<double> index(signal.rows);
    for (std::size_t i = 0; i < signal.rows; ++i) index[i] = static_cast<double>(i);
    cols.push_back(std::move(index));
    for (std::size_t c = 0; c < signal.channels; ++c) {
        names.push_back("f" + std::to_string(c));
        cols.emplace_back(signal.channel(c), signal.channel(c) + signal.rows);
    }
    write_table(path, names, cols);
}

void write_table(const std::string& path, const std::vector<std::string>& column_names,
                 const std::vector<std::vector<double>>& columns) {
    if (column_names.empty() || columns.empty()) throw FormatError("write_table: empty column set");
    if (column_names.size() != columns.size())
        throw ShapeError("write_table: name/column count mismatch");
    const std::size_t rows = columns[0].size();
    for (const std::vector<double>& col : columns)
        if (col.size() != rows) throw ShapeError("write_table: columns must have equal length");

    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < column_names.size(); ++c)
        out << (c ? "," : "") << column_names[c];
    out << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << format_double(columns[c][r]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace otdiff::io
