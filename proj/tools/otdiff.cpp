// otdiff: construct smoothing operators on geometric data, normalize them into
// mass-preserving diffusions, and run the spectral / comparison / flow
// workflows. One subcommand per workflow; every run writes its output tables
// plus a manifest.json describing inputs, parameters and wall time.

#include "otdiff/error.hpp"
#include "otdiff/flows.hpp"
#include "otdiff/io.hpp"
#include "otdiff/normalize.hpp"
#include "otdiff/operators.hpp"
#include "otdiff/oracle.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/spectral.hpp"
#include "otdiff/threading.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "0.1.0";

using otdiff::Modality;
using otdiff::Signal;
using otdiff::SmoothingOperator;

struct InputSpec {
    std::string points_path;
    std::string graph_path;
    std::string voxels_path;
    std::string gmm_path;
    std::string mass_path;       // optional graph vertex masses
    std::string kernel = "gaussian"; // point-cloud kernel
    std::string mass_policy = "column";
    double sigma = 0.05;
    double epsilon = 0.0;
};

void add_input_options(CLI::App* cmd, InputSpec& spec) {
    auto* points = cmd->add_option("--points", spec.points_path, "point cloud CSV");
    auto* graph = cmd->add_option("--graph", spec.graph_path, "graph edge list");
    auto* voxels = cmd->add_option("--voxels", spec.voxels_path, "sparse voxel grid");
    auto* gmm = cmd->add_option("--gmm", spec.gmm_path, "Gaussian mixture CSV");
    points->excludes(graph)->excludes(voxels)->excludes(gmm);
    graph->excludes(voxels)->excludes(gmm);
    voxels->excludes(gmm);
    cmd->add_option("--sigma", spec.sigma, "kernel radius (length units)");
    cmd->add_option("--epsilon", spec.epsilon, "graph regularizer epsilon");
    cmd->add_option("--masses", spec.mass_path, "vertex mass CSV for graphs");
    cmd->add_option("--kernel", spec.kernel, "point kernel: gaussian | exponential")
        ->check(CLI::IsMember({"gaussian", "exponential"}));
    cmd->add_option("--mass-policy", spec.mass_policy, "point masses: column | uniform")
        ->check(CLI::IsMember({"column", "uniform"}));
}

struct BuiltInput {
    SmoothingOperator op;
    Modality modality;
    std::string input_path;
    // gmm heuristic inputs, populated for mixtures
    std::optional<double> trace_avg;
    std::optional<int> dim;
};

BuiltInput build_input(const InputSpec& spec) {
    BuiltInput built{SmoothingOperator{}, Modality::dense, "", std::nullopt, std::nullopt};
    if (!spec.points_path.empty()) {
        const auto policy = spec.mass_policy == "uniform" ? otdiff::io::MassPolicy::uniform
                                                          : otdiff::io::MassPolicy::column;
        const otdiff::PointCloud cloud = otdiff::io::load_point_cloud(spec.points_path, policy);
        built.op = spec.kernel == "exponential"
                       ? otdiff::build_exponential_operator(cloud, spec.sigma)
                       : otdiff::build_gaussian_operator(cloud, spec.sigma);
        built.modality = built.op.modality();
        built.input_path = spec.points_path;
    } else if (!spec.graph_path.empty()) {
        const otdiff::Graph graph = otdiff::io::load_graph(spec.graph_path, spec.mass_path);
        built.op = otdiff::build_graph_operator(graph, spec.epsilon);
        built.modality = Modality::graph;
        built.input_path = spec.graph_path;
    } else if (!spec.voxels_path.empty()) {
        const otdiff::VoxelGrid grid = otdiff::io::load_voxel_grid(spec.voxels_path);
        built.op = otdiff::build_voxel_operator(grid, spec.sigma);
        built.modality = Modality::voxel;
        built.input_path = spec.voxels_path;
    } else if (!spec.gmm_path.empty()) {
        const otdiff::GaussianMixture gmm = otdiff::io::load_gmm(spec.gmm_path);
        built.op = otdiff::build_gmm_operator(gmm, spec.sigma);
        built.modality = Modality::gmm;
        built.input_path = spec.gmm_path;
        built.trace_avg = otdiff::mixture_trace_average(gmm);
        built.dim = static_cast<int>(gmm.dim);
    } else {
        throw otdiff::ValueError("one of --points/--graph/--voxels/--gmm is required");
    }
    return built;
}

// Unit-mass Dirac at element i: total mass <1, f>_M = 1 like the normalized
// inputs in the comparison figures.
Signal unit_mass_dirac(const SmoothingOperator& op, std::size_t index) {
    if (index >= op.size()) throw otdiff::ValueError("--dirac index out of range");
    return Signal::dirac(op.size(), index, 1.0 / op.masses()[index]);
}

double signal_mass(const SmoothingOperator& op, const Signal& f, std::size_t channel = 0) {
    double mass = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) mass += op.masses()[i] * f.at(i, channel);
    return mass;
}

struct ManifestWriter {
    nlohmann::json doc;
    std::string out_dir;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ManifestWriter(const std::string& subcommand, const std::string& dir) : out_dir(dir) {
        std::filesystem::create_directories(dir);
        doc["subcommand"] = subcommand;
        doc["version"] = kVersion;
        doc["threads"] = otdiff::thread_count();
    }
    void finish() {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        doc["wall_time_seconds"] = std::chrono::duration<double>(elapsed).count();
        std::ofstream out(out_dir + "/manifest.json", std::ios::binary);
        if (!out) throw otdiff::IoError("cannot write manifest in " + out_dir);
        out << doc.dump(2) << "\n";
    }
};

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "positions_%06d.csv", step);
    return buf;
}

// ===== subcommands ==========================================================

int run_normalize(const InputSpec& spec, double tol, int max_iter, const std::string& mode,
                  const std::string& out_dir, bool use_dense) {
    BuiltInput in = build_input(spec);
    ManifestWriter manifest("normalize", out_dir);
    manifest.doc["input"] = in.input_path;
    manifest.doc["modality"] = otdiff::modality_name(in.modality);
    manifest.doc["sigma"] = spec.sigma;
    manifest.doc["epsilon"] = spec.epsilon;
    manifest.doc["tol"] = tol;
    manifest.doc["max_iter"] = max_iter;
    manifest.doc["mode"] = mode;

    otdiff::ScalingVector scaling;
    if (use_dense) {
        scaling = otdiff::oracle::dense_sinkhorn(otdiff::oracle::dense_assemble(in.op),
                                                 in.op.masses(), tol, max_iter);
    } else {
        otdiff::SinkhornOptions options;
        options.tol = tol;
        options.max_iter = max_iter;
        options.mode = mode == "log" ? otdiff::SinkhornMode::log_domain : otdiff::SinkhornMode::linear;
        scaling = otdiff::sinkhorn_normalize(in.op, options);
    }

    otdiff::save_scaling(out_dir + "/scaling.csv", out_dir + "/scaling.json", scaling, tol,
                         spec.sigma, in.modality);
    manifest.doc["iterations"] = scaling.iterations;
    manifest.doc["final_error"] = scaling.final_error;
    manifest.doc["converged"] = scaling.converged;
    manifest.finish();

    if (!scaling.converged) {
        std::cerr << "normalize: not converged after " << scaling.iterations
                  << " iterations (error " << scaling.final_error << ")\n";
        return 2;
    }
    std::cout << "converged in " << scaling.iterations << " iterations, error "
              << scaling.final_error << "\n";
    return 0;
}

int run_diffuse(const InputSpec& spec, const std::string& scaling_dir, const std::string& signal_path,
                int dirac, int steps, const std::string& out_dir) {
    BuiltInput in = build_input(spec);
    ManifestWriter manifest("diffuse", out_dir);
    manifest.doc["input"] = in.input_path;
    manifest.doc["modality"] = otdiff::modality_name(in.modality);
    manifest.doc["sigma"] = spec.sigma;
    manifest.doc["epsilon"] = spec.epsilon;
    manifest.doc["scaling"] = scaling_dir;
    manifest.doc["steps"] = steps;

    const otdiff::ScalingVector scaling =
        otdiff::load_scaling(scaling_dir + "/scaling.csv", scaling_dir + "/scaling.json");
    const otdiff::DiffusionOperator q(std::move(in.op), scaling);

    Signal f;
    if (dirac >= 0) {
        f = unit_mass_dirac(q.op(), static_cast<std::size_t>(dirac));
        manifest.doc["dirac"] = dirac;
    } else if (!signal_path.empty()) {
        f = otdiff::io::load_signal(signal_path, q.size());
        manifest.doc["signal"] = signal_path;
    } else {
        throw otdiff::ValueError("diffuse: provide --signal or --dirac");
    }

    const Signal out = otdiff::diffuse(q, f, steps);
    otdiff::io::write_signal(out_dir + "/signal.csv", out);

    for (std::size_t c = 0; c < f.channels; ++c) {
        const double in_mass = signal_mass(q.op(), f, c);
        const double out_mass = signal_mass(q.op(), out, c);
        std::cout << "channel " << c << ": input mass " << otdiff::io::format_double(in_mass)
                  << ", output mass " << otdiff::io::format_double(out_mass) << "\n";
        manifest.doc["input_mass"].push_back(in_mass);
        manifest.doc["output_mass"].push_back(out_mass);
    }
    manifest.finish();
    return 0;
}

int run_compare(const std::string& graph_path, double epsilon, int dirac, double t, int rank,
                double tol, const std::string& out_dir) {
    const otdiff::Graph graph = otdiff::io::load_graph(graph_path);
    const SmoothingOperator op = otdiff::build_graph_operator(graph, epsilon);
    ManifestWriter manifest("compare", out_dir);
    manifest.doc["input"] = graph_path;
    manifest.doc["epsilon"] = epsilon;
    manifest.doc["dirac"] = dirac;
    manifest.doc["t"] = t;
    manifest.doc["rank"] = rank;
    manifest.doc["tol"] = tol;

    const Signal f = unit_mass_dirac(op, static_cast<std::size_t>(dirac));

    std::vector<std::string> labels;
    std::vector<double> masses, min_entries;
    auto add_row = [&](const std::string& label, const Signal& out) {
        labels.push_back(label);
        masses.push_back(signal_mass(op, out));
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < out.rows; ++i) lowest = std::min(lowest, out.at(i, 0));
        min_entries.push_back(lowest);
    };

    add_row("raw", otdiff::smatvec(op, f));
    add_row("row", otdiff::row_normalize_apply(op, f));
    add_row("symmetric", otdiff::symmetric_normalize_apply(op, f));
    add_row("spectral", otdiff::spectral_truncation_apply(graph, t, rank, f));
    const otdiff::ScalingVector scaling = otdiff::sinkhorn_normalize(op, tol);
    if (!scaling.converged) throw otdiff::NumericalError("compare: Sinkhorn did not converge");
    add_row("sinkhorn", otdiff::DiffusionOperator(op, scaling).apply(f));

    // write_table handles numeric columns; the label column is prepended here.
    std::ofstream out(out_dir + "/compare.csv", std::ios::binary);
    if (!out) throw otdiff::IoError("cannot write compare.csv");
    out << "normalization,mass,min_entry\n";
    for (std::size_t r = 0; r < labels.size(); ++r)
        out << labels[r] << "," << otdiff::io::format_double(masses[r]) << ","
            << otdiff::io::format_double(min_entries[r]) << "\n";
    manifest.finish();
    return 0;
}

int run_eigs(const InputSpec& spec, int k, double tol, double solver_tol, std::uint64_t seed,
             const std::string& out_dir, bool use_dense) {
    BuiltInput in = build_input(spec);
    ManifestWriter manifest("eigs", out_dir);
    manifest.doc["input"] = in.input_path;
    manifest.doc["modality"] = otdiff::modality_name(in.modality);
    manifest.doc["sigma"] = spec.sigma;
    manifest.doc["epsilon"] = spec.epsilon;
    manifest.doc["k"] = k;
    manifest.doc["tol"] = tol;
    manifest.doc["solver_tol"] = solver_tol;
    manifest.doc["seed"] = seed;

    if (k < 1 || static_cast<std::size_t>(k) > in.op.size())
        throw otdiff::SizeError("eigs: k must be in [1, N]");
    const otdiff::ScalingVector scaling = otdiff::sinkhorn_normalize(in.op, tol);
    if (!scaling.converged) throw otdiff::NumericalError("eigs: Sinkhorn did not converge");

    otdiff::SpectralBasis basis;
    if (use_dense) {
        const otdiff::oracle::DenseEigs dense = otdiff::oracle::dense_generalized_eigs(
            otdiff::oracle::dense_scaled_kernel(in.op, scaling), in.op.masses());
        basis.rows = in.op.size();
        basis.count = static_cast<std::size_t>(k);
        basis.eigenvalues.assign(dense.eigenvalues.begin(), dense.eigenvalues.begin() + k);
        basis.residuals.assign(static_cast<std::size_t>(k), 0.0);
        basis.eigenvectors.resize(basis.rows * basis.count);
        for (std::size_t c = 0; c < basis.count; ++c)
            for (std::size_t i = 0; i < basis.rows; ++i)
                basis.eigenvectors[c * basis.rows + i] = dense.vectors(i, c);
    } else {
        otdiff::EigsOptions options;
        options.solver_tol = solver_tol;
        options.seed = seed;
        basis = otdiff::top_eigenpairs(otdiff::DiffusionOperator(in.op, scaling), k, options);
    }

    // Laplacian-eigenvalue heuristic; graphs have no kernel radius, so the
    // estimate column is NaN there.
    std::vector<double> estimates;
    if (in.modality == Modality::gmm) {
        estimates = otdiff::estimate_laplacian_eigenvalues(basis, spec.sigma,
                                                           otdiff::SpectralModality::gmm,
                                                           in.trace_avg, in.dim);
    } else if (in.modality == Modality::voxel) {
        estimates =
            otdiff::estimate_laplacian_eigenvalues(basis, spec.sigma, otdiff::SpectralModality::voxels);
    } else if (in.modality != Modality::graph) {
        estimates =
            otdiff::estimate_laplacian_eigenvalues(basis, spec.sigma, otdiff::SpectralModality::points);
    }

    std::vector<double> index(basis.count), lambda_est(basis.count,
                                                       std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < basis.count; ++i) index[i] = static_cast<double>(i);
    for (std::size_t i = 0; i < estimates.size(); ++i) lambda_est[i] = estimates[i];
    otdiff::io::write_table(out_dir + "/eigenvalues.csv", {"index", "lambda_Q", "lambda_est", "residual"},
                            {index, basis.eigenvalues, lambda_est, basis.residuals});

    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    for (std::size_t c = 0; c < basis.count; ++c) {
        names.push_back("phi" + std::to_string(c));
        columns.emplace_back(basis.vector(c), basis.vector(c) + basis.rows);
    }
    otdiff::io::write_table(out_dir + "/eigenvectors.csv", names, columns);
    manifest.finish();
    return 0;
}

int run_convergence(const InputSpec& spec, double tol, int max_iter, const std::string& out_dir) {
    BuiltInput in = build_input(spec);
    ManifestWriter manifest("convergence", out_dir);
    manifest.doc["input"] = in.input_path;
    manifest.doc["modality"] = otdiff::modality_name(in.modality);
    manifest.doc["sigma"] = spec.sigma;
    manifest.doc["epsilon"] = spec.epsilon;
    manifest.doc["tol"] = tol;
    manifest.doc["max_iter"] = max_iter;

    std::vector<double> trace;
    otdiff::SinkhornOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.error_trace = &trace;
    const otdiff::ScalingVector scaling = otdiff::sinkhorn_normalize(in.op, options);

    std::vector<double> iteration(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) iteration[i] = static_cast<double>(i);
    otdiff::io::write_table(out_dir + "/convergence.csv", {"iteration", "error"}, {iteration, trace});
    manifest.doc["iterations"] = scaling.iterations;
    manifest.doc["final_error"] = scaling.final_error;
    manifest.doc["converged"] = scaling.converged;
    manifest.finish();
    return scaling.converged ? 0 : 2;
}

int run_masses(const std::string& voxels_path, double sigma_voxels, const std::string& out_dir) {
    const otdiff::VoxelGrid grid = otdiff::io::load_voxel_grid(voxels_path);
    ManifestWriter manifest("masses", out_dir);
    manifest.doc["input"] = voxels_path;
    manifest.doc["sigma_voxels"] = sigma_voxels;
    const otdiff::VoxelGrid out = otdiff::estimate_voxel_masses(grid, sigma_voxels);
    otdiff::io::write_voxel_grid(out_dir + "/voxels.txt", out);
    manifest.finish();
    return 0;
}

int run_flow_cmd(const std::string& source_path, const std::string& target_path,
                 const std::string& precond, double sigma, double eta, int steps, int stride,
                 std::uint64_t seed, const std::string& out_dir) {
    const otdiff::PointCloud source = otdiff::io::load_point_cloud(source_path);
    const otdiff::PointCloud target = otdiff::io::load_point_cloud(target_path);

    ManifestWriter manifest("flow", out_dir);
    manifest.doc["source"] = source_path;
    manifest.doc["target"] = target_path;
    manifest.doc["precond"] = precond;
    manifest.doc["sigma"] = sigma;
    manifest.doc["eta"] = eta;
    manifest.doc["steps"] = steps;
    manifest.doc["stride"] = stride;
    manifest.doc["seed"] = seed;

    otdiff::FlowConfig config;
    config.eta = eta;
    config.steps = steps;
    config.sigma = sigma;
    config.snapshot_stride = stride;
    config.seed = seed;
    config.preconditioner = precond == "identity" ? otdiff::FlowPreconditioner::identity
                            : precond == "kernel" ? otdiff::FlowPreconditioner::kernel
                                                  : otdiff::FlowPreconditioner::q_diffusion;

    const otdiff::FlowTrajectory traj = otdiff::run_flow(source, target, config);

    for (const otdiff::FlowSnapshot& snap : traj.snapshots) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> columns(source.dim);
        for (std::size_t k = 0; k < source.dim; ++k) {
            names.push_back("x" + std::to_string(k));
            for (std::size_t i = 0; i < source.size(); ++i)
                columns[k].push_back(snap.positions[i * source.dim + k]);
        }
        otdiff::io::write_table(out_dir + "/" + snapshot_name(snap.step), names, columns);
    }
    std::vector<double> step_col(traj.energies.size());
    for (std::size_t i = 0; i < traj.energies.size(); ++i) step_col[i] = static_cast<double>(i);
    otdiff::io::write_table(out_dir + "/energy.csv", {"step", "energy"}, {step_col, traj.energies});

    manifest.doc["final_energy"] = traj.energies.back();
    manifest.finish();
    std::cout << "final energy " << otdiff::io::format_double(traj.energies.back()) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mass-preserving diffusion operators on discrete geometric data"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    int threads = 0;
    if (const char* env = std::getenv("OTDIFF_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "matvec threads (0 = runtime default; 1 = deterministic)");

    // normalize
    InputSpec norm_spec;
    double norm_tol = 1e-6;
    int norm_max_iter = 200;
    std::string norm_mode = "linear";
    std::string norm_out = "out_normalize";
    bool norm_dense = false;
    CLI::App* normalize = app.add_subcommand("normalize", "symmetric Sinkhorn scaling of an operator");
    add_input_options(normalize, norm_spec);
    normalize->add_option("--tol", norm_tol, "convergence tolerance (weighted mean error)");
    normalize->add_option("--max-iter", norm_max_iter, "iteration cap");
    normalize->add_option("--mode", norm_mode, "linear | log")->check(CLI::IsMember({"linear", "log"}));
    normalize->add_option("--out", norm_out, "output directory");
    normalize->add_flag("--dense", norm_dense)->group(""); // debugging: dense oracle path

    // diffuse
    InputSpec diff_spec;
    std::string diff_scaling = "out_normalize";
    std::string diff_signal;
    int diff_dirac = -1;
    int diff_steps = 1;
    std::string diff_out = "out_diffuse";
    CLI::App* diffuse_cmd = app.add_subcommand("diffuse", "apply Q^steps to a signal");
    add_input_options(diffuse_cmd, diff_spec);
    diffuse_cmd->add_option("--scaling", diff_scaling, "directory holding scaling.csv/scaling.json");
    diffuse_cmd->add_option("--signal", diff_signal, "signal CSV");
    diffuse_cmd->add_option("--dirac", diff_dirac, "unit-mass Dirac at this element");
    diffuse_cmd->add_option("--steps", diff_steps, "number of applications");
    diffuse_cmd->add_option("--out", diff_out, "output directory");

    // compare
    std::string cmp_graph;
    double cmp_epsilon = 0.0;
    int cmp_dirac = 0;
    double cmp_t = 1.0;
    int cmp_rank = 1;
    double cmp_tol = 1e-10;
    std::string cmp_out = "out_compare";
    CLI::App* compare = app.add_subcommand("compare", "mass/positivity table across normalizations");
    compare->add_option("--graph", cmp_graph, "graph edge list")->required();
    compare->add_option("--epsilon", cmp_epsilon, "graph regularizer epsilon");
    compare->add_option("--dirac", cmp_dirac, "Dirac vertex");
    compare->add_option("--t", cmp_t, "spectral diffusion time");
    compare->add_option("--rank", cmp_rank, "spectral truncation rank");
    compare->add_option("--tol", cmp_tol, "Sinkhorn tolerance");
    compare->add_option("--out", cmp_out, "output directory");

    // eigs
    InputSpec eigs_spec;
    int eigs_k = 8;
    double eigs_tol = 1e-9;
    double eigs_solver_tol = 1e-8;
    std::uint64_t eigs_seed = 0;
    std::string eigs_out = "out_eigs";
    bool eigs_dense = false;
    CLI::App* eigs = app.add_subcommand("eigs", "leading eigenpairs and Laplacian-eigenvalue estimates");
    add_input_options(eigs, eigs_spec);
    eigs->add_option("--k", eigs_k, "number of eigenpairs");
    eigs->add_option("--tol", eigs_tol, "Sinkhorn tolerance");
    eigs->add_option("--solver-tol", eigs_solver_tol, "eigensolver residual tolerance");
    eigs->add_option("--seed", eigs_seed, "Lanczos start-vector seed");
    eigs->add_option("--out", eigs_out, "output directory");
    eigs->add_flag("--dense", eigs_dense)->group("");

    // convergence
    InputSpec conv_spec;
    double conv_tol = 1e-12;
    int conv_max_iter = 200;
    std::string conv_out = "out_convergence";
    CLI::App* convergence = app.add_subcommand("convergence", "per-iteration Sinkhorn error trace");
    add_input_options(convergence, conv_spec);
    convergence->add_option("--tol", conv_tol, "stop threshold");
    convergence->add_option("--max-iter", conv_max_iter, "iteration cap");
    convergence->add_option("--out", conv_out, "output directory");

    // masses
    std::string masses_voxels;
    double masses_sigma = 3.0;
    std::string masses_out = "out_masses";
    CLI::App* masses = app.add_subcommand("masses", "KDE mass estimation on a voxel grid");
    masses->add_option("--voxels", masses_voxels, "sparse voxel grid")->required();
    masses->add_option("--sigma-voxels", masses_sigma, "KDE deviation in voxel units");
    masses->add_option("--out", masses_out, "output directory");

    // flow
    std::string flow_source, flow_target;
    std::string flow_precond = "identity";
    double flow_sigma = 0.07;
    double flow_eta = 0.05;
    int flow_steps = 100;
    int flow_stride = 10;
    std::uint64_t flow_seed = 0;
    std::string flow_out = "out_flow";
    CLI::App* flow = app.add_subcommand("flow", "energy-distance particle gradient flow");
    flow->add_option("--source", flow_source, "source point cloud CSV")->required();
    flow->add_option("--target", flow_target, "target point cloud CSV")->required();
    flow->add_option("--precond", flow_precond, "identity | kernel | qdiff")
        ->check(CLI::IsMember({"identity", "kernel", "qdiff"}));
    flow->add_option("--sigma", flow_sigma, "smoothing kernel radius");
    flow->add_option("--eta", flow_eta, "step size");
    flow->add_option("--steps", flow_steps, "number of updates");
    flow->add_option("--stride", flow_stride, "snapshot stride");
    flow->add_option("--seed", flow_seed, "seed recorded in the manifest");
    flow->add_option("--out", flow_out, "output directory");

    CLI11_PARSE(app, argc, argv);
    otdiff::set_threads(threads);

    try {
        if (normalize->parsed())
            return run_normalize(norm_spec, norm_tol, norm_max_iter, norm_mode, norm_out, norm_dense);
        if (diffuse_cmd->parsed())
            return run_diffuse(diff_spec, diff_scaling, diff_signal, diff_dirac, diff_steps, diff_out);
        if (compare->parsed())
            return run_compare(cmp_graph, cmp_epsilon, cmp_dirac, cmp_t, cmp_rank, cmp_tol, cmp_out);
        if (eigs->parsed())
            return run_eigs(eigs_spec, eigs_k, eigs_tol, eigs_solver_tol, eigs_seed, eigs_out,
                            eigs_dense);
        if (convergence->parsed())
            return run_convergence(conv_spec, conv_tol, conv_max_iter, conv_out);
        if (masses->parsed()) return run_masses(masses_voxels, masses_sigma, masses_out);
        if (flow->parsed())
            return run_flow_cmd(flow_source, flow_target, flow_precond, flow_sigma, flow_eta,
                                flow_steps, flow_stride, flow_seed, flow_out);
    } catch (const otdiff::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
