#include "otdiff/flows.hpp"

#include "otdiff/error.hpp"
#include "otdiff/normalize.hpp"
#include "otdiff/operators.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace otdiff {

namespace {

double distance(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

// sum_i sum_j |a_i - b_j| with per-row partials so the reduction order is fixed.
double cross_distance_sum(const std::vector<double>& a, std::size_t na, const std::vector<double>& b,
                          std::size_t nb, std::size_t dim) {
    std::vector<double> partial(na, 0.0);
    const std::int64_t n = static_cast<std::int64_t>(na);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ai = a.data() + static_cast<std::size_t>(i) * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) acc += distance(ai, b.data() + j * dim, dim);
        partial[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double energy_from_positions(const std::vector<double>& x, std::size_t n,
                             const std::vector<double>& y, std::size_t m, std::size_t dim,
                             double target_self_term) {
    const double cross = cross_distance_sum(x, n, y, m, dim);
    const double self = cross_distance_sum(x, n, x, n, dim);
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return cross / (nn * mm) - self / (2.0 * nn * nn) - target_self_term;
}

std::vector<double> gradient_from_positions(const std::vector<double>& x, std::size_t n,
                                            const std::vector<double>& y, std::size_t m,
                                            std::size_t dim) {
    std::vector<double> grad(n * dim, 0.0);
    const double inv_nm = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
    const double inv_nn = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* xi = x.data() + i * dim;
        double* gi = grad.data() + i * dim;
        for (std::size_t j = 0; j < m; ++j) {
            const double* yj = y.data() + j * dim;
            const double dist = distance(xi, yj, dim);
            if (dist == 0.0) continue; // coincident pair: subgradient 0
            for (std::size_t k = 0; k < dim; ++k) gi[k] += inv_nm * (xi[k] - yj[k]) / dist;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* xj = x.data() + j * dim;
            const double dist = distance(xi, xj, dim);
            if (dist == 0.0) continue;
            for (std::size_t k = 0; k < dim; ++k) gi[k] -= inv_nn * (xi[k] - xj[k]) / dist;
        }
    }
    return grad;
}

} // namespace

double energy_distance(const PointCloud& source, const PointCloud& target) {
    source.validate();
    target.validate();
    if (source.dim != target.dim) throw ShapeError("energy_distance: dimension mismatch");
    const std::size_t n = source.size();
    const std::size_t m = target.size();
    const double target_self =
        cross_distance_sum(target.positions, m, target.positions, m, source.dim) /
        (2.0 * static_cast<double>(m) * static_cast<double>(m));
    return energy_from_positions(source.positions, n, target.positions, m, source.dim, target_self);
}

std::vector<double> energy_distance_gradient(const PointCloud& source, const PointCloud& target) {
    source.validate();
    target.validate();
    if (source.dim != target.dim) throw ShapeError("energy_distance_gradient: dimension mismatch");
    return gradient_from_positions(source.positions, source.size(), target.positions, target.size(),
                                   source.dim);
}

FlowTrajectory run_flow(const PointCloud& source, const PointCloud& target, const FlowConfig& config) {
    source.validate();
    target.validate();
    if (source.dim != target.dim) throw ShapeError("run_flow: dimension mismatch");
    if (!(config.eta > 0.0)) throw ValueError("run_flow: eta must be positive");
    if (config.steps < 0) throw ValueError("run_flow: steps must be nonnegative");
    if (config.snapshot_stride < 1) throw ValueError("run_flow: snapshot stride must be >= 1");
    if (config.preconditioner != FlowPreconditioner::identity && !(config.sigma > 0.0))
        throw ValueError("run_flow: sigma must be positive for kernel preconditioners");

    const std::size_t n = source.size();
    const std::size_t dim = source.dim;
    std::vector<double> x = source.positions;

    const double target_self =
        cross_distance_sum(target.positions, target.size(), target.positions, target.size(), dim) /
        (2.0 * static_cast<double>(target.size()) * static_cast<double>(target.size()));

    double total_mass = 0.0;
    for (double m : source.masses) total_mass += m;

    FlowTrajectory traj;
    auto record_snapshot = [&](int step, double energy) {
        FlowSnapshot snap;
        snap.step = step;
        snap.positions = x;
        snap.energy = energy;
        traj.snapshots.push_back(std::move(snap));
    };

    double energy = energy_from_positions(x, n, target.positions, target.size(), dim, target_self);
    if (!std::isfinite(energy)) throw NumericalError("run_flow: non-finite initial energy");
    traj.energies.push_back(energy);
    record_snapshot(0, energy);

    // Step-0 kernel row-sum mean, fixed for the whole run.
    double kernel_scale = 1.0;
    if (config.preconditioner == FlowPreconditioner::kernel) {
        PointCloud current = source;
        const SmoothingOperator op = build_gaussian_operator(current, config.sigma);
        std::vector<double> ones(n, 1.0), sums(n);
        op.apply_kernel(ones.data(), sums.data());
        double mean = 0.0;
        for (double s : sums) mean += s;
        kernel_scale = mean / static_cast<double>(n);
    }

    std::vector<double> warm_scales; // warm start for the per-step Sinkhorn

    for (int step = 0; step < config.steps; ++step) {
        std::vector<double> grad = gradient_from_positions(x, n, target.positions, target.size(), dim);

        // descent direction per channel
        Signal g(n, dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k) g.at(i, k) = -grad[i * dim + k];

        Signal update(n, dim);
        switch (config.preconditioner) {
            case FlowPreconditioner::identity:
                update = g;
                break;
            case FlowPreconditioner::kernel: {
                PointCloud current = source;
                current.positions = x;
                const SmoothingOperator op = build_gaussian_operator(current, config.sigma);
                for (std::size_t c = 0; c < dim; ++c)
                    op.apply_kernel(g.channel(c), update.channel(c));
                for (double& v : update.values) v /= kernel_scale;
                break;
            }
            case FlowPreconditioner::q_diffusion: {
                PointCloud current = source;
                current.positions = x;
                SmoothingOperator op = build_gaussian_operator(current, config.sigma);
                SinkhornOptions opts;
                opts.tol = 1e-13;
                opts.max_iter = 500;
                opts.initial_log_scales = warm_scales;
                ScalingVector scaling = sinkhorn_normalize(op, opts);
                if (!scaling.converged)
                    throw NumericalError("run_flow: Sinkhorn did not converge at step " +
                                         std::to_string(step));
                warm_scales = scaling.log_scales;
                const DiffusionOperator q(std::move(op), std::move(scaling));
                update = q.apply(g);
                break;
            }
        }

        const double scale = config.eta * static_cast<double>(n);

        // mass-weighted mean gap between applied and raw displacement fields
        double gap = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            double mu_update = 0.0, mu_raw = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                mu_update += source.masses[i] * update.at(i, k);
                mu_raw += source.masses[i] * g.at(i, k);
            }
            gap = std::max(gap, scale * std::abs(mu_update - mu_raw) / total_mass);
        }
        traj.mean_update_gap.push_back(gap);

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k) x[i * dim + k] += scale * update.at(i, k);

        energy = energy_from_positions(x, n, target.positions, target.size(), dim, target_self);
        if (!std::isfinite(energy))
            throw NumericalError("run_flow: energy became non-finite at step " + std::to_string(step + 1));
        traj.energies.push_back(energy);

        const int done = step + 1;
        if (done % config.snapshot_stride == 0 || done == config.steps)
            record_snapshot(done, energy);
    }
    return traj;
}

} // namespace otdiff
