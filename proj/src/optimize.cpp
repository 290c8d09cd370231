#include "cvp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cvp {

std::vector<double> project_simplex(std::vector<double> w, double volume) {
    // Euclidean projection onto {w >= 0, sum w = volume} (sort-based rule)
    const std::size_t n = w.size();
    std::vector<double> u = w;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < n; ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - volume) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) {
            rho = static_cast<int>(j + 1);
            theta = candidate;
        }
    }
    for (auto &x : w) x = std::max(0.0, x - theta);
    // repair the constraint exactly against roundoff
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (s > 0.0)
        for (auto &x : w) x *= volume / s;
    return w;
}

namespace {

std::vector<double> start_weights(std::size_t n, const OptimizerConfig &cfg,
                                  double volume) {
    if (!cfg.init_weights.empty()) {
        if (cfg.init_weights.size() != n)
            throw std::invalid_argument("init_weights size mismatch");
        return project_simplex(cfg.init_weights, volume);
    }
    return std::vector<double>(n, volume / static_cast<double>(n));
}

double quadratic_action(const std::vector<std::vector<double>> &k,
                        const std::vector<double> &w) {
    const std::size_t n = w.size();
    KahanSum s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s.add(w[i] * k[i][j] * w[j]);
    return s.value();
}

std::vector<double> quadratic_gradient(
    const std::vector<std::vector<double>> &k, const std::vector<double> &w) {
    const std::size_t n = w.size();
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        KahanSum s;
        for (std::size_t j = 0; j < n; ++j) s.add(k[i][j] * w[j]);
        g[i] = 2.0 * s.value();
    }
    return g;
}

ElReport compact_report(const CompactKernel &kernel,
                        const std::vector<int> &points,
                        const std::vector<double> &weights) {
    CompactSystem sys;
    sys.kernel = kernel;
    sys.rho.points = points;
    sys.rho.weights = weights;
    sys.rho.total_volume =
        std::accumulate(weights.begin(), weights.end(), 0.0);
    return el_residual_compact(sys);
}

} // namespace

CompactSolveResult minimize_compact(const CompactKernel &kernel,
                                    const std::vector<int> &points,
                                    const OptimizerConfig &cfg) {
    cfg.check();
    if (points.empty())
        throw std::invalid_argument("minimize_compact: empty point list");
    const std::size_t n = points.size();

    // freeze the kernel into a table once
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            k[i][j] = kernel.evaluate(points[i], points[j]);

    std::vector<double> w = start_weights(n, cfg, 1.0);
    double value = quadratic_action(k, w);

    CompactSolveResult out;
    out.action_trace.push_back(value);

    Rng rng(cfg.seed);
    double step = cfg.step0;
    double temperature = cfg.anneal_t0;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        if (iter % cfg.el_check_every == 0) {
            const ElReport report = compact_report(kernel, points, w);
            if (report.total() <= cfg.stop_tol) {
                out.converged = true;
                break;
            }
        }

        bool moved = false;
        if (cfg.method == OptMethod::FrankWolfe) {
            const auto g = quadratic_gradient(k, w);
            const std::size_t s =
                std::min_element(g.begin(), g.end()) - g.begin();
            std::vector<double> d(n);
            for (std::size_t i = 0; i < n; ++i)
                d[i] = (i == s ? 1.0 : 0.0) - w[i];
            // exact line search of the quadratic along d
            double dKw = 0.0, dKd = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    dKw += d[i] * k[i][j] * w[j];
                    dKd += d[i] * k[i][j] * d[j];
                }
            double gamma = dKd > 0.0 ? std::clamp(-dKw / dKd, 0.0, 1.0)
                                     : (dKw < 0.0 ? 1.0 : 0.0);
            if (gamma > 0.0) {
                for (std::size_t i = 0; i < n; ++i) w[i] += gamma * d[i];
                const double next = quadratic_action(k, w);
                moved = next < value;
                value = next;
            }
        } else if (cfg.method == OptMethod::ProjectedGradient) {
            const auto g = quadratic_gradient(k, w);
            while (step > 1e-16) {
                std::vector<double> trial(n);
                for (std::size_t i = 0; i < n; ++i)
                    trial[i] = w[i] - step * g[i];
                trial = project_simplex(trial, 1.0);
                const double next = quadratic_action(k, trial);
                if (next <= value) {
                    moved = next < value - 1e-17 * (1.0 + std::abs(value));
                    w = std::move(trial);
                    value = next;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
        } else { // Annealing: pairwise mass transfer with Metropolis rule
            const std::size_t i = rng.below(n);
            std::size_t j = rng.below(n - 1);
            if (j >= i) ++j;
            const double delta =
                std::min(w[i], std::abs(rng.normal()) * temperature);
            if (delta > 0.0) {
                std::vector<double> trial = w;
                trial[i] -= delta;
                trial[j] += delta;
                const double next = quadratic_action(k, trial);
                const double accept =
                    next <= value
                        ? 1.0
                        : std::exp(-(next - value) /
                                   std::max(temperature, 1e-300));
                if (rng.uniform() < accept) {
                    w = std::move(trial);
                    value = next;
                    moved = true;
                }
            }
            temperature *= cfg.anneal_decay;
        }
        out.action_trace.push_back(value);
        if (!moved && cfg.method != OptMethod::Annealing) {
            const ElReport report = compact_report(kernel, points, w);
            if (report.total() <= cfg.stop_tol) out.converged = true;
            break; // no descent direction left at this resolution
        }
    }

    out.iterations = iter;
    out.measure.points = points;
    out.measure.weights = w;
    out.measure.total_volume = 1.0;
    out.report = compact_report(kernel, points, w);
    if (out.report.total() <= cfg.stop_tol) out.converged = true;
    return out;
}

// ---- causal fermion solver ----------------------------------------------

namespace {

// flat parameter vector: weights, then point parameters per mode
struct CfsParams {
    std::vector<double> values;
    std::size_t n_atoms = 0;
    PointMode mode = PointMode::Frozen;
    int rows = 0, cols = 0;

    static CfsParams pack(const CfsMeasure &m, PointMode mode) {
        CfsParams p;
        p.n_atoms = m.size();
        p.mode = mode;
        p.rows = static_cast<int>(m.points[0].psi.rows());
        p.cols = static_cast<int>(m.points[0].psi.cols());
        p.values = m.weights;
        if (mode == PointMode::Scale) {
            p.values.insert(p.values.end(), p.n_atoms, 1.0);
        } else if (mode == PointMode::Full) {
            for (const auto &pt : m.points)
                for (int r = 0; r < p.rows; ++r)
                    for (int c = 0; c < p.cols; ++c) {
                        p.values.push_back(pt.psi(r, c).real());
                        p.values.push_back(pt.psi(r, c).imag());
                    }
        }
        return p;
    }

    CfsMeasure unpack(const CfsMeasure &base) const {
        CfsMeasure m = base;
        for (std::size_t i = 0; i < n_atoms; ++i) m.weights[i] = values[i];
        if (mode == PointMode::Scale) {
            for (std::size_t i = 0; i < n_atoms; ++i)
                m.points[i] = CfsPoint(values[n_atoms + i] * base.points[i].psi,
                                       base.points[i].spin_dim);
        } else if (mode == PointMode::Full) {
            std::size_t k = n_atoms;
            for (std::size_t i = 0; i < n_atoms; ++i) {
                Matrix psi(rows, cols);
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c) {
                        psi(r, c) = Complex(values[k], values[k + 1]);
                        k += 2;
                    }
                m.points[i] = CfsPoint(psi, base.points[i].spin_dim);
            }
        }
        return m;
    }

    void project_volume(double volume) {
        std::vector<double> w(values.begin(), values.begin() + n_atoms);
        w = project_simplex(std::move(w), volume);
        std::copy(w.begin(), w.end(), values.begin());
    }
};

} // namespace

double cfs_objective(const CfsMeasure &m, const ActionParams &p,
                     const OptimizerConfig &cfg, double trace_target) {
    double f = action(m);
    const double tr = trace_integral(m);
    f += cfg.penalty_trace * (tr - trace_target) * (tr - trace_target);
    if (p.bound_C) {
        const double excess =
            std::max(0.0, boundedness_functional(m) - *p.bound_C);
        f += cfg.penalty_bound * excess * excess;
    }
    if (p.kappa > 0.0) {
        // kappa folds |xy|^2 into the Lagrangian under optimization
        f += p.kappa * boundedness_functional(m);
    }
    return f;
}

CfsSolveResult minimize_cfs(const CfsMeasure &initial, const ActionParams &p,
                            const OptimizerConfig &cfg) {
    cfg.check();
    initial.check();
    const double volume = initial.total_volume;
    const double trace_target = p.trace_target.value_or(trace_integral(initial));
    if (p.trace_target &&
        std::abs(trace_integral(initial) - trace_target) >
            p.trace_tol * (1.0 + std::abs(trace_target)))
        throw std::invalid_argument("minimize_cfs: initial trace infeasible");

    auto report_of = [&](const CfsMeasure &m) { return el_residual(m, p); };

    CfsSolveResult out;
    CfsParams params = CfsParams::pack(initial, cfg.point_mode);
    params.project_volume(volume);
    CfsMeasure current = params.unpack(initial);
    double value = cfs_objective(current, p, cfg, trace_target);

    ElReport initial_report = report_of(current);
    auto push_row = [&](int iter, const CfsMeasure &m, const ElReport &r) {
        out.trace.push_back({iter, action(m), boundedness_functional(m),
                             trace_integral(m), r.residual_constancy,
                             r.residual_minimality});
    };
    push_row(0, current, initial_report);

    if (initial_report.total() <= cfg.stop_tol) {
        // already EL-consistent: accept with zero iterations
        out.measure = current;
        out.report = initial_report;
        out.improved = true;
        out.converged = true;
        out.objective = value;
        return out;
    }

    auto objective_at = [&](CfsParams trial) {
        trial.project_volume(volume);
        return cfs_objective(trial.unpack(initial), p, cfg, trace_target);
    };

    Rng rng(cfg.seed);
    double step = cfg.step0;
    double kick = cfg.anneal_t0;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        // central finite differences on every parameter (the spectral weight
        // terms are only Lipschitz, so analytic gradients are not available)
        std::vector<double> grad(params.values.size());
        for (std::size_t q = 0; q < params.values.size(); ++q) {
            CfsParams plus = params, minus = params;
            plus.values[q] += cfg.h_fd;
            minus.values[q] -= cfg.h_fd;
            grad[q] = (objective_at(plus) - objective_at(minus)) /
                      (2.0 * cfg.h_fd);
        }

        bool moved = false;
        while (step > 1e-14) {
            CfsParams trial = params;
            for (std::size_t q = 0; q < trial.values.size(); ++q)
                trial.values[q] -= step * grad[q];
            trial.project_volume(volume);
            const double next = objective_at(trial);
            if (next < value - 1e-16) {
                params = std::move(trial);
                params.project_volume(volume);
                value = next;
                moved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }

        if (!moved) {
            // annealing fallback near kinks of the spectral weight
            for (int d = 0; d < cfg.anneal_draws; ++d) {
                CfsParams trial = params;
                for (std::size_t q = 0; q < trial.values.size(); ++q)
                    trial.values[q] += kick * rng.normal();
                trial.project_volume(volume);
                const double next = objective_at(trial);
                if (next < value) {
                    params = std::move(trial);
                    value = next;
                    moved = true;
                    break;
                }
                kick *= cfg.anneal_decay;
            }
            step = std::max(step, 1e-6);
        }

        current = params.unpack(initial);
        const ElReport report = report_of(current);
        push_row(iter + 1, current, report);
        if (report.total() <= cfg.stop_tol) {
            out.converged = true;
            break;
        }
        if (!moved) break; // stalled: neither descent nor kicks improve
    }

    out.iterations = iter;
    out.measure = params.unpack(initial);
    out.report = report_of(out.measure);
    out.objective = value;
    out.improved = out.report.total() <= initial_report.total();
    return out;
}

} // namespace cvp
