#include "cvp/action.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

namespace {

// fixed-order double sum over pairs of support atoms
double pair_sum(const CfsMeasure &m,
                const std::function<double(const CfsPoint &,
                                           const CfsPoint &)> &term) {
    const auto support = m.support();
    const std::size_t n = support.size();
    return parallel_sum(n * n, [&](std::size_t flat) {
        const int i = support[flat / n];
        const int j = support[flat % n];
        return m.weights[i] * m.weights[j] * term(m.points[i], m.points[j]);
    });
}

} // namespace

double action(const CfsMeasure &m) {
    return pair_sum(
        m, [](const CfsPoint &a, const CfsPoint &b) { return lagrangian(a, b); });
}

double boundedness_functional(const CfsMeasure &m) {
    return pair_sum(m, [](const CfsPoint &a, const CfsPoint &b) {
        return chain_weight_sq(nontrivial_eigenvalues(a, b));
    });
}

double trace_integral(const CfsMeasure &m) {
    KahanSum s;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.weights[i] > 0.0) s.add(m.weights[i] * m.points[i].trace());
    return s.value();
}

double ell(const CfsPoint &x, const CfsMeasure &m, double kappa) {
    KahanSum s;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m.weights[j] > 0.0)
            s.add(m.weights[j] * lagrangian_kappa(x, m.points[j], kappa));
    return s.value();
}

NuEstimate estimate_nu(const CfsMeasure &m, double kappa) {
    NuEstimate out;
    const auto support = m.support();
    double mean_abs_trace = 0.0;
    for (int i : support) mean_abs_trace += std::abs(m.points[i].trace());
    mean_abs_trace /= std::max<std::size_t>(1, support.size());
    const double trace_floor = 1e-12 * (1.0 + mean_abs_trace);

    double weight_total = 0.0;
    KahanSum weighted;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (int i : support) {
        const double tr = m.points[i].trace();
        if (std::abs(tr) <= trace_floor) {
            out.excluded.push_back(i);
            continue;
        }
        const double nu_i = 2.0 * ell(m.points[i], m, kappa) / tr;
        weighted.add(m.weights[i] * nu_i);
        weight_total += m.weights[i];
        lo = any ? std::min(lo, nu_i) : nu_i;
        hi = any ? std::max(hi, nu_i) : nu_i;
        any = true;
    }
    if (!any) {
        out.all_excluded = true;
        return out;
    }
    out.nu = weighted.value() / weight_total;
    out.spread = hi - lo;
    return out;
}

namespace {

// Random probe near a support atom: the stored wave operator plus a Gaussian
// direction of Frobenius norm up to twice the probe radius.
CfsPoint probe_point(const CfsPoint &base, double radius, Rng &rng) {
    Matrix dir(base.psi.rows(), base.psi.cols());
    for (int r = 0; r < dir.rows(); ++r)
        for (int c = 0; c < dir.cols(); ++c)
            dir(r, c) = Complex(rng.normal(), rng.normal());
    const double norm = dir.norm();
    if (norm > 0.0) dir /= norm;
    const double magnitude = radius * 2.0 * rng.uniform();
    return CfsPoint(base.psi + magnitude * dir, base.spin_dim);
}

} // namespace

ElReport el_residual(const CfsMeasure &m, const ActionParams &p) {
    ElReport report;
    const auto support = m.support();
    if (support.empty()) return report;

    const NuEstimate est = estimate_nu(m, p.kappa);
    report.nu_estimate = est.nu;
    report.nu_spread = est.spread;
    report.nu_excluded = est.excluded;
    report.nu = p.nu.value_or(est.nu);

    double weight_total = 0.0;
    KahanSum g_mean;
    for (int i : support) {
        const double ell_i = ell(m.points[i], m, p.kappa);
        const double tr_i = m.points[i].trace();
        report.ell_values.push_back(ell_i);
        report.trace_values.push_back(tr_i);
        g_mean.add(m.weights[i] * (ell_i - report.nu * tr_i));
        weight_total += m.weights[i];
    }
    const double g_bar = g_mean.value() / weight_total;

    double constancy = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
        const double g =
            report.ell_values[k] - report.nu * report.trace_values[k];
        constancy = std::max(constancy, std::abs(g - g_bar));
        scale += std::abs(report.ell_values[k]) +
                 std::abs(report.nu * report.trace_values[k]);
    }
    report.residual_constancy = constancy;
    report.scale = scale / static_cast<double>(support.size());

    // minimality against sampled probes in F, near and away from the support
    std::vector<double> norms;
    for (int i : support) norms.push_back(m.points[i].psi.norm());
    std::sort(norms.begin(), norms.end());
    const double median = norms[norms.size() / 2];
    const double radius = p.probe_radius_factor * median;

    Rng rng(p.probe_seed);
    double min_probe = g_bar;
    for (int k = 0; k < p.probe_count; ++k) {
        const int i = support[static_cast<std::size_t>(k) % support.size()];
        const CfsPoint probe = probe_point(m.points[i], radius, rng);
        const double g =
            ell(probe, m, p.kappa) - report.nu * probe.trace();
        min_probe = std::min(min_probe, g);
    }
    report.residual_minimality = std::max(0.0, g_bar - min_probe);
    report.probe_count = p.probe_count;
    report.probe_seed = p.probe_seed;
    return report;
}

double action_compact(const CompactSystem &sys) {
    const auto support = sys.rho.support();
    const std::size_t n = support.size();
    return parallel_sum(n * n, [&](std::size_t flat) {
        const int i = support[flat / n];
        const int j = support[flat % n];
        return sys.rho.weights[i] * sys.rho.weights[j] *
               sys.kernel.evaluate(sys.rho.points[i], sys.rho.points[j]);
    });
}

ElReport el_residual_compact(const CompactSystem &sys) {
    ElReport report;
    const auto support = sys.rho.support();
    if (support.empty()) return report;

    double weight_total = 0.0;
    KahanSum mean;
    for (int i : support) {
        const double ell_i = sys.ell(sys.rho.points[i]);
        report.ell_values.push_back(ell_i);
        report.trace_values.push_back(0.0);
        mean.add(sys.rho.weights[i] * ell_i);
        weight_total += sys.rho.weights[i];
    }
    const double ell_bar = mean.value() / weight_total;

    double constancy = 0.0, scale = 0.0;
    for (double v : report.ell_values) {
        constancy = std::max(constancy, std::abs(v - ell_bar));
        scale += std::abs(v);
    }
    report.residual_constancy = constancy;
    report.scale = scale / static_cast<double>(support.size());

    double min_probe = ell_bar;
    for (int p : sys.kernel.probes())
        min_probe = std::min(min_probe, sys.ell(p));
    report.residual_minimality = std::max(0.0, ell_bar - min_probe);
    report.probe_count = static_cast<int>(sys.kernel.probes().size());
    return report;
}

} // namespace cvp
