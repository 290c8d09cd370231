#pragma once

#include "cvp/measure.hpp"
#include "cvp/reduce.hpp"
#include "cvp/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cvp {

// Multipliers and tolerances of the causal action principle.  nu is the trace
// multiplier (nu = lambda/2); when unset, the EL residual checker estimates it
// from 2 ell(x) / tr(x) on the support.
struct ActionParams {
    double kappa = 0.0;
    std::optional<double> nu;
    std::optional<double> bound_C;
    std::optional<double> trace_target;
    double trace_tol = 1e-9;
    int probe_count = 64;
    double probe_radius_factor = 0.5; // times the median point norm
    std::uint64_t probe_seed = 0;
};

// Euler-Lagrange residual report.  g = ell - nu tr must be constant on the
// support and minimal against nearby probe points.
struct ElReport {
    std::vector<double> ell_values;   // per support atom
    std::vector<double> trace_values; // per support atom
    double nu = 0.0;                  // multiplier used in the residuals
    double nu_estimate = 0.0;         // weighted mean of 2 ell_i / tr_i
    double nu_spread = 0.0;           // max - min of per-point estimates
    std::vector<int> nu_excluded;     // support points with vanishing trace
    double residual_constancy = 0.0;
    double residual_minimality = 0.0;
    double scale = 0.0;
    int probe_count = 0;
    std::uint64_t probe_seed = 0;

    double total() const { return residual_constancy + residual_minimality; }
};

// ---- causal fermion setting -------------------------------------------------

// A discrete causal fermion system: atoms, weights and the kappa entering
// L_kappa.  All functionals below are plain sums over atoms.
struct CfsSystem {
    using Point = CfsPoint;

    CfsMeasure rho;
    double kappa = 0.0;

    std::size_t size() const { return rho.size(); }
    double weight(int i) const { return rho.weights[i]; }
    const CfsPoint &point(int i) const { return rho.points[i]; }

    double lag(const CfsPoint &a, const CfsPoint &b) const {
        return lagrangian_kappa(a, b, kappa);
    }
    double trace_of(const CfsPoint &p) const { return p.trace(); }

    // ell(x) = sum_j rho_j L_kappa(x, x_j); defined for any point of F
    double ell(const CfsPoint &p) const {
        KahanSum s;
        for (std::size_t j = 0; j < rho.size(); ++j)
            if (rho.weights[j] > 0.0)
                s.add(rho.weights[j] * lag(p, rho.points[j]));
        return s.value();
    }
};

// S = sum_ij rho_i rho_j L(x_i, x_j), kappa excluded (T is reported apart).
double action(const CfsMeasure &m);

// T = sum_ij rho_i rho_j |x_i x_j|^2.
double boundedness_functional(const CfsMeasure &m);

// integral of tr(x) against rho.
double trace_integral(const CfsMeasure &m);

// ell at an arbitrary point of F.
double ell(const CfsPoint &x, const CfsMeasure &m, double kappa);

struct NuEstimate {
    double nu = 0.0;
    double spread = 0.0;
    std::vector<int> excluded; // support atoms where tr(x) vanishes
    bool all_excluded = false;
};

// The relation ell(x) = (nu/2) tr(x) on the support determines nu at a
// minimizer; for approximate minimizers the weighted mean and its spread over
// support points are reported.
NuEstimate estimate_nu(const CfsMeasure &m, double kappa);

ElReport el_residual(const CfsMeasure &m, const ActionParams &p);

// ---- compact setting --------------------------------------------------------

struct CompactSystem {
    using Point = int;

    CompactMeasure rho;
    CompactKernel kernel;

    std::size_t size() const { return rho.size(); }
    double weight(int i) const { return rho.weights[i]; }
    int point(int i) const { return rho.points[i]; }

    double lag(int a, int b) const { return kernel.evaluate(a, b); }
    double trace_of(int) const { return 0.0; } // no trace structure

    double ell(int p) const {
        KahanSum s;
        for (std::size_t j = 0; j < rho.size(); ++j)
            if (rho.weights[j] > 0.0)
                s.add(rho.weights[j] * kernel.evaluate(p, rho.points[j]));
        return s.value();
    }
};

double action_compact(const CompactSystem &sys);

// EL residual in the compact setting: ell itself must be constant on the
// support and minimal over the kernel's probe points.
ElReport el_residual_compact(const CompactSystem &sys);

} // namespace cvp
