#pragma once

#include "cvp/quadrature.hpp"
#include "cvp/variation.hpp"

#include <string>
#include <utility>

// Surface layer integrals and the conservation-law checks built on them.
//
// The basic object is the double sum
//
//   SLI(tau) = sum_{x in Omega} sum_{y in M\Omega} rho_x rho_y
//                ( L_k(Phi_tau(x), y) - L_k(x, Phi_tau(y)) )
//
// which for atomic measures is finite and exact.  Everything here works for
// both settings through the System interface (CfsSystem / CompactSystem):
// size(), weight(i), point(i), lag(p, q), ell(p), trace_of(p).

namespace cvp {

// ---- residual checks (exact identities, no minimality required) ----------

struct SymmetryCheck {
    bool holds = false;
    double max_violation = 0.0;
    double scale = 0.0;
};

// Lagrangian symmetry: L_k(x, Phi_tau(y)) = L_k(Phi_{-tau}(x), y) over all
// support pairs and sampled tau.
template <class S>
SymmetryCheck is_lagrangian_symmetry(const S &sys,
                                     const Variation<typename S::Point> &v,
                                     const std::vector<double> &tau_samples,
                                     double tol) {
    SymmetryCheck out;
    const auto support = sys.rho.support();
    for (double tau : tau_samples) {
        for (int i : support) {
            const auto xm = v.apply(-tau, i, sys.point(i));
            for (int j : support) {
                const auto yp = v.apply(tau, j, sys.point(j));
                const double lhs = sys.lag(sys.point(i), yp);
                const double rhs = sys.lag(xm, sys.point(j));
                out.max_violation =
                    std::max(out.max_violation, std::abs(lhs - rhs));
                out.scale = std::max(out.scale, std::abs(lhs) + std::abs(rhs));
            }
        }
    }
    out.holds = out.max_violation <= tol * (1.0 + out.scale);
    return out;
}

// Measure symmetry: (Phi_tau)_* rho = rho at each sampled tau.
template <class S>
bool is_measure_symmetry(const S &sys, const Variation<typename S::Point> &v,
                         const std::vector<double> &tau_samples, double tol) {
    using P = typename S::Point;
    for (double tau : tau_samples) {
        const auto pushed = pushforward<P>(
            sys.rho, [&](int atom, const P &x) { return v.apply(tau, atom, x); });
        if (!measure_equal(pushed, sys.rho, tol)) return false;
    }
    return true;
}

// Trace preservation: max_i |tr Phi_tau(x_i) - tr x_i| over sampled tau.
template <class S>
double trace_preservation_violation(const S &sys,
                                    const Variation<typename S::Point> &v,
                                    const std::vector<double> &tau_samples) {
    double worst = 0.0;
    for (double tau : tau_samples)
        for (int i : sys.rho.support()) {
            const auto moved = v.apply(tau, i, sys.point(i));
            worst = std::max(worst, std::abs(sys.trace_of(moved) -
                                             sys.trace_of(sys.point(i))));
        }
    return worst;
}

// Generalized-integrated-symmetry residuals: the two defining sums
//   sum_{x in M} sum_{y in Omega} rho rho (L_k(Phi_tau(x), y) - L_k(x, y))
//   sum_{x in Omega} rho (tr Phi_tau(x) - tr x)
template <class S>
std::pair<double, double> gis_residual(const S &sys, const Region &omega,
                                       const Variation<typename S::Point> &v,
                                       double tau) {
    const auto support = sys.rho.support();
    KahanSum lag_sum;
    for (int i : support) {
        const auto moved = v.apply(tau, i, sys.point(i));
        for (int j : omega.indices) {
            const double dl =
                sys.lag(moved, sys.point(j)) - sys.lag(sys.point(i), sys.point(j));
            lag_sum.add(sys.weight(i) * sys.weight(j) * dl);
        }
    }
    KahanSum trace_sum;
    for (int i : omega.indices) {
        const auto moved = v.apply(tau, i, sys.point(i));
        trace_sum.add(sys.weight(i) *
                      (sys.trace_of(moved) - sys.trace_of(sys.point(i))));
    }
    return {lag_sum.value(), trace_sum.value()};
}

// ---- surface layer integral ------------------------------------------------

template <class S>
double surface_layer_integral(const S &sys, const Region &omega,
                              const Variation<typename S::Point> &v,
                              double tau) {
    const auto complement = omega.complement(sys.size());
    KahanSum sum;
    for (int i : omega.indices) {
        const auto xi_moved = v.apply(tau, i, sys.point(i));
        for (int j : complement) {
            if (sys.weight(i) == 0.0 || sys.weight(j) == 0.0) continue;
            const auto yj_moved = v.apply(tau, j, sys.point(j));
            const double term = sys.lag(xi_moved, sys.point(j)) -
                                sys.lag(sys.point(i), yj_moved);
            sum.add(sys.weight(i) * sys.weight(j) * term);
        }
    }
    return sum.value();
}

// The exact identity behind all the conservation laws:
//   (lhs) = (middle) - (surface layer term),  exact for atomic measures.
struct IdentityCheck {
    double lhs = 0.0;     // sum_M sum_Omega (L_k(Phi x, y) - L_k(x, y))
    double middle = 0.0;  // sum_Omega (ell(Phi x) - ell(x))
    double sli = 0.0;     // surface layer term
    double residual = 0.0;
    double scale = 0.0;   // sum of |term| over all three sums
};

template <class S>
IdentityCheck prpuseful_identity_residual(const S &sys, const Region &omega,
                                          const Variation<typename S::Point> &v,
                                          double tau) {
    IdentityCheck out;
    const auto support = sys.rho.support();

    KahanSum lhs, scale;
    for (int i : support) {
        const auto moved = v.apply(tau, i, sys.point(i));
        for (int j : omega.indices) {
            const double term =
                sys.weight(i) * sys.weight(j) *
                (sys.lag(moved, sys.point(j)) - sys.lag(sys.point(i), sys.point(j)));
            lhs.add(term);
            scale.add(std::abs(term));
        }
    }
    out.lhs = lhs.value();

    KahanSum middle;
    for (int i : omega.indices) {
        const auto moved = v.apply(tau, i, sys.point(i));
        const double term =
            sys.weight(i) * (sys.ell(moved) - sys.ell(sys.point(i)));
        middle.add(term);
        scale.add(std::abs(term));
    }
    out.middle = middle.value();

    out.sli = surface_layer_integral(sys, omega, v, tau);
    scale.add(std::abs(out.sli));

    out.residual = std::abs(out.lhs - (out.middle - out.sli));
    out.scale = scale.value();
    return out;
}

// ---- conservation verdicts ---------------------------------------------------

struct FdConfig {
    double h = 0.0; // 0: use 1e-3 * tau_max
    int sweep_samples = 0;
};

struct ConservationVerdict {
    double derivative_estimate = 0.0; // Richardson-extrapolated d/dtau at 0
    double fd_step = 0.0;
    double fd_error = 0.0;   // difference between the two stencil widths
    double scale = 0.0;      // termwise variation magnitude per unit tau
    double el_residual = 0.0;
    double el_slack = 0.0;
    double tol_abs = 0.0;
    double tol_rel = 0.0;
    bool precondition_ok = true;
    std::string failure_kind; // empty when everything qualified
    bool pass = false;
    std::vector<std::pair<double, double>> tau_profile; // (tau, SLI)
};

struct VerdictTolerances {
    double tol_abs = 1e-9;
    double tol_rel = 1e-9;
    double el_slack_coeff = 10.0; // times el residual times rho(Omega)/tau_max
};

// Termwise magnitude of the integrand's variation, per unit tau: the scale
// against which the cancellation in the derivative is judged.
template <class S>
double surface_layer_scale(const S &sys, const Region &omega,
                           const Variation<typename S::Point> &v, double h) {
    const auto complement = omega.complement(sys.size());
    double best = 0.0;
    for (double tau : {h, -h}) {
        KahanSum sum;
        for (int i : omega.indices) {
            const auto xi_moved = v.apply(tau, i, sys.point(i));
            for (int j : complement) {
                const auto yj_moved = v.apply(tau, j, sys.point(j));
                const double base = sys.lag(sys.point(i), sys.point(j));
                sum.add(sys.weight(i) * sys.weight(j) *
                        (std::abs(sys.lag(xi_moved, sys.point(j)) - base) +
                         std::abs(sys.lag(sys.point(i), yj_moved) - base)));
            }
        }
        best = std::max(best, sum.value() / std::abs(tau));
    }
    return best;
}

template <class S>
double region_volume(const S &sys, const Region &omega) {
    double v = 0.0;
    for (int i : omega.indices) v += sys.weight(i);
    return v;
}

// d/dtau of the surface layer integral at tau = 0 by central differences at
// h and h/2 with Richardson extrapolation.  The verdict couples the pass
// tolerance to the measure's EL residual: conservation is only claimed
// modulo how well the EL equations hold.
template <class S>
ConservationVerdict noether_derivative(const S &sys, const Region &omega,
                                       const Variation<typename S::Point> &v,
                                       const FdConfig &fd,
                                       const VerdictTolerances &tols,
                                       double el_residual_total) {
    ConservationVerdict out;
    const double h = fd.h > 0.0 ? fd.h : 1e-3 * v.tau_max;
    out.fd_step = h;
    out.tol_abs = tols.tol_abs;
    out.tol_rel = tols.tol_rel;
    out.el_residual = el_residual_total;

    const double sp = surface_layer_integral(sys, omega, v, h);
    const double sm = surface_layer_integral(sys, omega, v, -h);
    const double sp2 = surface_layer_integral(sys, omega, v, h / 2);
    const double sm2 = surface_layer_integral(sys, omega, v, -h / 2);
    out.tau_profile = {{-h, sm}, {-h / 2, sm2}, {h / 2, sp2}, {h, sp}};

    const double d1 = (sp - sm) / (2.0 * h);
    const double d2 = (sp2 - sm2) / h;
    out.derivative_estimate = richardson({d1, d2}, 2, 2);
    out.fd_error = std::abs(d2 - d1) / 3.0;

    out.scale = surface_layer_scale(sys, omega, v, h);
    out.el_slack = tols.el_slack_coeff * el_residual_total *
                   region_volume(sys, omega) / v.tau_max;
    out.pass = std::abs(out.derivative_estimate) <=
               out.tol_abs + out.tol_rel * out.scale + out.el_slack;
    return out;
}

// Four-term surface layer of the Killing conservation law:
//   L_k(f_tau(x), y) - L_k(x, f_tau(y)) - L_k(Phi_tau(x), y) + L_k(x, Phi_tau(y))
double killing_surface_layer(const CfsSystem &sys, const Region &omega,
                             const KillingVariation &kv, double tau);

ConservationVerdict killing_conservation_derivative(
    const CfsSystem &sys, const Region &omega, const KillingVariation &kv,
    const FdConfig &fd, const VerdictTolerances &tols,
    double el_residual_total);

// ---- volume reduction (bijective measure symmetries) -------------------------

struct VolumeReduction {
    double sli = 0.0;
    double ell_weighted_difference = 0.0; // sum_{Phi(O)\O} ell rho - sum_{O\Phi(O)} ell rho
    double residual = 0.0;
    double scale = 0.0;
    double volume_difference = 0.0;       // rho(Phi(O)\O) - rho(O\Phi(O))
    double ell_bar_times_volume = 0.0;    // mean ell times volume difference
    bool bijective = true;
};

// For a bijective measure symmetry, the surface layer integral reduces to the
// ell-weighted volumes of Phi_tau(Omega)\Omega and Omega\Phi_tau(Omega).
template <class S>
VolumeReduction volume_reduction_check(const S &sys, const Region &omega,
                                       const Variation<typename S::Point> &v,
                                       double tau, double match_tol = 1e-9) {
    VolumeReduction out;
    const auto support = sys.rho.support();
    const std::size_t n = support.size();

    // identify Phi_tau as a weight-preserving permutation of the support
    std::vector<int> image(n, -1);
    std::vector<bool> taken(n, false);
    for (std::size_t a = 0; a < n; ++a) {
        const auto moved = v.apply(tau, support[a], sys.point(support[a]));
        for (std::size_t b = 0; b < n; ++b) {
            if (taken[b]) continue;
            if (point_distance(moved, sys.point(support[b])) <= match_tol &&
                std::abs(sys.weight(support[a]) - sys.weight(support[b])) <=
                    match_tol) {
                image[a] = static_cast<int>(b);
                taken[b] = true;
                break;
            }
        }
        if (image[a] < 0) {
            out.bijective = false;
            return out;
        }
    }

    out.sli = surface_layer_integral(sys, omega, v, tau);

    // sets Phi(Omega)\Omega and Omega\Phi(Omega) as support positions
    std::vector<bool> in_omega(n, false), in_image(n, false);
    for (std::size_t a = 0; a < n; ++a)
        if (omega.contains(support[a])) in_omega[a] = true;
    for (std::size_t a = 0; a < n; ++a)
        if (in_omega[a]) in_image[image[a]] = true;

    KahanSum diff;
    double vol_diff = 0.0, ell_bar = 0.0, weight_total = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        const double ell_b = sys.ell(sys.point(support[b]));
        const double w = sys.weight(support[b]);
        ell_bar += w * ell_b;
        weight_total += w;
        if (in_image[b] && !in_omega[b]) {
            diff.add(w * ell_b);
            vol_diff += w;
        } else if (in_omega[b] && !in_image[b]) {
            diff.add(-w * ell_b);
            vol_diff -= w;
            out.scale += std::abs(w * ell_b);
        }
        if (in_image[b] && !in_omega[b]) out.scale += std::abs(w * ell_b);
    }
    out.ell_weighted_difference = diff.value();
    out.volume_difference = vol_diff;
    out.ell_bar_times_volume = (ell_bar / weight_total) * vol_diff;
    out.residual = std::abs(out.sli - out.ell_weighted_difference);
    out.scale += std::abs(out.sli);
    return out;
}

} // namespace cvp
