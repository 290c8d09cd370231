#include "cvp/noether.hpp"

namespace cvp {

double killing_surface_layer(const CfsSystem &sys, const Region &omega,
                             const KillingVariation &kv, double tau) {
    const auto complement = omega.complement(sys.size());
    const Matrix u_inv = kv.u_tau->inverse_at(tau);
    auto conjugated = [&](const CfsPoint &x) {
        return CfsPoint(x.psi * u_inv, x.spin_dim);
    };
    KahanSum sum;
    for (int i : omega.indices) {
        const CfsPoint fx = kv.f_tau.apply(tau, i, sys.point(i));
        const CfsPoint px = conjugated(sys.point(i));
        for (int j : complement) {
            if (sys.weight(i) == 0.0 || sys.weight(j) == 0.0) continue;
            const CfsPoint fy = kv.f_tau.apply(tau, j, sys.point(j));
            const CfsPoint py = conjugated(sys.point(j));
            const double term = sys.lag(fx, sys.point(j)) -
                                sys.lag(sys.point(i), fy) -
                                sys.lag(px, sys.point(j)) +
                                sys.lag(sys.point(i), py);
            sum.add(sys.weight(i) * sys.weight(j) * term);
        }
    }
    return sum.value();
}

ConservationVerdict killing_conservation_derivative(
    const CfsSystem &sys, const Region &omega, const KillingVariation &kv,
    const FdConfig &fd, const VerdictTolerances &tols,
    double el_residual_total) {
    ConservationVerdict out;
    const double h = fd.h > 0.0 ? fd.h : 1e-3 * kv.tau_max;
    out.fd_step = h;
    out.tol_abs = tols.tol_abs;
    out.tol_rel = tols.tol_rel;
    out.el_residual = el_residual_total;

    // preconditions: f_tau must preserve the measure (certified at the tau
    // values where the flow completes a permutation) and the trace
    const std::vector<double> cert =
        kv.cert_taus.empty() ? std::vector<double>{h} : kv.cert_taus;
    if (!is_measure_symmetry(sys, kv.f_tau, cert, 1e-9)) {
        out.precondition_ok = false;
        out.failure_kind = "f_tau is not a measure symmetry";
        return out;
    }
    const double trace_violation =
        trace_preservation_violation(sys, kv.f_tau, cert);
    if (trace_violation > 1e-10) {
        out.precondition_ok = false;
        out.failure_kind = "f_tau does not preserve the trace";
        return out;
    }

    const double sp = killing_surface_layer(sys, omega, kv, h);
    const double sm = killing_surface_layer(sys, omega, kv, -h);
    const double sp2 = killing_surface_layer(sys, omega, kv, h / 2);
    const double sm2 = killing_surface_layer(sys, omega, kv, -h / 2);
    out.tau_profile = {{-h, sm}, {-h / 2, sm2}, {h / 2, sp2}, {h, sp}};

    const double d1 = (sp - sm) / (2.0 * h);
    const double d2 = (sp2 - sm2) / h;
    out.derivative_estimate = richardson({d1, d2}, 2, 2);
    out.fd_error = std::abs(d2 - d1) / 3.0;

    // scale: termwise variation of the four-term integrand per unit tau
    const auto complement = omega.complement(sys.size());
    const Matrix u_inv = kv.u_tau->inverse_at(h);
    KahanSum mag;
    for (int i : omega.indices) {
        const CfsPoint fx = kv.f_tau.apply(h, i, sys.point(i));
        const CfsPoint px = CfsPoint(sys.point(i).psi * u_inv,
                                     sys.point(i).spin_dim);
        for (int j : complement) {
            const CfsPoint fy = kv.f_tau.apply(h, j, sys.point(j));
            const CfsPoint py = CfsPoint(sys.point(j).psi * u_inv,
                                         sys.point(j).spin_dim);
            const double base = sys.lag(sys.point(i), sys.point(j));
            mag.add(sys.weight(i) * sys.weight(j) *
                    (std::abs(sys.lag(fx, sys.point(j)) - base) +
                     std::abs(sys.lag(sys.point(i), fy) - base) +
                     std::abs(sys.lag(px, sys.point(j)) - base) +
                     std::abs(sys.lag(sys.point(i), py) - base)));
        }
    }
    out.scale = mag.value() / h;
    out.el_slack = tols.el_slack_coeff * el_residual_total *
                   region_volume(sys, omega) / kv.tau_max;
    out.pass = std::abs(out.derivative_estimate) <=
               out.tol_abs + out.tol_rel * out.scale + out.el_slack;
    return out;
}

} // namespace cvp
