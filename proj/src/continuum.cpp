#include "cvp/continuum.hpp"

#include "cvp/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cvp {

using dirac::SpinVec;
using dirac::sprod;

WavePacket gaussian_packet(int generation, double width, double amplitude,
                           int radial_nodes, int polarization) {
    WavePacket p;
    p.generation = generation;
    p.profile = [width, amplitude](double r) {
        return amplitude * std::exp(-0.5 * r * r / (width * width));
    };
    p.polarization = polarization;
    p.radial_nodes = radial_nodes;
    p.radial_scale = 2.0 * width;
    return p;
}

namespace {

constexpr double kTwoPiSqInv = 1.0 / (2.0 * M_PI * M_PI);

// radial reduction Int d3k/(2pi)^3 F(|k|) = (1/2pi^2) Int r^2 F(r) dr
double radial_integral(const WavePacket &packet,
                       const std::function<double(double)> &f, int nodes) {
    return kTwoPiSqInv *
           half_line_gl([&](double r) { return r * r * f(r); }, nodes,
                        packet.radial_scale);
}

} // namespace

DualValue current_closed(const QhatModel &model, const WavePacket &packet) {
    model.check();
    const int beta = packet.generation;
    const double m = model.masses.at(beta);
    const double c = c_beta(model, beta);
    const double rho = model.weight(beta);

    DualValue out;
    out.momentum_form =
        rho * 0.5 * c *
        radial_integral(
            packet,
            [&](double r) {
                const SpinVec chi = packet.chi(m, r);
                return dirac::omega_shell(m, r) * sprod(chi, chi).real();
            },
            packet.radial_nodes);

    // position route: -(m c/2) Int <psi|g0 psi> d3x, by Plancherel a radial
    // integral of <chi|g0 chi>; evaluated on a different rule to keep the
    // two routes independent
    const int alt_nodes = packet.radial_nodes + packet.radial_nodes / 3 + 7;
    out.position_form =
        -rho * 0.5 * m * c *
        radial_integral(
            packet,
            [&](double r) {
                const SpinVec chi = packet.chi(m, r);
                return sprod(chi, dirac::gamma(0) * chi).real();
            },
            alt_nodes);
    return out;
}

DualValue energy_closed(const QhatModel &model, const WavePacket &packet) {
    model.check();
    const int beta = packet.generation;
    const double m = model.masses.at(beta);
    const double c = c_beta(model, beta);
    const double rho = model.weight(beta);

    DualValue out;
    out.momentum_form =
        -rho * 0.5 * c *
        radial_integral(
            packet,
            [&](double r) {
                const SpinVec chi = packet.chi(m, r);
                const double w = dirac::omega_shell(m, r);
                return w * w * sprod(chi, chi).real();
            },
            packet.radial_nodes);

    const int alt_nodes = packet.radial_nodes + packet.radial_nodes / 3 + 7;
    out.position_form =
        rho * 0.5 * m * c *
        radial_integral(
            packet,
            [&](double r) {
                const SpinVec chi = packet.chi(m, r);
                return dirac::omega_shell(m, r) *
                       sprod(chi, dirac::gamma(0) * chi).real();
            },
            alt_nodes);
    return out;
}

namespace {

// k^0 integral of the eta-regularized current integrand at fixed |k|
double k0_integral(const QhatModel &model, const WavePacket &pa,
                   const WavePacket &pb, double eta, double r,
                   const DirectConfig &cfg) {
    const double ma = model.masses.at(pa.generation);
    const double mb = model.masses.at(pb.generation);
    const SpinVec chi_a = pa.chi(ma, r);
    const SpinVec chi_b = pb.chi(mb, r);
    const double wa = dirac::omega_shell(ma, r);
    const double wb = dirac::omega_shell(mb, r);

    const double m1 = model.masses.front();
    const double s_min = model.cone_margin * m1 * m1;
    const double k0_hi = -std::sqrt(r * r + s_min);
    const double k0_lo = -std::sqrt(r * r + model.q2_max);
    if (k0_hi <= k0_lo) return 0.0;

    auto integrand = [&](double k0) {
        const FourVec k{k0, Eigen::Vector3d(0, 0, r)};
        const std::complex<double> bracket =
            sprod(chi_a, qhat_eval(model, k) * chi_b);
        const std::complex<double> qa(k0 + wa, -eta);
        const std::complex<double> qb(k0 + wb, -eta);
        return (-bracket / (qa * qb)).imag();
    };

    // split at the shell crossings so the near-pole structure is resolved
    std::vector<double> cuts = {k0_lo};
    for (double w : {std::max(wa, wb), std::min(wa, wb)})
        if (-w > k0_lo && -w < k0_hi) cuts.push_back(-w);
    cuts.push_back(k0_hi);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const QuadResult part =
            integrate(integrand, cuts[s], cuts[s + 1], cfg.k0_abs_tol,
                      cfg.k0_rel_tol, cfg.max_panels);
        total += part.value;
    }
    return total;
}

} // namespace

double current_direct(const QhatModel &model, const WavePacket &alpha,
                      const WavePacket &beta, double eta,
                      const DirectConfig &cfg) {
    model.check();
    if (eta <= 0.0) throw std::invalid_argument("current_direct: eta <= 0");
    const double rho_factor = std::sqrt(model.weight(alpha.generation) *
                                        model.weight(beta.generation));
    const int nodes = std::max(alpha.radial_nodes, beta.radial_nodes);
    const double scale = std::max(alpha.radial_scale, beta.radial_scale);
    // d4k/(2pi)^4 with the angular 4pi carried out: 1/(4 pi^3)
    const double prefactor = rho_factor / (4.0 * M_PI * M_PI * M_PI);
    return prefactor *
           half_line_gl(
               [&](double r) {
                   return r * r * k0_integral(model, alpha, beta, eta, r, cfg);
               },
               nodes, scale);
}

double current_direct_extrapolated(const QhatModel &model,
                                   const WavePacket &alpha,
                                   const WavePacket &beta,
                                   const DirectConfig &cfg) {
    const double eta0 =
        cfg.eta0 > 0.0 ? cfg.eta0 : 0.05 * model.masses.front();
    std::vector<double> values;
    double eta = eta0;
    for (int level = 0; level < cfg.eta_levels; ++level, eta *= 0.5)
        values.push_back(current_direct(model, alpha, beta, eta, cfg));
    return richardson(values, 1, 1);
}

ExintResult exint_check() {
    ExintResult out;
    out.reference = M_PI / 4.0;
    auto kernel = [](double eta) {
        return [eta](double q) {
            const double d = q * q + eta * eta;
            return q * q * eta / (d * d);
        };
    };
    out.positive_half =
        integrate_half_line(kernel(1.0), 1.0, 1e-13, 1e-12).value;
    // negative half-line, integrated as written
    out.negative_half =
        integrate_half_line([f = kernel(1.0)](double q) { return f(-q); }, 1.0,
                            1e-13, 1e-12)
            .value;
    out.eta10 = integrate_half_line(kernel(10.0), 10.0, 1e-13, 1e-12).value;
    return out;
}

LayerLemmaResult
fourier_layer_lemma(const std::function<std::complex<double>(double, double)> &fhat,
                    int d, const LayerLemmaConfig &cfg) {
    LayerLemmaResult out;
    if (d < 1) {
        out.note = "spatial dimension must be >= 1";
        return out;
    }

    // preconditions: fhat odd under k -> -k and purely imaginary
    double worst_odd = 0.0, worst_real = 0.0, magnitude = 0.0;
    for (int i = 0; i < 17; ++i) {
        const double w = -cfg.omega_cutoff + 2.0 * cfg.omega_cutoff * i / 16.0;
        for (double k2 : {0.0, 0.3, 1.1}) {
            const std::complex<double> plus = fhat(w, k2);
            const std::complex<double> minus = fhat(-w, k2);
            worst_odd = std::max(worst_odd, std::abs(plus + minus));
            worst_real = std::max(worst_real, std::abs(plus.real()));
            magnitude = std::max(magnitude, std::abs(plus));
        }
    }
    if (worst_odd > cfg.precondition_tol * (1.0 + magnitude) ||
        worst_real > cfg.precondition_tol * (1.0 + magnitude)) {
        out.note = "fhat must be odd under k -> -k and purely imaginary";
        return out;
    }
    out.preconditions_ok = true;

    // g(tau) = (1/2pi) Int fhat(w, 0) e^{-i w tau} dw, real by the
    // antisymmetry: only the sin part survives
    auto g = [&](double tau) {
        const QuadResult q = integrate(
            [&](double w) { return (fhat(w, 0.0) * std::polar(1.0, -w * tau))
                                .real(); },
            -cfg.omega_cutoff, cfg.omega_cutoff, 1e-13, 1e-11, 6000);
        return q.value / (2.0 * M_PI);
    };

    // LHS = Int_{-T}^{0} dt Int_{-T}^{t} g(tau) dtau via cumulative Simpson
    const int n = ((cfg.grid + 3) / 4) * 4; // divisible by 4 for both passes
    const double step = cfg.tau_cutoff / n;
    std::vector<double> samples(n + 1);
    for (int i = 0; i <= n; ++i) samples[i] = g(-cfg.tau_cutoff + i * step);

    std::vector<double> cumulative(n / 2 + 1, 0.0); // at even nodes
    for (int j = 1; j <= n / 2; ++j)
        cumulative[j] = cumulative[j - 1] +
                        step / 3.0 *
                            (samples[2 * j - 2] + 4.0 * samples[2 * j - 1] +
                             samples[2 * j]);

    // outer Simpson over the even nodes (spacing 2*step)
    KahanSum outer;
    const int m = n / 2;
    for (int j = 1; j + 1 <= m; j += 2)
        outer.add(2.0 * step / 3.0 *
                  (cumulative[j - 1] + 4.0 * cumulative[j] + cumulative[j + 1]));
    out.lhs = outer.value();

    // RHS = (i/2) d/dk0 fhat(k)|_{k=0}, central differences with Richardson
    auto rhs_at = [&](double delta) {
        const std::complex<double> diff =
            fhat(delta, 0.0) - fhat(-delta, 0.0);
        return (std::complex<double>(0.0, 0.5) * diff / (2.0 * delta)).real();
    };
    out.rhs = richardson({rhs_at(cfg.delta), rhs_at(cfg.delta / 2)}, 2, 2);
    return out;
}

} // namespace cvp
