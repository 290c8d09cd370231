#pragma once

#include "cvp/qhat.hpp"
#include "cvp/quadrature.hpp"

#include <complex>
#include <functional>
#include <string>

namespace cvp {

// Negative-frequency wave packet of one generation: a real radial profile
// g(|k|) times the normalized lower-shell spinor, taken as a helicity state
// at the sampled direction (the integrands here are rotation invariant, so
// the angular integral contributes a plain 4 pi).
struct WavePacket {
    int generation = 0;
    std::function<double(double)> profile;
    int polarization = 0;
    int radial_nodes = 256;
    double radial_scale = 1.0; // mapping scale of the half-line rule

    dirac::SpinVec chi(double mass, double kr) const {
        return profile(kr) *
               dirac::shell_spinor(mass, Eigen::Vector3d(0, 0, kr),
                                   polarization);
    }
};

WavePacket gaussian_packet(int generation, double width, double amplitude = 1.0,
                           int radial_nodes = 256, int polarization = 0);

// Momentum-space and position-space evaluations of the same conserved
// quantity; they agree through <chi|k_slash chi> algebra plus Plancherel.
struct DualValue {
    double momentum_form = 0.0;
    double position_form = 0.0;
    double difference() const {
        return std::abs(momentum_form - position_form);
    }
};

// J_bb closed form: momentum route (c/2) Int d3k/(2pi)^3 omega <chi|chi>,
// position route -(m c/2) Int d3x <psi|gamma^0 psi> evaluated in momentum
// space via Plancherel.  Both carry the generation weight factor.
DualValue current_closed(const QhatModel &model, const WavePacket &packet);

// Energy analog with an omega^2 weight: -(c/2) Int d3k/(2pi)^3 omega^2
// <chi|chi>, cross-checked against the T^00 route (m c/2) Int omega
// <chi|gamma^0 chi>.
DualValue energy_closed(const QhatModel &model, const WavePacket &packet);

struct DirectConfig {
    double eta0 = 0.0;          // 0: 0.05 * m_1
    int eta_levels = 3;         // eta0, eta0/2, eta0/4 + Richardson
    double k0_abs_tol = 1e-11;
    double k0_rel_tol = 1e-9;
    int max_panels = 6000;
};

// The eta-regularized current integral J_ab(eta): quadrature over the radial
// momentum and over k^0 windowed to the lower mass cone.  The window stops
// cone_margin * m_1^2 short of the cone boundary (reported in CLI output);
// the remainder vanishes with the margin and does not touch the shell-local
// limit.
double current_direct(const QhatModel &model, const WavePacket &alpha,
                      const WavePacket &beta, double eta,
                      const DirectConfig &cfg = {});

// eta -> 0 limit by Richardson extrapolation over eta0, eta0/2, eta0/4.
double current_direct_extrapolated(const QhatModel &model,
                                   const WavePacket &alpha,
                                   const WavePacket &beta,
                                   const DirectConfig &cfg = {});

struct ExintResult {
    double positive_half = 0.0; // Int_0^inf q^2 eta/(q^2+eta^2)^2 dq at eta=1
    double negative_half = 0.0;
    double eta10 = 0.0;         // same integral at eta=10 (scaling invariance)
    double reference = 0.0;     // pi/4
};

ExintResult exint_check();

struct LayerLemmaConfig {
    double delta = 1e-4;        // RHS central-difference step
    double omega_cutoff = 12.0; // |omega| window for the g quadrature
    double tau_cutoff = 40.0;   // time depth of the nested integral
    int grid = 16000;           // Simpson intervals on [-tau_cutoff, 0]
    double precondition_tol = 1e-8;
};

struct LayerLemmaResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool preconditions_ok = false;
    std::string note;
};

// The Fourier layer identity: for antisymmetric homogeneous integrable f,
//   Int_{t<0} dt Int_{t'>0} dt' Int d^dy f = (i/2) d/dk^0 fhat |_{k=0}.
// fhat is supplied as a callable of (omega, |kvec|^2), required to be odd
// under k -> -k and purely imaginary.  The left side runs through the
// reduced double integral of g(t - t'); the right side is a central
// difference.  d tags the spatial dimension for the precondition sampling.
LayerLemmaResult
fourier_layer_lemma(const std::function<std::complex<double>(double, double)> &fhat,
                    int d, const LayerLemmaConfig &cfg = {});

} // namespace cvp
