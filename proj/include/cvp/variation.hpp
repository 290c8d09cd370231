#pragma once

#include "cvp/action.hpp"

#include <Eigen/Eigenvalues>
#include <functional>
#include <memory>
#include <vector>

namespace cvp {

enum class VariationKind { Identity, UnitaryConjugation, PointFlow, Composite };

// A parametrized family Phi(tau, .) with Phi(0, .) = id, defined on the
// support atoms.  P is CfsPoint (causal fermion mode) or an id into the
// compact point table.
template <class P>
struct Variation {
    VariationKind kind = VariationKind::Identity;
    double tau_max = 1.0;
    bool flow_on_measure = false; // point flows intended as f_tau
    // Phi(tau, atom index, current point)
    std::function<P(double, int, const P &)> map =
        [](double, int, const P &x) { return x; };

    P apply(double tau, int atom, const P &x) const {
        if (std::abs(tau) >= tau_max)
            throw std::invalid_argument("variation: |tau| >= tau_max");
        return map(tau, atom, x);
    }
};

using CfsVariation = Variation<CfsPoint>;
using CompactVariation = Variation<int>;

// One-parameter unitary group U_tau = exp(i tau A) for a Hermitian generator.
// The inverse is U_{-tau}, exact by construction: both come from the same
// spectral factorization, so U_{-tau} U_tau = V V^dag up to roundoff.
class UnitaryFamily {
  public:
    explicit UnitaryFamily(Matrix generator);

    const Matrix &generator() const { return generator_; }
    Matrix at(double tau) const;                  // U_tau
    Matrix inverse_at(double tau) const;          // U_tau^{-1} = U_{-tau}

  private:
    Matrix generator_;
    Matrix vectors_;
    Eigen::VectorXd phases_;
};

// Phi_tau(x) = U_tau x U_tau^{-1}, acting on the wave operator by
// Psi -> Psi U_tau^{-1}.
CfsVariation make_unitary_variation(const Matrix &generator, double tau_max);

// Point flow from explicit per-atom paths tau -> point.
template <class P>
Variation<P> make_point_flow(std::vector<std::function<P(double)>> paths,
                             double tau_max, bool flow_on_measure) {
    Variation<P> v;
    v.kind = VariationKind::PointFlow;
    v.tau_max = tau_max;
    v.flow_on_measure = flow_on_measure;
    auto table = std::make_shared<std::vector<std::function<P(double)>>>(
        std::move(paths));
    v.map = [table](double tau, int atom, const P &) {
        return (*table)[static_cast<std::size_t>(atom)](tau);
    };
    return v;
}

// Composite variation: parts applied left to right.
template <class P>
Variation<P> make_composite(std::vector<Variation<P>> parts, double tau_max) {
    Variation<P> v;
    v.kind = VariationKind::Composite;
    v.tau_max = tau_max;
    auto held = std::make_shared<std::vector<Variation<P>>>(std::move(parts));
    v.map = [held](double tau, int atom, const P &x) {
        P y = x;
        for (const auto &part : *held) y = part.map(tau, atom, y);
        return y;
    };
    return v;
}

// Spec-facing convenience: apply a point-based variation (unitary, identity,
// composite of those) to a point.  Point flows need the atom index.
CfsPoint apply_variation(const CfsVariation &v, const CfsPoint &x, double tau);

// Killing symmetry with finite-dimensional support: a measure-preserving flow
// f_tau paired with unitaries U_tau whose mismatch E_tau(u, x) vanishes for
// u orthogonal to the subspace K.
struct KillingVariation {
    CfsVariation f_tau;
    std::shared_ptr<UnitaryFamily> u_tau;
    Matrix subspace_k;             // f x dim(K); zero columns means K = {0}
    std::vector<double> cert_taus; // tau values where f_tau is an exact
                                   // permutation of the support
    double tau_max = 1.0;
};

// E_tau(u, x_i) = Psi_{f_tau(x_i)} u - Psi_{x_i} U_tau^{-1} u.
Vector killing_mismatch(const KillingVariation &kv, const CfsMeasure &m,
                        int atom, double tau, const Vector &u);

// Largest mismatch norm over a basis of K^perp and all support atoms,
// relative to the atom's wave-operator norm.
double killing_mismatch_offsubspace(const KillingVariation &kv,
                                    const CfsMeasure &m, double tau);

} // namespace cvp
