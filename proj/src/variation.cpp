#include "cvp/variation.hpp"

#include <cmath>

namespace cvp {

UnitaryFamily::UnitaryFamily(Matrix generator)
    : generator_(std::move(generator)) {
    if (generator_.rows() != generator_.cols())
        throw std::invalid_argument("unitary generator must be square");
    if ((generator_ - generator_.adjoint()).norm() >
        1e-10 * (generator_.norm() + 1.0))
        throw std::invalid_argument("unitary generator must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(generator_);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("generator eigendecomposition failed");
    vectors_ = solver.eigenvectors();
    phases_ = solver.eigenvalues();
}

Matrix UnitaryFamily::at(double tau) const {
    Vector diag(phases_.size());
    for (int i = 0; i < phases_.size(); ++i)
        diag[i] = std::polar(1.0, tau * phases_[i]);
    return vectors_ * diag.asDiagonal() * vectors_.adjoint();
}

Matrix UnitaryFamily::inverse_at(double tau) const { return at(-tau); }

CfsVariation make_unitary_variation(const Matrix &generator, double tau_max) {
    auto family = std::make_shared<UnitaryFamily>(generator);
    CfsVariation v;
    v.kind = VariationKind::UnitaryConjugation;
    v.tau_max = tau_max;
    v.map = [family](double tau, int, const CfsPoint &x) {
        // Psi_tau(x) = Psi(x) U_tau^{-1}
        return CfsPoint(x.psi * family->inverse_at(tau), x.spin_dim);
    };
    return v;
}

CfsPoint apply_variation(const CfsVariation &v, const CfsPoint &x, double tau) {
    if (v.kind == VariationKind::PointFlow)
        throw std::invalid_argument(
            "point flows act on atoms; use apply(tau, atom, x)");
    return v.apply(tau, /*atom=*/-1, x);
}

Vector killing_mismatch(const KillingVariation &kv, const CfsMeasure &m,
                        int atom, double tau, const Vector &u) {
    const CfsPoint flowed = kv.f_tau.apply(tau, atom, m.points[atom]);
    const Matrix u_inv = kv.u_tau->inverse_at(tau);
    return flowed.psi * u - m.points[atom].psi * (u_inv * u);
}

double killing_mismatch_offsubspace(const KillingVariation &kv,
                                    const CfsMeasure &m, double tau) {
    const int dim = static_cast<int>(m.points[0].psi.cols());
    // orthonormal basis of K^perp via full QR of [K | I]
    Matrix k = kv.subspace_k;
    Eigen::HouseholderQR<Matrix> qr(k.cols() > 0 ? k : Matrix::Zero(dim, 1));
    const Matrix q = qr.householderQ();
    const int k_rank = k.cols() > 0 ? static_cast<int>(k.cols()) : 0;

    double worst = 0.0;
    for (int col = k_rank; col < dim; ++col) {
        const Vector u = q.col(col);
        for (int i : m.support()) {
            const double psi_norm = m.points[i].psi.norm();
            const double e = killing_mismatch(kv, m, i, tau, u).norm();
            worst = std::max(worst, e / (psi_norm + 1e-300));
        }
    }
    return worst;
}

} // namespace cvp
