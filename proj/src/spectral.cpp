#include "cvp/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace cvp {

void require_compatible(const CfsPoint &x, const CfsPoint &y) {
    if (x.hilbert_dim() != y.hilbert_dim())
        throw std::invalid_argument("points live on different Hilbert spaces");
    if (x.spin_dim != y.spin_dim)
        throw std::invalid_argument("points have different spin dimension");
}

Matrix closed_chain(const CfsPoint &x, const CfsPoint &y) {
    require_compatible(x, y);
    const Matrix s = x.spin_metric();
    const Matrix pxy = -(x.psi * y.psi.adjoint() * s);
    const Matrix pyx = -(y.psi * x.psi.adjoint() * s);
    return pxy * pyx;
}

std::vector<Complex> matrix_eigenvalues(const Matrix &a) {
    Eigen::ComplexEigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("complex eigensolver did not converge");
    const Vector ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

EigenList nontrivial_eigenvalues(const CfsPoint &x, const CfsPoint &y) {
    // The chain is already 2n x 2n, so its spectrum carries the zero padding.
    return EigenList{matrix_eigenvalues(closed_chain(x, y))};
}

double spectral_weight(const EigenList &e) {
    double sum = 0.0;
    for (const Complex &v : e.values) sum += std::abs(v);
    return sum;
}

double chain_weight_sq(const EigenList &e) {
    const double w = spectral_weight(e);
    return w * w;
}

double lagrangian_from_eigen(const EigenList &e, int spin_dim) {
    double sq = 0.0;
    for (const Complex &v : e.values) sq += std::norm(v);
    const double wsq = chain_weight_sq(e);
    double value = sq - wsq / (2.0 * spin_dim);
    // L is a difference of nonnegative quantities; small negatives are noise
    if (value < 0.0 && std::abs(value) < 1e-12 * (wsq + 1.0)) value = 0.0;
    return value;
}

double lagrangian(const CfsPoint &x, const CfsPoint &y) {
    return lagrangian_from_eigen(nontrivial_eigenvalues(x, y), x.spin_dim);
}

double lagrangian_kappa(const CfsPoint &x, const CfsPoint &y, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
    const EigenList e = nontrivial_eigenvalues(x, y);
    return lagrangian_from_eigen(e, x.spin_dim) + kappa * chain_weight_sq(e);
}

CausalRelation causal_classify(const CfsPoint &x, const CfsPoint &y,
                               double tol) {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    return lagrangian(x, y) > tol ? CausalRelation::Timelike
                                  : CausalRelation::Spacelike;
}

} // namespace cvp
