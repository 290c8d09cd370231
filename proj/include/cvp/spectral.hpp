#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cvp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// A point of F, encoded by its wave evaluation operator.
//
// psi is the (2n x f) matrix of Psi(x): H -> S_x in a fixed basis of H, with
// the spin space carrying the indefinite inner product <s|t> = s^dag S t,
// S = diag(+1 x n, -1 x n).  The adjoint with respect to that product is
// Psi^* = Psi^dag S, so the represented operator and the kernel between two
// points are
//
//   x      = -Psi^* Psi           = -Psi^dag S Psi            (f x f)
//   P(x,y) = -Psi(x) Psi(y)^*     = -Psi(x) Psi(y)^dag S      (2n x 2n)
//
// and the closed chain A_xy = P(x,y) P(y,x) has the same nonzero spectrum as
// the operator product xy (checked by the isospectrality tests).
struct CfsPoint {
    Matrix psi;   // 2n x f
    int spin_dim; // n

    CfsPoint() : spin_dim(0) {}
    CfsPoint(Matrix wave, int n) : psi(std::move(wave)), spin_dim(n) {
        if (n <= 0 || psi.rows() != 2 * n || psi.cols() < 1)
            throw std::invalid_argument("CfsPoint: psi must be 2n x f, n >= 1");
    }

    int hilbert_dim() const { return static_cast<int>(psi.cols()); }

    // spin metric S = diag(+1 x n, -1 x n)
    Matrix spin_metric() const {
        Matrix s = Matrix::Zero(2 * spin_dim, 2 * spin_dim);
        for (int i = 0; i < spin_dim; ++i) s(i, i) = 1.0;
        for (int i = spin_dim; i < 2 * spin_dim; ++i) s(i, i) = -1.0;
        return s;
    }

    // the represented operator x = -Psi^dag S Psi on H
    Matrix represented() const {
        return -(psi.adjoint() * spin_metric() * psi);
    }

    double trace() const {
        // tr(x) = -tr(S Psi Psi^dag) without forming the f x f operator
        return -(spin_metric() * psi * psi.adjoint()).trace().real();
    }
};

// Nontrivial eigenvalues of a closed chain, zero-padded to exactly 2n entries.
struct EigenList {
    std::vector<Complex> values;
};

// Thrown when the dense complex eigensolver fails to converge; results are
// never silently truncated.
struct EigenFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_compatible(const CfsPoint &x, const CfsPoint &y);

// Closed chain A_xy = P(x,y) P(y,x), a 2n x 2n matrix isospectral (away from
// zero) to the operator product xy.
Matrix closed_chain(const CfsPoint &x, const CfsPoint &y);

// Eigenvalues of a general complex square matrix via the Schur-based dense
// solver.  Small matrices only; robustness over speed.
std::vector<Complex> matrix_eigenvalues(const Matrix &a);

// Eigenvalues of the closed chain, zero-padded to 2n.
EigenList nontrivial_eigenvalues(const CfsPoint &x, const CfsPoint &y);

// Spectral weight: sum of |lambda_i|.
double spectral_weight(const EigenList &e);

// |xy|^2 = (sum |lambda_i|)^2 for the chain spectrum.
double chain_weight_sq(const EigenList &e);

// Causal Lagrangian L(x,y) = |(xy)^2| - (1/2n) |xy|^2, clamped to zero when
// roundoff produces a tiny negative value (threshold 1e-12 * (|xy|^2 + 1)).
double lagrangian_from_eigen(const EigenList &e, int spin_dim);
double lagrangian(const CfsPoint &x, const CfsPoint &y);

// L_kappa = L + kappa |xy|^2, kappa >= 0.
double lagrangian_kappa(const CfsPoint &x, const CfsPoint &y, double kappa);

enum class CausalRelation { Timelike, Spacelike };

// Two points are timelike separated when L(x,y) > tol, spacelike otherwise.
CausalRelation causal_classify(const CfsPoint &x, const CfsPoint &y,
                               double tol);

} // namespace cvp
