#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cvp {

// Minkowski four-vector, signature (+,-,-,-).
struct FourVec {
    double t = 0.0;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();

    double squared() const { return t * t - x.squaredNorm(); }
};

namespace dirac {

using SpinVec = Eigen::Vector4cd;
using SpinMat = Eigen::Matrix4cd;

// Dirac representation: gamma^0 = diag(1,1,-1,-1), gamma^i off-diagonal with
// the Pauli matrices.
const SpinMat &gamma(int mu);

// k-slash = gamma^mu k_mu = k^0 gamma^0 - k.gamma
SpinMat slash(const FourVec &k);

// Spin scalar product <psi|phi> = psi^dag gamma^0 phi.
std::complex<double> sprod(const SpinVec &a, const SpinVec &b);

inline double omega_shell(double mass, double kr) {
    return std::sqrt(mass * mass + kr * kr);
}

// Normalized solution of (slash(k_-) - m) chi = 0 on the lower mass shell
// k_- = (-omega, kvec), with chi^dag chi = 1.  With that normalization the
// rest-frame solution satisfies gamma^0 chi = -chi, so <chi|chi> = -1 and in
// general <chi|chi> = -m/omega while <chi|gamma^0 chi> = +1 (negative
// frequency throughout).
SpinVec shell_spinor(double mass, const Eigen::Vector3d &kvec, int polarization);

} // namespace dirac
} // namespace cvp
