#include "cvp/dirac.hpp"

#include <stdexcept>

namespace cvp::dirac {

namespace {

using C = std::complex<double>;

SpinMat build_gamma(int mu) {
    SpinMat g = SpinMat::Zero();
    switch (mu) {
    case 0:
        g(0, 0) = 1; g(1, 1) = 1; g(2, 2) = -1; g(3, 3) = -1;
        break;
    case 1:
        g(0, 3) = 1; g(1, 2) = 1; g(2, 1) = -1; g(3, 0) = -1;
        break;
    case 2:
        g(0, 3) = C(0, -1); g(1, 2) = C(0, 1);
        g(2, 1) = C(0, 1);  g(3, 0) = C(0, -1);
        break;
    case 3:
        g(0, 2) = 1; g(1, 3) = -1; g(2, 0) = -1; g(3, 1) = 1;
        break;
    default:
        throw std::invalid_argument("gamma index out of range");
    }
    return g;
}

} // namespace

const SpinMat &gamma(int mu) {
    static const SpinMat g0 = build_gamma(0);
    static const SpinMat g1 = build_gamma(1);
    static const SpinMat g2 = build_gamma(2);
    static const SpinMat g3 = build_gamma(3);
    switch (mu) {
    case 0: return g0;
    case 1: return g1;
    case 2: return g2;
    case 3: return g3;
    default: throw std::invalid_argument("gamma index out of range");
    }
}

SpinMat slash(const FourVec &k) {
    return k.t * gamma(0) - k.x[0] * gamma(1) - k.x[1] * gamma(2) -
           k.x[2] * gamma(3);
}

std::complex<double> sprod(const SpinVec &a, const SpinVec &b) {
    return a.adjoint() * (gamma(0) * b);
}

SpinVec shell_spinor(double mass, const Eigen::Vector3d &kvec,
                     int polarization) {
    if (mass <= 0.0) throw std::invalid_argument("shell_spinor: mass <= 0");
    if (polarization != 0 && polarization != 1)
        throw std::invalid_argument("shell_spinor: polarization must be 0 or 1");
    const double w = omega_shell(mass, kvec.norm());

    // sigma . k on the chosen 2-spinor
    Eigen::Matrix2cd sk;
    sk << C(kvec[2], 0), C(kvec[0], -kvec[1]),
          C(kvec[0], kvec[1]), C(-kvec[2], 0);
    Eigen::Vector2cd xi = Eigen::Vector2cd::Zero();
    xi[polarization] = 1.0;

    // (slash(k_-) - m) chi = 0 with k_- = (-omega, kvec):
    //   upper = -sigma.k xi / (omega + m), lower = xi
    SpinVec chi;
    const Eigen::Vector2cd upper = -(sk * xi) / (w + mass);
    chi << upper[0], upper[1], xi[0], xi[1];
    chi /= chi.norm(); // chi^dag chi = 1
    return chi;
}

} // namespace cvp::dirac
