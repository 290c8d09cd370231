#include "cvp/measure.hpp"

#include <Eigen/Eigenvalues>
#include <memory>

namespace cvp {

double point_distance(const CfsPoint &a, const CfsPoint &b) {
    if (a.hilbert_dim() != b.hilbert_dim())
        throw std::invalid_argument("point_distance: dimension mismatch");
    const Matrix diff = a.represented() - b.represented();
    // the difference is Hermitian, so the operator norm is the largest
    // eigenvalue magnitude
    Eigen::SelfAdjointEigenSolver<Matrix> solver(diff,
                                                 Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("operator norm eigensolver failed");
    double norm = 0.0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i)
        norm = std::max(norm, std::abs(solver.eigenvalues()[i]));
    return norm;
}

CompactKernel kernel_from_matrix(std::vector<std::vector<double>> values) {
    const int n = static_cast<int>(values.size());
    for (const auto &row : values)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("kernel matrix must be square");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (values[i][j] < 0.0)
                throw std::invalid_argument("kernel must be nonnegative");
            if (std::abs(values[i][j] - values[j][i]) >
                1e-12 * (std::abs(values[i][j]) + 1.0))
                throw std::invalid_argument("kernel must be symmetric");
        }
    CompactKernel k;
    k.num_points = n;
    auto table = std::make_shared<std::vector<std::vector<double>>>(
        std::move(values));
    k.evaluate = [table](int a, int b) { return (*table)[a][b]; };
    return k;
}

} // namespace cvp
