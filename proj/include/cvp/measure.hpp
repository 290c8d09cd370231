#pragma once

#include "cvp/spectral.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace cvp {

// Weighted finite point configuration: the universal measure rho as a sum of
// Dirac atoms.  Space-time is the support {i : rho_i > 0}.
//
// P is CfsPoint in the causal fermion setting, or an integer id into a fixed
// point table in the compact setting.
template <class P>
struct Measure {
    std::vector<P> points;
    std::vector<double> weights;
    double total_volume = 0.0;

    std::size_t size() const { return points.size(); }

    std::vector<int> support() const {
        std::vector<int> idx;
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] > 0.0) idx.push_back(static_cast<int>(i));
        return idx;
    }

    double weight_sum() const {
        return std::accumulate(weights.begin(), weights.end(), 0.0);
    }

    void check() const {
        if (points.size() != weights.size())
            throw std::invalid_argument("measure: points/weights size mismatch");
        for (double w : weights)
            if (w < 0.0) throw std::invalid_argument("measure: negative weight");
        const double s = weight_sum();
        if (std::abs(s - total_volume) > 1e-12 * (std::abs(total_volume) + 1.0))
            throw std::invalid_argument("measure: weights do not sum to volume");
    }
};

using CfsMeasure = Measure<CfsPoint>;
using CompactMeasure = Measure<int>;

// A region Omega as a subset of support indices; the complement is M\Omega.
struct Region {
    std::vector<int> indices;

    bool contains(int i) const {
        return std::find(indices.begin(), indices.end(), i) != indices.end();
    }
    std::vector<int> complement(std::size_t n_atoms) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < n_atoms; ++i)
            if (!contains(static_cast<int>(i))) out.push_back(static_cast<int>(i));
        return out;
    }
};

// Operator-norm distance between represented operators; the topology the
// setting works in.
double point_distance(const CfsPoint &a, const CfsPoint &b);

// Compact points are ids into a fixed table: the discrete metric unless the
// kernel supplies one.
inline double point_distance(int a, int b) { return a == b ? 0.0 : 1.0; }

// Lagrangian of the compact setting: a symmetric nonnegative kernel over a
// fixed finite point table, plus the sampler used to probe inf_F ell.
struct CompactKernel {
    int num_points = 0;
    std::function<double(int, int)> evaluate;
    std::vector<int> probe_points;                       // defaults to all ids
    std::function<double(int, int)> metric;              // optional

    double operator()(int a, int b) const { return evaluate(a, b); }
    std::vector<int> probes() const {
        if (!probe_points.empty()) return probe_points;
        std::vector<int> all(num_points);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    double distance(int a, int b) const {
        return metric ? metric(a, b) : point_distance(a, b);
    }
};

CompactKernel kernel_from_matrix(std::vector<std::vector<double>> values);

// Push-forward (Phi)_* rho: atoms are mapped, weights carried along, and
// images closer than merge_tol are merged into one atom.
template <class P>
Measure<P> pushforward(const Measure<P> &m,
                       const std::function<P(int, const P &)> &map,
                       double merge_tol = 1e-9) {
    Measure<P> out;
    out.total_volume = m.total_volume;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.weights[i] == 0.0) continue;
        P image = map(static_cast<int>(i), m.points[i]);
        bool merged = false;
        for (std::size_t j = 0; j < out.points.size(); ++j) {
            if (point_distance(out.points[j], image) <= merge_tol) {
                out.weights[j] += m.weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.points.push_back(std::move(image));
            out.weights.push_back(m.weights[i]);
        }
    }
    return out;
}

// Equality of weighted point sets under greedy nearest-point matching:
// every atom of m1 must find an unused atom of m2 within tol in the point
// metric and within tol in weight.
template <class P>
bool measure_equal(const Measure<P> &m1, const Measure<P> &m2, double tol) {
    std::vector<int> s1, s2;
    for (std::size_t i = 0; i < m1.size(); ++i)
        if (m1.weights[i] > 0.0) s1.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < m2.size(); ++i)
        if (m2.weights[i] > 0.0) s2.push_back(static_cast<int>(i));
    if (s1.size() != s2.size()) return false;

    std::vector<bool> used(s2.size(), false);
    for (int i : s1) {
        int best = -1;
        double best_dist = tol;
        for (std::size_t k = 0; k < s2.size(); ++k) {
            if (used[k]) continue;
            const double d = point_distance(m1.points[i], m2.points[s2[k]]);
            if (d <= best_dist) {
                best_dist = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0) return false;
        if (std::abs(m1.weights[i] - m2.weights[s2[best]]) > tol) return false;
        used[best] = true;
    }
    return true;
}

} // namespace cvp
