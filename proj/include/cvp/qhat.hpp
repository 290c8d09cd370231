#pragma once

#include "cvp/dirac.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cvp {

// One-sided slopes of a and b in the q^2 variable at a mass shell, from
// above (q^2 > m^2) and below.  c_beta is their four-term sum; at a state
// stable minimum of a+b the sum is required to be nonnegative.
struct ShellSlopes {
    double a_above = 0.0;
    double a_below = 0.0;
    double b_above = 0.0;
    double b_below = 0.0;
};

// State-stable vacuum structure: Q-hat(k) = a(k^2) kslash/|k| + b(k^2) on the
// lower mass cone {k^2 > 0, k^0 < 0}, with a, b Lorentz invariant (functions
// of q^2 alone by construction) and a+b minimal on the mass shells.
struct QhatModel {
    std::vector<double> masses;       // m_beta > 0, ascending
    std::vector<double> rho_weights;  // generation weight factors, default 1
    std::function<double(double)> a;  // of q^2 > 0, nonnegative
    std::function<double(double)> b;
    std::vector<ShellSlopes> slopes;  // per shell
    double q2_max = 0.0;              // domain covered by the curve
    double cone_margin = 1e-6;        // window width at the cone boundary,
                                      // in units of m_1^2 (reported per run)

    int generations() const { return static_cast<int>(masses.size()); }
    double weight(int beta) const {
        return rho_weights.empty() ? 1.0 : rho_weights[beta];
    }
    void check() const;
};

// Q-hat evaluated inside the lower mass cone; throws outside.
dirac::SpinMat qhat_eval(const QhatModel &model, const FourVec &k);

// c_beta = sum of the four one-sided shell slopes of a and b.  A negative
// value is a model error and throws; state-stable fixtures keep it >= 0.
double c_beta(const QhatModel &model, int beta);

struct StabilityReport {
    bool a_nonnegative = false;
    double min_a = 0.0;
    bool shell_values_equal = false;
    double shell_value = 0.0;
    double shell_value_spread = 0.0;
    bool minimal_on_shells = false;
    double grid_min = 0.0;
    double grid_min_location = 0.0;
    double boost_invariance_violation = 0.0;
    std::vector<double> c_values;    // NaN where negative (model error)
    bool c_nonnegative = false;
    bool pass = false;
};

// Verifies Def-style state stability on a q^2 grid: a >= 0, common shell
// value of a+b, minimality over the grid, and c_beta >= 0.
StabilityReport state_stability_check(const QhatModel &model,
                                      const std::vector<double> &q2_grid);

std::vector<double> default_q2_grid(const QhatModel &model, int n = 2001);

struct ConsistencyReport {
    std::vector<double> products; // rho_beta m_beta c_beta
    double max_rel_deviation = 0.0;
    bool pass = false;
};

// Mathematical consistency condition: rho_a m_a c_a = rho_b m_b c_b for all
// generation pairs.
ConsistencyReport consistency_check(const QhatModel &model, double tol = 1e-12);

// ---- test model builders ------------------------------------------------

// Piecewise-linear (a+b): common value `shell_value` at every mass shell,
// one-sided q^2 slopes per shell, linear joins rising between shells.  The
// fraction `a_share` of the varying part goes into a on top of the constant
// floor a0 >= 0.
QhatModel make_piecewise_linear_model(std::vector<double> masses,
                                      std::vector<double> rho_weights,
                                      double shell_value,
                                      std::vector<ShellSlopes> slopes,
                                      double a0, double a_share,
                                      double q2_max);

// Convenience: build the slope table for a+b from (above, below) pairs with
// the a/b split implied by a_share.
std::vector<ShellSlopes> split_slopes(const std::vector<double> &above,
                                      const std::vector<double> &below,
                                      double a_share);

// Smooth baseline with c = 0: a+b = shell_value + curvature * prod (q^2-m^2)^2.
QhatModel make_smooth_model(std::vector<double> masses,
                            std::vector<double> rho_weights,
                            double shell_value, double curvature, double a0,
                            double a_share, double q2_max);

} // namespace cvp
