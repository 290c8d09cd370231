#include "cvp/qhat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace cvp {

void QhatModel::check() const {
    if (masses.empty()) throw std::invalid_argument("model: no generations");
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (masses[i] <= 0.0) throw std::invalid_argument("model: mass <= 0");
        if (i > 0 && masses[i] <= masses[i - 1])
            throw std::invalid_argument("model: masses must ascend");
    }
    if (!rho_weights.empty()) {
        if (rho_weights.size() != masses.size())
            throw std::invalid_argument("model: weight count mismatch");
        for (double w : rho_weights)
            if (w <= 0.0) throw std::invalid_argument("model: weight <= 0");
    }
    if (slopes.size() != masses.size())
        throw std::invalid_argument("model: slope table size mismatch");
    if (q2_max <= masses.back() * masses.back())
        throw std::invalid_argument("model: q2_max must exceed the last shell");
}

dirac::SpinMat qhat_eval(const QhatModel &model, const FourVec &k) {
    const double s = k.squared();
    if (s <= 0.0 || k.t >= 0.0)
        throw std::domain_error("qhat_eval: k outside the lower mass cone");
    return model.a(s) * dirac::slash(k) / std::sqrt(s) +
           model.b(s) * dirac::SpinMat::Identity();
}

double c_beta(const QhatModel &model, int beta) {
    const ShellSlopes &s = model.slopes.at(beta);
    double c = s.a_above + s.a_below + s.b_above + s.b_below;
    const double scale = std::abs(s.a_above) + std::abs(s.a_below) +
                         std::abs(s.b_above) + std::abs(s.b_below);
    if (c < 0.0 && std::abs(c) < 1e-12 * (scale + 1.0)) c = 0.0;
    if (c < 0.0)
        throw std::domain_error("c_beta negative: model violates minimality");
    return c;
}

std::vector<double> default_q2_grid(const QhatModel &model, int n) {
    const double lo = 1e-4 * model.masses.front() * model.masses.front();
    std::vector<double> grid;
    grid.reserve(n + model.masses.size());
    for (int i = 0; i < n; ++i)
        grid.push_back(lo + (model.q2_max - lo) * i / (n - 1.0));
    for (double m : model.masses) grid.push_back(m * m); // shells exactly
    std::sort(grid.begin(), grid.end());
    return grid;
}

StabilityReport state_stability_check(const QhatModel &model,
                                      const std::vector<double> &q2_grid) {
    model.check();
    StabilityReport rep;

    rep.min_a = std::numeric_limits<double>::infinity();
    rep.grid_min = std::numeric_limits<double>::infinity();
    for (double s : q2_grid) {
        const double a = model.a(s);
        const double w = a + model.b(s);
        rep.min_a = std::min(rep.min_a, a);
        if (w < rep.grid_min) {
            rep.grid_min = w;
            rep.grid_min_location = s;
        }
    }
    rep.a_nonnegative = rep.min_a >= -1e-12;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double m : model.masses) {
        const double v = model.a(m * m) + model.b(m * m);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.shell_value = 0.5 * (lo + hi);
    rep.shell_value_spread = hi - lo;
    rep.shell_values_equal =
        rep.shell_value_spread <= 1e-10 * (1.0 + std::abs(rep.shell_value));

    rep.minimal_on_shells =
        rep.grid_min >= lo - 1e-10 * (1.0 + std::abs(lo));

    // Lorentz invariance: compare Q-hat entries at a rest-frame momentum and
    // a boosted one with the same q^2
    double worst = 0.0;
    for (double m : model.masses) {
        const FourVec rest{-m, Eigen::Vector3d::Zero()};
        const double kr = 0.7 * m;
        const FourVec boosted{-std::sqrt(m * m + kr * kr),
                              Eigen::Vector3d(0.0, 0.0, kr)};
        const double a_rest = model.a(rest.squared());
        const double a_boost = model.a(boosted.squared());
        const double b_rest = model.b(rest.squared());
        const double b_boost = model.b(boosted.squared());
        worst = std::max(worst, std::abs(a_rest - a_boost) +
                                    std::abs(b_rest - b_boost));
    }
    rep.boost_invariance_violation = worst;

    rep.c_nonnegative = true;
    for (int beta = 0; beta < model.generations(); ++beta) {
        try {
            rep.c_values.push_back(c_beta(model, beta));
        } catch (const std::domain_error &) {
            rep.c_values.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.c_nonnegative = false;
        }
    }

    rep.pass = rep.a_nonnegative && rep.shell_values_equal &&
               rep.minimal_on_shells && rep.c_nonnegative &&
               rep.boost_invariance_violation < 1e-12;
    return rep;
}

ConsistencyReport consistency_check(const QhatModel &model, double tol) {
    ConsistencyReport rep;
    for (int beta = 0; beta < model.generations(); ++beta)
        rep.products.push_back(model.weight(beta) * model.masses[beta] *
                               c_beta(model, beta));
    double lo = rep.products[0], hi = rep.products[0];
    for (double p : rep.products) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double denom = std::max(std::abs(lo), std::abs(hi));
    rep.max_rel_deviation = denom > 0.0 ? (hi - lo) / denom : 0.0;
    rep.pass = rep.max_rel_deviation <= tol;
    return rep;
}

namespace {

// piecewise-linear a+b with the common value at each shell and linear joins
struct PwlCurve {
    std::vector<double> shells; // m^2, ascending
    double value;
    std::vector<double> above, below; // slopes of a+b at each shell

    double operator()(double s) const {
        const std::size_t g = shells.size();
        if (s <= shells.front())
            return value + below.front() * (s - shells.front());
        if (s >= shells.back())
            return value + above.back() * (s - shells.back());
        std::size_t seg = 0;
        while (seg + 1 < g && s > shells[seg + 1]) ++seg;
        // between shells seg and seg+1: minimum of the two rising lines
        const double left = value + above[seg] * (s - shells[seg]);
        const double right = value + below[seg + 1] * (s - shells[seg + 1]);
        return std::min(left, right);
    }
};

} // namespace

std::vector<ShellSlopes> split_slopes(const std::vector<double> &above,
                                      const std::vector<double> &below,
                                      double a_share) {
    std::vector<ShellSlopes> out(above.size());
    for (std::size_t i = 0; i < above.size(); ++i) {
        out[i].a_above = a_share * above[i];
        out[i].a_below = a_share * below[i];
        out[i].b_above = (1.0 - a_share) * above[i];
        out[i].b_below = (1.0 - a_share) * below[i];
    }
    return out;
}

QhatModel make_piecewise_linear_model(std::vector<double> masses,
                                      std::vector<double> rho_weights,
                                      double shell_value,
                                      std::vector<ShellSlopes> slopes,
                                      double a0, double a_share,
                                      double q2_max) {
    if (a0 < 0.0 || a_share < 0.0 || a_share > 1.0)
        throw std::invalid_argument("piecewise model: bad a split");
    auto curve = std::make_shared<PwlCurve>();
    for (double m : masses) curve->shells.push_back(m * m);
    curve->value = shell_value;
    for (const auto &s : slopes) {
        curve->above.push_back(s.a_above + s.b_above);
        curve->below.push_back(s.a_below + s.b_below);
    }

    QhatModel model;
    model.masses = std::move(masses);
    model.rho_weights = std::move(rho_weights);
    model.slopes = std::move(slopes);
    model.q2_max = q2_max;
    const double v = shell_value;
    model.a = [curve, a0, a_share, v](double s) {
        return a0 + a_share * ((*curve)(s)-v);
    };
    model.b = [curve, a0, a_share, v](double s) {
        return (1.0 - a_share) * ((*curve)(s)-v) + v - a0;
    };
    model.check();
    return model;
}

QhatModel make_smooth_model(std::vector<double> masses,
                            std::vector<double> rho_weights,
                            double shell_value, double curvature, double a0,
                            double a_share, double q2_max) {
    auto shells = std::make_shared<std::vector<double>>();
    for (double m : masses) shells->push_back(m * m);
    auto well = [shells, curvature, shell_value](double s) {
        double prod = curvature;
        for (double m2 : *shells) prod *= (s - m2) * (s - m2);
        return shell_value + prod;
    };

    QhatModel model;
    model.masses = std::move(masses);
    model.rho_weights = std::move(rho_weights);
    model.slopes.assign(model.masses.size(), ShellSlopes{}); // all zero: c=0
    model.q2_max = q2_max;
    const double v = shell_value;
    model.a = [well, a0, a_share, v](double s) {
        return a0 + a_share * (well(s) - v);
    };
    model.b = [well, a0, a_share, v](double s) {
        return (1.0 - a_share) * (well(s) - v) + v - a0;
    };
    model.check();
    return model;
}

} // namespace cvp
