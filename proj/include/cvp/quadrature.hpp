#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cvp {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;     // accumulated local error estimates
    bool converged = true;  // false when the interval budget ran out
};

namespace detail {

// G7/K15 node-weight table on [-1, 1]: {abscissa, Gauss weight, Kronrod weight}
inline constexpr double gk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

inline void gk15_panel(const std::function<double(double)> &f, double a,
                       double b, double &k15, double &err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = gk15[0][1] * f0;
    double k = gk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += gk15[i][1] * fi;
        k += gk15[i][2] * fi;
    }
    g7 *= half;
    k *= half;
    k15 = k;
    err = std::abs(k - g7);
}

} // namespace detail

// Adaptive Gauss-Kronrod on [a, b]: bisects the worst panel until the summed
// error estimate meets abs_tol + rel_tol*|integral|.
inline QuadResult integrate(const std::function<double(double)> &f, double a,
                            double b, double abs_tol = 1e-12,
                            double rel_tol = 1e-10, int max_panels = 4000) {
    struct Panel {
        double a, b, value, error;
    };
    std::vector<Panel> panels;
    double v0, e0;
    detail::gk15_panel(f, a, b, v0, e0);
    panels.push_back({a, b, v0, e0});

    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (err <= abs_tol + rel_tol * std::abs(total))
            return {total, err, true};
        if (static_cast<int>(panels.size()) >= max_panels)
            return {total, err, false};

        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        Panel left{p.a, mid, 0, 0}, right{mid, p.b, 0, 0};
        detail::gk15_panel(f, left.a, left.b, left.value, left.error);
        detail::gk15_panel(f, right.a, right.b, right.value, right.error);
        panels[worst] = left;
        panels.push_back(right);
    }
}

// Integral over [0, inf) via the rational substitution q = s t/(1-t).
inline QuadResult integrate_half_line(const std::function<double(double)> &f,
                                      double scale = 1.0,
                                      double abs_tol = 1e-12,
                                      double rel_tol = 1e-10,
                                      int max_panels = 4000) {
    if (scale <= 0.0) throw std::invalid_argument("integrate_half_line: scale");
    auto mapped = [&](double t) {
        const double om = 1.0 - t;
        const double q = scale * t / om;
        return f(q) * scale / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, abs_tol, rel_tol, max_panels);
}

// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        if (n < 1) throw std::invalid_argument("GaussLegendre: n < 1");
        nodes.resize(n);
        weights.resize(n);
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }
};

// Quadrature of f over [0, inf) with n Gauss-Legendre nodes mapped through
// q = s t/(1-t).  Used for the radial momentum integrals, where the packet
// profile supplies the decay.
inline double half_line_gl(const std::function<double(double)> &f, int n,
                           double scale) {
    const GaussLegendre rule(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 0.5 * (rule.nodes[i] + 1.0); // [0, 1]
        const double om = 1.0 - t;
        const double q = scale * t / om;
        sum += 0.5 * rule.weights[i] * f(q) * scale / (om * om);
    }
    return sum;
}

// Richardson extrapolation of a sequence v(h), v(h/2), v(h/4), ... assuming an
// error expansion c1 h^order + c2 h^(order+step) + ...  Central differences
// use (order=2, step=2); plain first-order limits use (1, 1).
inline double richardson(const std::vector<double> &values, int order = 1,
                         int step = 1) {
    std::vector<double> row = values;
    double factor = std::pow(2.0, order);
    for (std::size_t level = 1; level < values.size(); ++level) {
        for (std::size_t i = 0; i + level < values.size(); ++i)
            row[i] = (factor * row[i + 1] - row[i]) / (factor - 1.0);
        factor *= std::pow(2.0, step);
    }
    return row[0];
}

} // namespace cvp
